// expect: DUP_DECL
double a[64];
int a;
double b[64];

#pragma hstream in(b) out(a)
{
    a = b;
}
