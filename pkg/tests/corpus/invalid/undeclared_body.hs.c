// expect: UNDECLARED
double a[64];
double b[64];

#pragma hstream in(b) out(a)
{
    a = b + d;
}
