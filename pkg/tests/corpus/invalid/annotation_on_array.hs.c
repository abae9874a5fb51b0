// expect: TYPE_MISMATCH
double a[64];
double b[64];

#pragma hstream in(b:double) out(a)
{
    a = b;
}
