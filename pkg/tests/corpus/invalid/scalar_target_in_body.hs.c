// expect: TYPE_MISMATCH
double a[64];
double s;

#pragma hstream in(a) out(s)
{
    s = a;
}
