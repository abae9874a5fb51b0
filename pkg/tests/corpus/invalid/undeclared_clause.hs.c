// expect: UNDECLARED UNDECLARED
double a[64];

#pragma hstream in(q) out(a)
{
    a = q;
}
