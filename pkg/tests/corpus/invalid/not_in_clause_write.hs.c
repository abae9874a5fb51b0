// expect: NOT_IN_CLAUSE
double a[64];
double b[64];

#pragma hstream in(a, b)
{
    a = b;
}
