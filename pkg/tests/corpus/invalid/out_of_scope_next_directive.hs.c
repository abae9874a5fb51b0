// expect: OUT_OF_SCOPE
double a[64];
double b[64];

#pragma hstream in(b) out(a)
{
    double t;
    t = b;
    a = t;
}

#pragma hstream in(b) out(a)
{
    a = b + t;
}
