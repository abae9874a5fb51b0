// expect: OUT_OF_SCOPE
double a[64];
double b[64];
double s;

#pragma hstream in(b) out(a)
{
    double t;
    t = b;
    a = t;
}

s = t;
