// expect: DUP_DEVICE DUP_SCHEDULING UNDECLARED
double a[64];
double b[64];

#pragma hstream in(b) out(a) device(0) device(1) scheduling(8) scheduling(16)
{
    a = b + nope;
}
