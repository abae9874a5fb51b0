// expect: DUP_SCHEDULING
double a[64];
double b[64];

#pragma hstream in(b) out(a) scheduling(4096) scheduling(AUTO)
{
    a = b;
}
