// TRIAD over streamed double arrays: every processing unit collaborates,
// claiming uniform 4096-element chunks.

double a[1048576];
double b[1048576];
double c[1048576];
double scalar;

scalar = 3.0;

#pragma hstream in(b,c,a,scalar) out(a) device(*) scheduling(4096)
{
    a = b+scalar*c;
}
