// DAXPY over declared streams: clause references carry the element type,
// and y moves in both directions.

stream<double> x;
stream<double> y;
double alpha;

alpha = 2.0;

#pragma hstream in(x:double, alpha) inout(y:double) device(*) scheduling(AUTO)
{
    y = y + alpha*x;
}
