// The six-kernel memory benchmark in annotated form: two initialization
// directives, then COPY, SCALE, ADD, TRIAD, FILL, and DAXPY.

double a[1048576];
double b[1048576];
double c[1048576];
double x[1048576];
double y[1048576];
double scalar;

scalar = 3.0;

// operand initialization
#pragma hstream out(b, c) device(*) scheduling(AUTO)
{
    b = 2.0;
    c = 0.5;
}

#pragma hstream out(x, y) device(*) scheduling(AUTO)
{
    x = 1.0;
    y = 3.0;
}

// COPY
#pragma hstream in(b) out(a) device(*) scheduling(4096)
{
    a = b;
}

// SCALE
#pragma hstream in(b, scalar) out(a) device(*) scheduling(4096)
{
    a = scalar*b;
}

// ADD
#pragma hstream in(a, b) out(c) device(*) scheduling(4096)
{
    c = a + b;
}

// TRIAD
#pragma hstream in(b,c,a,scalar) out(a) device(*) scheduling(4096)
{
    a = b+scalar*c;
}

// FILL
#pragma hstream in(scalar) out(a) device(*) scheduling(4096)
{
    a = scalar;
}

// DAXPY
#pragma hstream in(x, scalar) inout(y) device(*) scheduling(4096)
{
    y = y + scalar*x;
}
