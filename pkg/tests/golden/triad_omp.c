#pragma omp parallel for
for (int i=start; i<finish; i++)
{
    a[i] = b[i]+scalar*c[i];
}
