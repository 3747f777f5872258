__global__ void xs_lookup_kernel(const double* egrid, const double* xs, double* out, int n) {
  int i = blockIdx.x * blockDim.x + threadIdx.x;
  if (i >= n) return;
  double e = egrid[i];
  int lo = 0, hi = n - 1;
  while (hi - lo > 1) {
    int mid = (lo + hi) / 2;
    if (egrid[mid] > e) hi = mid; else lo = mid;
  }
  out[i] = xs[lo];
}
