#include "fedmr/kernels.hpp"

#include <cmath>

// Reference implementations. The SIMD backends follow the same association
// order per element so cross-backend differences stay at rounding level.

namespace fedmr::kernels {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  // Four independent partial sums, matching the vector backends' lane count.
  double s0 = 0, s1 = 0, s2 = 0, s3 = 0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += a[i] * b[i];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
  }
  double tail = 0;
  for (; i < n; ++i) tail += a[i] * b[i];
  return ((s0 + s2) + (s1 + s3)) + tail;
}

double norm_inf_scalar(const double* a, std::size_t n) {
  double m = 0;
  for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::fabs(a[i]));
  return m;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void xpby_scalar(const double* x, double beta, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = x[i] + beta * y[i];
}

void apply_scalar(const StencilOp& op, const double* x, double* y) {
  const int nx = op.nx;
  const std::size_t n = op.size();
  for (std::size_t k = 0; k < n; ++k) {
    const double horiz = op.cw[k] * x[k - 1] + op.ce[k] * x[k + 1];
    const double vert = op.cn[k] * x[k - nx] + op.cs[k] * x[k + nx];
    y[k] = op.diag[k] * x[k] - (horiz + vert);
  }
}

void rb_sweep_scalar(const StencilOp& op, int color, double omega,
                     const double* b, double* x) {
  const int nx = op.nx;
  for (int iy = 0; iy < op.ny; ++iy) {
    const std::size_t row = static_cast<std::size_t>(iy) * nx;
    for (int ix = (iy + color) & 1; ix < nx; ix += 2) {
      const std::size_t k = row + ix;
      const double horiz = op.cw[k] * x[k - 1] + op.ce[k] * x[k + 1];
      const double vert = op.cn[k] * x[k - nx] + op.cs[k] * x[k + nx];
      const double gs = (b[k] + (horiz + vert)) / op.diag[k];
      x[k] = (1.0 - omega) * x[k] + omega * gs;
    }
  }
}

}  // namespace

const Backend& scalar_backend() {
  static const Backend b{"scalar",    dot_scalar,  norm_inf_scalar,
                         axpy_scalar, xpby_scalar, apply_scalar,
                         rb_sweep_scalar};
  return b;
}

}  // namespace fedmr::kernels
