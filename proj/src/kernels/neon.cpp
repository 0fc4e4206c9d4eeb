#include "fedmr/kernels.hpp"

#if defined(__aarch64__)
#include <arm_neon.h>

#include <cmath>

// NEON variants (2-wide float64). Same association order as scalar.cpp; the
// red-black sweep uses vld2q/vst2q to split a 4-wide window into its two
// active and two inactive lanes.

namespace fedmr::kernels {
namespace {

double dot_neon(const double* a, const double* b, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0), acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vaddq_f64(acc0, vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
    acc1 = vaddq_f64(acc1, vmulq_f64(vld1q_f64(a + i + 2), vld1q_f64(b + i + 2)));
  }
  float64x2_t pair = vaddq_f64(acc0, acc1);  // s0+s2, s1+s3
  double head = vgetq_lane_f64(pair, 0) + vgetq_lane_f64(pair, 1);
  double tail = 0;
  for (; i < n; ++i) tail += a[i] * b[i];
  return head + tail;
}

double norm_inf_neon(const double* a, std::size_t n) {
  float64x2_t m = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) m = vmaxq_f64(m, vabsq_f64(vld1q_f64(a + i)));
  double r = std::max(vgetq_lane_f64(m, 0), vgetq_lane_f64(m, 1));
  for (; i < n; ++i) r = std::max(r, std::fabs(a[i]));
  return r;
}

void axpy_neon(double alpha, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    vst1q_f64(y + i, vaddq_f64(vld1q_f64(y + i), vmulq_f64(va, vld1q_f64(x + i))));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void xpby_neon(const double* x, double beta, double* y, std::size_t n) {
  const float64x2_t vb = vdupq_n_f64(beta);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    vst1q_f64(y + i, vaddq_f64(vld1q_f64(x + i), vmulq_f64(vb, vld1q_f64(y + i))));
  for (; i < n; ++i) y[i] = x[i] + beta * y[i];
}

void apply_neon(const StencilOp& op, const double* x, double* y) {
  const int nx = op.nx;
  const std::size_t n = op.size();
  std::size_t k = 0;
  for (; k + 2 <= n; k += 2) {
    float64x2_t horiz =
        vaddq_f64(vmulq_f64(vld1q_f64(op.cw + k), vld1q_f64(x + k - 1)),
                  vmulq_f64(vld1q_f64(op.ce + k), vld1q_f64(x + k + 1)));
    float64x2_t vert =
        vaddq_f64(vmulq_f64(vld1q_f64(op.cn + k), vld1q_f64(x + k - nx)),
                  vmulq_f64(vld1q_f64(op.cs + k), vld1q_f64(x + k + nx)));
    vst1q_f64(y + k, vsubq_f64(vmulq_f64(vld1q_f64(op.diag + k), vld1q_f64(x + k)),
                               vaddq_f64(horiz, vert)));
  }
  for (; k < n; ++k) {
    const double horiz = op.cw[k] * x[k - 1] + op.ce[k] * x[k + 1];
    const double vert = op.cn[k] * x[k - nx] + op.cs[k] * x[k + nx];
    y[k] = op.diag[k] * x[k] - (horiz + vert);
  }
}

void rb_sweep_neon(const StencilOp& op, int color, double omega,
                   const double* b, double* x) {
  const int nx = op.nx;
  const float64x2_t vom = vdupq_n_f64(omega);
  const float64x2_t vom1 = vdupq_n_f64(1.0 - omega);
  for (int iy = 0; iy < op.ny; ++iy) {
    const std::size_t row = static_cast<std::size_t>(iy) * nx;
    int ix = (iy + color) & 1;
    // Two active nodes per step; the 4-wide window stays inside this row.
    for (; ix + 3 < nx; ix += 4) {
      const std::size_t k = row + ix;
      float64x2x2_t xc = vld2q_f64(x + k);  // .val[0] actives, .val[1] odds
      float64x2_t horiz =
          vaddq_f64(vmulq_f64(vld2q_f64(op.cw + k).val[0], vld2q_f64(x + k - 1).val[0]),
                    vmulq_f64(vld2q_f64(op.ce + k).val[0], vld2q_f64(x + k + 1).val[0]));
      float64x2_t vert =
          vaddq_f64(vmulq_f64(vld2q_f64(op.cn + k).val[0], vld2q_f64(x + k - nx).val[0]),
                    vmulq_f64(vld2q_f64(op.cs + k).val[0], vld2q_f64(x + k + nx).val[0]));
      float64x2_t gs =
          vdivq_f64(vaddq_f64(vld2q_f64(b + k).val[0], vaddq_f64(horiz, vert)),
                    vld2q_f64(op.diag + k).val[0]);
      xc.val[0] = vaddq_f64(vmulq_f64(vom1, xc.val[0]), vmulq_f64(vom, gs));
      vst2q_f64(x + k, xc);
    }
    for (; ix < nx; ix += 2) {
      const std::size_t k = row + ix;
      const double horiz = op.cw[k] * x[k - 1] + op.ce[k] * x[k + 1];
      const double vert = op.cn[k] * x[k - nx] + op.cs[k] * x[k + nx];
      const double gs = (b[k] + (horiz + vert)) / op.diag[k];
      x[k] = (1.0 - omega) * x[k] + omega * gs;
    }
  }
}

}  // namespace

const Backend* neon_backend() {
#if defined(FEDMR_HAVE_NEON_TU)
  static const Backend bk{"neon",    dot_neon,  norm_inf_neon, axpy_neon,
                          xpby_neon, apply_neon, rb_sweep_neon};
  return &bk;
#else
  return nullptr;
#endif
}

}  // namespace fedmr::kernels
#endif  // aarch64
