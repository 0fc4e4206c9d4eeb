#include "fedmr/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#include <immintrin.h>

#include <cmath>

// AVX2 variants. Element-wise association order mirrors scalar.cpp so the
// backends agree to rounding level; the red-black sweep exploits that nodes
// of one color never neighbor each other, which makes whole-vector stores of
// an 8-wide window safe (odd lanes are rewritten unchanged).

namespace fedmr::kernels {
namespace {

inline __m256d even_lanes(const double* p) {  // p[0] p[2] p[4] p[6]
  __m256d v0 = _mm256_loadu_pd(p);
  __m256d v1 = _mm256_loadu_pd(p + 4);
  return _mm256_permute4x64_pd(_mm256_unpacklo_pd(v0, v1), _MM_SHUFFLE(3, 1, 2, 0));
}

inline __m256d odd_lanes(const double* p) {  // p[1] p[3] p[5] p[7]
  __m256d v0 = _mm256_loadu_pd(p);
  __m256d v1 = _mm256_loadu_pd(p + 4);
  return _mm256_permute4x64_pd(_mm256_unpackhi_pd(v0, v1), _MM_SHUFFLE(3, 1, 2, 0));
}

inline void store_interleaved(double* p, __m256d evens, __m256d odds) {
  __m256d pe = _mm256_permute4x64_pd(evens, _MM_SHUFFLE(3, 1, 2, 0));
  __m256d po = _mm256_permute4x64_pd(odds, _MM_SHUFFLE(3, 1, 2, 0));
  _mm256_storeu_pd(p, _mm256_unpacklo_pd(pe, po));
  _mm256_storeu_pd(p + 4, _mm256_unpackhi_pd(pe, po));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d prod = _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc = _mm256_add_pd(acc, prod);
  }
  __m128d lo = _mm256_castpd256_pd128(acc);        // s0 s1
  __m128d hi = _mm256_extractf128_pd(acc, 1);      // s2 s3
  __m128d pair = _mm_add_pd(lo, hi);               // s0+s2, s1+s3
  double head = _mm_cvtsd_f64(pair) + _mm_cvtsd_f64(_mm_unpackhi_pd(pair, pair));
  double tail = 0;
  for (; i < n; ++i) tail += a[i] * b[i];
  return head + tail;
}

double norm_inf_avx2(const double* a, std::size_t n) {
  const __m256d absmask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffll));
  __m256d m = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    m = _mm256_max_pd(m, _mm256_and_pd(absmask, _mm256_loadu_pd(a + i)));
  __m128d lo = _mm256_castpd256_pd128(m);
  __m128d hi = _mm256_extractf128_pd(m, 1);
  __m128d pair = _mm_max_pd(lo, hi);
  double r = std::max(_mm_cvtsd_f64(pair), _mm_cvtsd_f64(_mm_unpackhi_pd(pair, pair)));
  for (; i < n; ++i) r = std::max(r, std::fabs(a[i]));
  return r;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d t = _mm256_add_pd(_mm256_loadu_pd(y + i),
                              _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
    _mm256_storeu_pd(y + i, t);
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void xpby_avx2(const double* x, double beta, double* y, std::size_t n) {
  const __m256d vb = _mm256_set1_pd(beta);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d t = _mm256_add_pd(_mm256_loadu_pd(x + i),
                              _mm256_mul_pd(vb, _mm256_loadu_pd(y + i)));
    _mm256_storeu_pd(y + i, t);
  }
  for (; i < n; ++i) y[i] = x[i] + beta * y[i];
}

void apply_avx2(const StencilOp& op, const double* x, double* y) {
  const int nx = op.nx;
  const std::size_t n = op.size();
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    __m256d horiz = _mm256_add_pd(
        _mm256_mul_pd(_mm256_loadu_pd(op.cw + k), _mm256_loadu_pd(x + k - 1)),
        _mm256_mul_pd(_mm256_loadu_pd(op.ce + k), _mm256_loadu_pd(x + k + 1)));
    __m256d vert = _mm256_add_pd(
        _mm256_mul_pd(_mm256_loadu_pd(op.cn + k), _mm256_loadu_pd(x + k - nx)),
        _mm256_mul_pd(_mm256_loadu_pd(op.cs + k), _mm256_loadu_pd(x + k + nx)));
    __m256d t = _mm256_sub_pd(
        _mm256_mul_pd(_mm256_loadu_pd(op.diag + k), _mm256_loadu_pd(x + k)),
        _mm256_add_pd(horiz, vert));
    _mm256_storeu_pd(y + k, t);
  }
  for (; k < n; ++k) {
    const double horiz = op.cw[k] * x[k - 1] + op.ce[k] * x[k + 1];
    const double vert = op.cn[k] * x[k - nx] + op.cs[k] * x[k + nx];
    y[k] = op.diag[k] * x[k] - (horiz + vert);
  }
}

void rb_sweep_avx2(const StencilOp& op, int color, double omega,
                   const double* b, double* x) {
  const int nx = op.nx;
  const __m256d vom = _mm256_set1_pd(omega);
  const __m256d vom1 = _mm256_set1_pd(1.0 - omega);
  for (int iy = 0; iy < op.ny; ++iy) {
    const std::size_t row = static_cast<std::size_t>(iy) * nx;
    int ix = (iy + color) & 1;
    // Four active nodes per step; the full 8-wide window must stay inside
    // this row so neighbor loads stay in padded bounds.
    for (; ix + 7 < nx; ix += 8) {
      const std::size_t k = row + ix;
      __m256d xc = even_lanes(x + k);
      __m256d xo = odd_lanes(x + k);
      __m256d horiz = _mm256_add_pd(
          _mm256_mul_pd(even_lanes(op.cw + k), even_lanes(x + k - 1)),
          _mm256_mul_pd(even_lanes(op.ce + k), even_lanes(x + k + 1)));
      __m256d vert = _mm256_add_pd(
          _mm256_mul_pd(even_lanes(op.cn + k), even_lanes(x + k - nx)),
          _mm256_mul_pd(even_lanes(op.cs + k), even_lanes(x + k + nx)));
      __m256d gs = _mm256_div_pd(
          _mm256_add_pd(even_lanes(b + k), _mm256_add_pd(horiz, vert)),
          even_lanes(op.diag + k));
      __m256d xn = _mm256_add_pd(_mm256_mul_pd(vom1, xc), _mm256_mul_pd(vom, gs));
      store_interleaved(x + k, xn, xo);
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

const Backend* avx2_backend() {
#if defined(FEDMR_HAVE_AVX2_TU)
  static const Backend b{"avx2",    dot_avx2,  norm_inf_avx2, axpy_avx2,
                         xpby_avx2, apply_avx2, rb_sweep_avx2};
  return &b;
#else
  return nullptr;
#endif
}

}  // namespace fedmr::kernels
#endif  // x86_64
