#ifndef FEDMR_KERNELS_HPP
#define FEDMR_KERNELS_HPP

#include <cstddef>
#include <string>
#include <vector>

namespace fedmr::kernels {

// Five-point operator on a uniform nx*ny grid in padded storage:
//   (A x)[k] = diag[k]*x[k] - cw[k]*x[k-1] - ce[k]*x[k+1]
//                           - cn[k]*x[k-nx] - cs[k]*x[k+nx]
// Vectors passed to kernels point at the interior (k = 0 .. nx*ny-1) of a
// buffer padded with one zeroed ghost row before and after, so every neighbor
// read is in bounds; boundary coefficients are zero and make ghosts inert.
struct StencilOp {
  int nx = 0;
  int ny = 0;
  const double* diag = nullptr;
  const double* cw = nullptr;
  const double* ce = nullptr;
  const double* cn = nullptr;
  const double* cs = nullptr;
  std::size_t size() const { return static_cast<std::size_t>(nx) * ny; }
};

struct Backend {
  const char* name;
  double (*dot)(const double* a, const double* b, std::size_t n);
  double (*norm_inf)(const double* a, std::size_t n);
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);   // y += alpha*x
  void (*xpby)(const double* x, double beta, double* y, std::size_t n);    // y = x + beta*y
  void (*apply)(const StencilOp& op, const double* x, double* y);
  // One red-black Gauss-Seidel half sweep with relaxation omega over nodes of
  // the given color ((ix+iy)&1 == color), solving A x = b in place.
  void (*rb_sweep)(const StencilOp& op, int color, double omega,
                   const double* b, double* x);
};

const Backend& scalar_backend();
#if defined(__x86_64__) || defined(_M_X64)
const Backend* avx2_backend();  // null when the TU was not built
#endif
#if defined(__aarch64__)
const Backend* neon_backend();
#endif

// Picks the active backend: "scalar", "avx2", "neon", or "auto" (best
// available for this cpu). Returns false with a message if the request
// cannot be satisfied on this machine.
bool select(const std::string& name, std::string& err);
const Backend& active();

// Names of all backends usable on this machine (for tests and the manifest).
std::vector<std::string> available();

// Grid vector in padded storage. data()+nx is what kernels operate on.
class PaddedField {
 public:
  PaddedField() = default;
  PaddedField(int nx, int ny)
      : nx_(nx), buf_(static_cast<std::size_t>(nx) * (ny + 2), 0.0) {}
  double* interior() { return buf_.data() + nx_; }
  const double* interior() const { return buf_.data() + nx_; }
  std::size_t interior_size() const { return buf_.size() - 2 * nx_; }
  void fill(double v) {
    double* p = interior();
    for (std::size_t i = 0, n = interior_size(); i < n; ++i) p[i] = v;
  }

 private:
  int nx_ = 0;
  std::vector<double> buf_;
};

}  // namespace fedmr::kernels

#endif
