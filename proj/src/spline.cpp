#include "fedmr/spline.hpp"

#include <Eigen/Dense>

#include "fedmr/config.hpp"

namespace fedmr {

// Green-Silverman form: with D the (n-2) x n second-difference operator and
// W the tridiagonal Gram matrix of the linear f'' basis, the minimizer solves
// (I + lambda D^T W^-1 D) f_hat = y, and gamma = W^-1 D f_hat is f'' at the
// interior knots (natural ends are zero).
SplineFit smoothing_spline(const std::vector<double>& x,
                           const std::vector<double>& y, double lambda) {
  const int n = static_cast<int>(x.size());
  if (n < 3 || y.size() != x.size())
    throw PreconditionError("smoothing_spline: need >= 3 matched points");
  if (!(lambda >= 0))
    throw PreconditionError("smoothing_spline: stiffness must be >= 0");
  for (int i = 0; i + 1 < n; ++i)
    if (!(x[i + 1] > x[i]))
      throw PreconditionError("smoothing_spline: abscissas must increase");

  const int m = n - 2;
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(m, n);
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(m, m);
  for (int i = 0; i < m; ++i) {
    const double hl = x[i + 1] - x[i];
    const double hr = x[i + 2] - x[i + 1];
    d(i, i) = 1.0 / hl;
    d(i, i + 1) = -1.0 / hl - 1.0 / hr;
    d(i, i + 2) = 1.0 / hr;
    w(i, i) = (hl + hr) / 3.0;
    if (i + 1 < m) w(i, i + 1) = w(i + 1, i) = hr / 6.0;
  }

  const Eigen::Map<const Eigen::VectorXd> yv(y.data(), n);
  const Eigen::MatrixXd winv_d = w.llt().solve(d);
  const Eigen::MatrixXd a =
      Eigen::MatrixXd::Identity(n, n) + lambda * d.transpose() * winv_d;
  const Eigen::VectorXd f = a.llt().solve(yv);
  const Eigen::VectorXd gamma = winv_d * f;

  SplineFit fit;
  fit.y_hat.assign(f.data(), f.data() + n);
  fit.d2.assign(n, 0.0);
  for (int i = 0; i < m; ++i) fit.d2[i + 1] = gamma[i];
  return fit;
}

}  // namespace fedmr
