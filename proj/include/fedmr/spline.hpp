#ifndef FEDMR_SPLINE_HPP
#define FEDMR_SPLINE_HPP

#include <vector>

namespace fedmr {

// Penalized natural cubic spline on the data's own knots: minimizes
// sum_i (f(x_i) - y_i)^2 + lambda * integral f''(x)^2 dx. The fitted f'' is
// piecewise linear with natural (zero) ends, so its extrema sit on knots.
struct SplineFit {
  std::vector<double> y_hat;  // fitted values at the knots
  std::vector<double> d2;     // second derivatives at the knots
};

SplineFit smoothing_spline(const std::vector<double>& x,
                           const std::vector<double>& y, double lambda);

}  // namespace fedmr

#endif
