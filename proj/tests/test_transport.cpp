#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "fedmr/carriers.hpp"
#include "fedmr/constants.hpp"
#include "fedmr/spline.hpp"
#include "fedmr/transport.hpp"

using namespace fedmr;

namespace {

constexpr double kVt300 = 2.585199978644e-2;

std::vector<double> rangev(double a, double b, double step) {
  std::vector<double> v;
  for (double u = a; u <= b + 1e-9 * step; u += step) v.push_back(u);
  return v;
}

// Small enough for sub-second field solves, same physics as the defaults.
Config fast_config() {
  Config cfg;
  cfg.geometry.beam_waist = 4e-6;
  cfg.geometry.grid_h = 1e-6;
  cfg.drive.rf_enabled = false;
  return cfg;
}

}  // namespace

TEST_CASE("smoothing spline interpolates at zero stiffness and flattens at large") {
  const std::vector<double> x{0, 0.1, 0.25, 0.4, 0.6, 0.8, 1.0};
  std::vector<double> y;
  for (double v : x) y.push_back(std::sin(3.0 * v));

  const SplineFit exact = smoothing_spline(x, y, 0.0);
  for (std::size_t i = 0; i < x.size(); ++i)
    CHECK(exact.y_hat[i] == doctest::Approx(y[i]).epsilon(1e-12));
  CHECK(exact.d2.front() == 0.0);
  CHECK(exact.d2.back() == 0.0);

  const SplineFit flat = smoothing_spline(x, y, 1e9);
  for (std::size_t i = 1; i + 1 < x.size(); ++i)
    CHECK(std::fabs(flat.d2[i]) < 1e-6);

  CHECK_THROWS_AS(smoothing_spline({0, 1}, {0, 1}, 1.0), PreconditionError);
  CHECK_THROWS_AS(smoothing_spline({0, 1, 1}, {0, 1, 2}, 1.0), PreconditionError);
  CHECK_THROWS_AS(smoothing_spline(x, {0, 1}, 1.0), PreconditionError);
  CHECK_THROWS_AS(smoothing_spline(x, y, -1.0), PreconditionError);
}

TEST_CASE("image force lowering matches the closed form") {
  const MaterialParams mat;
  CHECK(image_force_lowering(0.0, mat) == 0.0);
  const double dphi = image_force_lowering(1e7, mat);
  CHECK(dphi == doctest::Approx(5.026185027142e-2).epsilon(1e-11));
  CHECK(dphi == doctest::Approx(0.0503).epsilon(1e-3));
  CHECK(image_force_lowering(4e7, mat) == doctest::Approx(2 * dphi).epsilon(1e-12));
  CHECK_THROWS_AS(image_force_lowering(-1.0, mat), PreconditionError);
}

TEST_CASE("thermionic current reproduces the diode closed forms") {
  const MaterialParams mat;
  const DiodePair pair = diode_from(TransportParams{}, Electrode::A);
  CHECK(pair.reverse_contact == Electrode::A);

  CHECK(thermionic_current(0.0, 1e7, pair, mat) == 0.0);

  // saturation ratio 1 - exp(-q U1 / (eta k T)) against hand evaluation
  const double i_sat = thermionic_current(1e3, 0.0, pair, mat);
  CHECK(thermionic_current(0.05, 0.0, pair, mat) / i_sat ==
        doctest::Approx(8.276555729209e-1).epsilon(1e-12));
  CHECK(thermionic_current(1.0, 0.0, pair, mat) / i_sat ==
        doctest::Approx(1.0 - std::exp(-1.0 / (pair.eta * kVt300))).epsilon(1e-12));

  // barrier-lowering enhancement factor e^(q dphi / k T)
  const double dphi = image_force_lowering(1e7, mat);
  const double enh = thermionic_current(5.0, 1e7, pair, mat) /
                     thermionic_current(5.0, 0.0, pair, mat);
  CHECK(enh == doctest::Approx(std::exp(dphi / kVt300)).epsilon(1e-6));
  CHECK(enh == doctest::Approx(6.988145226492).epsilon(1e-6));

  CHECK_THROWS_AS(thermionic_current(-1.0, 0.0, pair, mat), PreconditionError);
  const double inf = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(thermionic_current(inf, 0.0, pair, mat), PreconditionError);
  DiodePair broken = pair;
  broken.phi1 = -5e4;  // guarded exponent saturates, the prefactor overflows
  broken.a_eff = 1.0;
  CHECK_THROWS_AS(thermionic_current(5.0, 0.0, broken, mat), PreconditionError);
}

TEST_CASE("current moves the right way with barrier, lowering, and bias") {
  const MaterialParams mat;
  DiodePair pair = diode_from(TransportParams{}, Electrode::B);
  const double base = thermionic_current(0.4, 1e7, pair, mat);
  CHECK(thermionic_current(0.4, 1.2e7, pair, mat) > base);  // dphi up
  CHECK(thermionic_current(0.5, 1e7, pair, mat) > base);    // U1 up
  DiodePair taller = pair;
  taller.phi1 += 0.05;
  CHECK(thermionic_current(0.4, 1e7, taller, mat) < base);  // phi1 up
}

TEST_CASE("knee detector pins a synthetic slope break and rejects featureless curves") {
  // piecewise linear, break on a grid point
  auto u = rangev(0, 160, 4);
  std::vector<double> i;
  for (double x : u) i.push_back(x < 80 ? 3.0 * x : 240.0 + 0.5 * (x - 80));
  CHECK(find_inflection(u, i) == doctest::Approx(80.0).epsilon(0.05));

  // break between grid points stays within one step
  std::vector<double> i2;
  for (double x : u) i2.push_back(x < 78 ? 3.0 * x : 234.0 + 0.5 * (x - 78));
  CHECK(std::fabs(find_inflection(u, i2) - 78.0) <= 4.0);

  // monotone pure exponential has its curvature maximum on the boundary
  auto ue = rangev(5, 150, 5);
  std::vector<double> ie;
  for (double x : ue) ie.push_back(std::exp(x / 30.0));
  CHECK_THROWS_AS(find_inflection(ue, ie), ConvergenceError);

  // flat curve, too few points, unsorted sweep
  CHECK_THROWS_AS(find_inflection(ue, std::vector<double>(ue.size(), 2.0)),
                  ConvergenceError);
  CHECK_THROWS_AS(find_inflection({1, 2, 3, 4, 5, 6},
                                  {1, 2, 3, 4, 5, 6}),
                  PreconditionError);
  auto bad = ue;
  std::swap(bad[3], bad[4]);
  CHECK_THROWS_AS(find_inflection(bad, ie), PreconditionError);

  // all points inside the turn-on region cannot span a knee
  CHECK_THROWS_AS(find_inflection({0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7},
                                  {0, 1, 2, 3, 4, 5, 6}),
                  PreconditionError);
}

TEST_CASE("device sweep is monotone and zero optical power carries no current") {
  Config cfg = fast_config();
  const double scale = 1.8863050747937644;  // calibration at the defaults
  const auto sweep = rangev(5, 45, 5);

  const IVCurve off = device_iv(sweep, cfg, scale);
  REQUIRE(off.points.size() == sweep.size());
  CHECK(off.p0 > 0);
  for (std::size_t k = 0; k < off.points.size(); ++k) {
    CHECK(off.points[k].u == sweep[k]);
    CHECK(off.points[k].current >= 0);
    if (k) CHECK(off.points[k].current >= off.points[k - 1].current);
  }

  Config on = cfg;
  on.drive.rf_enabled = true;
  const IVCurve rf = device_iv(sweep, on, scale);
  CHECK(rf.p0 < off.p0);
  for (std::size_t k = 0; k < rf.points.size(); ++k)
    CHECK(rf.points[k].current <= off.points[k].current);

  Config dark = cfg;
  dark.drive.optical_power = 0.0;
  const IVCurve none = device_iv(sweep, dark, scale);
  CHECK(none.p0 == 0.0);
  for (const IVPoint& pt : none.points) CHECK(pt.current == 0.0);

  CHECK_THROWS_AS(device_iv({}, cfg, scale), PreconditionError);
  CHECK_THROWS_AS(device_iv({-5, 10}, cfg, scale), PreconditionError);
  CHECK_THROWS_AS(device_iv({10, 10, 20}, cfg, scale), PreconditionError);
  CHECK_THROWS_AS(device_iv(sweep, cfg, 0.0), PreconditionError);
}

TEST_CASE("solver failures name the offending bias") {
  Config cfg = fast_config();
  cfg.geometry.grid_h = 0.3e-6;  // electrode edges off the grid lines
  try {
    device_iv({10.0, 20.0}, cfg, 1.0);
    FAIL("expected a PreconditionError");
  } catch (const PreconditionError& e) {
    CHECK(std::string(e.what()).find("bias 10 V") != std::string::npos);
  }
}

TEST_CASE("series resistance only ever lowers the current") {
  Config cfg = fast_config();
  const auto sweep = rangev(10, 40, 10);
  const IVCurve plain = device_iv(sweep, cfg, 1.8863050747937644);
  Config rs = cfg;
  rs.transport.series_resistance = 1e12;  // picoampere currents need a huge Rs
  const IVCurve damped = device_iv(sweep, rs, 1.8863050747937644);
  for (std::size_t k = 0; k < sweep.size(); ++k) {
    CHECK(damped.points[k].current <= plain.points[k].current);
    CHECK(damped.points[k].current > 0);
  }
}

TEST_CASE("barrier calibration round trips and survives multiplicative noise") {
  const MaterialParams mat;
  const DiodePair truth = diode_from(TransportParams{}, Electrode::A);
  const auto u = rangev(0.005, 0.150, 0.005);
  std::vector<double> i;
  for (double x : u) i.push_back(thermionic_current(x, 0.0, truth, mat));

  DiodePair seed = truth;
  seed.eta = 1.3;
  const BarrierFit fit = calibrate_barrier(u, i, seed, mat);
  CHECK(fit.phi1 == doctest::Approx(truth.phi1).epsilon(1e-6));
  CHECK(fit.eta == doctest::Approx(truth.eta).epsilon(1e-6));
  CHECK(fit.a_eff == doctest::Approx(truth.a_eff).epsilon(1e-6));
  CHECK(fit.rms_log_residual < 1e-10);

  // phi1 and ln a_eff shift log I identically, so J^T J is numerically rank
  // 2 and the pseudo-inverse confines all uncertainty to the one identifiable
  // offset, which moves the two parameters in opposite directions.
  CHECK(fit.condition > 1e12);
  const double corr = fit.covariance[2] /
                      std::sqrt(fit.covariance[0] * fit.covariance[8]);
  CHECK(corr == doctest::Approx(-1.0).epsilon(1e-6));

  std::mt19937_64 rng(20260816);
  std::uniform_real_distribution<double> eps(-0.05, 0.05);
  double worst = 0;
  for (int t = 0; t < 100; ++t) {
    std::vector<double> noisy = i;
    for (double& v : noisy) v *= 1.0 + eps(rng);
    const BarrierFit f = calibrate_barrier(u, noisy, seed, mat);
    worst = std::max(worst, std::fabs(f.phi1 - truth.phi1));
  }
  CHECK(worst < 0.05);

  CHECK_THROWS_AS(calibrate_barrier({0.01, 0.02}, {1e-18, 2e-18}, seed, mat),
                  PreconditionError);
  std::vector<double> with_zero = i;
  with_zero[3] = 0.0;
  CHECK_THROWS_AS(calibrate_barrier(u, with_zero, seed, mat), PreconditionError);
  DiodePair bad_seed = truth;
  bad_seed.phi1 = -0.5;
  CHECK_THROWS_AS(calibrate_barrier(u, i, bad_seed, mat), PreconditionError);
}
