#include "fedmr/transport.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <thread>

#include "fedmr/carriers.hpp"
#include "fedmr/constants.hpp"
#include "fedmr/electrostatics.hpp"
#include "fedmr/photophysics.hpp"
#include "fedmr/spline.hpp"

namespace fedmr {

namespace {

// Knee-detector constants. The stiffness applies to the sweep normalized to
// the unit square, so it carries no units; the turn-on cut drops points on
// the diode's (1 - e^(-U/eta Vt)) rise before fitting, which would otherwise
// always win the curvature contest on sweeps that start at 0 V; the boundary
// margin widens the no-knee band because the natural ends (f'' = 0) push a
// boundary curvature maximum one knot inward.
constexpr double kSplineStiffness = 1e-5;
constexpr int kRefineHalfWindow = 1;   // knots on each side of the argmax
constexpr double kTurnOnCutV = 2.0;    // [V]
constexpr int kBoundaryMargin = 2;     // knots treated as boundary per side
constexpr double kKneeMinRise = 0.5;   // fraction of the rise before the knee

std::string bias_tag(double u) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "bias %.6g V: ", u);
  return buf;
}

// Runs fn(0..n-1) on a bounded worker pool (threads <= 0 means hardware
// concurrency). Results land in caller-owned slots, so ordering is by index
// regardless of completion order; the lowest-index failure is rethrown.
void run_indexed(int n, int threads, const std::function<void(int)>& fn) {
  if (n <= 0) return;
  int t = threads > 0 ? threads
                      : static_cast<int>(std::thread::hardware_concurrency());
  t = std::clamp(t, 1, n);
  std::vector<std::exception_ptr> errors(n);
  if (t == 1) {
    for (int i = 0; i < n; ++i) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
        break;
      }
    }
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(t);
    for (int w = 0; w < t; ++w)
      pool.emplace_back([&] {
        for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
          try {
            fn(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    for (auto& th : pool) th.join();
  }
  for (int i = 0; i < n; ++i)
    if (errors[i]) std::rethrow_exception(errors[i]);
}

// Depletion metrics for uniformly illuminated solves, memoized process-wide:
// sweeps, spectra, and contrast scans revisit the same (p0, U, polarity)
// combinations constantly and only ever consume the reduced metrics.
struct MetricsKey {
  std::array<double, 15> v;
  bool operator<(const MetricsKey& o) const { return v < o.v; }
};

DepletionMetrics metrics_at(const DeviceGeometry& geom,
                            const MaterialParams& mat,
                            const SolverParams& solver, double p0, double u,
                            Electrode positive) {
  double kern = 0;
  for (const char c : solver.kernels) kern = kern * 31.0 + c;
  const MetricsKey key{{geom.electrode_width, geom.electrode_gap,
                        geom.beam_waist, geom.box_depth_eff(), geom.margin_x,
                        geom.grid_h, mat.eps_s, mat.temperature,
                        solver.depletion_threshold, solver.newton_tol,
                        solver.cg_tol, kern, p0, u,
                        positive == Electrode::A ? 0.0 : 1.0}};
  static std::mutex mu;
  static std::map<MetricsKey, DepletionMetrics> cache;
  {
    std::lock_guard<std::mutex> lock(mu);
    const auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }
  const Grid2D grid = make_grid(geom);
  const std::vector<double> p_col(grid.nx, p0);
  const FieldSolution sol = solve_poisson(geom, mat, solver, p_col, u, positive);
  const DepletionMetrics m = extract_metrics(sol, geom, mat, solver, p_col);
  std::lock_guard<std::mutex> lock(mu);
  cache.emplace(key, m);
  return m;
}

}  // namespace

double image_force_lowering(double e_field, const MaterialParams& mat) {
  if (!(e_field >= 0) || !std::isfinite(e_field))
    throw PreconditionError("image_force_lowering: field must be >= 0");
  return std::sqrt(phys::q_e * e_field /
                   (4.0 * phys::pi * phys::eps_0 * mat.eps_s));
}

DiodePair diode_from(const TransportParams& tp, Electrode positive) {
  DiodePair pair;
  pair.phi1 = tp.phi1;
  pair.eta = tp.eta;
  pair.a_star = tp.a_star;
  pair.a_eff = tp.a_eff;
  pair.reverse_contact = positive;
  return pair;
}

double thermionic_current(double u1, double e_field, const DiodePair& pair,
                          const MaterialParams& mat) {
  if (!std::isfinite(u1) || !(u1 >= 0))
    throw PreconditionError("thermionic_current: U1 must be finite and >= 0");
  if (u1 == 0) return 0.0;
  const double vt = phys::thermal_voltage(mat.temperature);
  const double dphi = image_force_lowering(e_field, mat);
  const double barrier = std::min((dphi - pair.phi1) / vt, 700.0);
  const double saturation = pair.a_eff * pair.a_star * mat.temperature *
                            mat.temperature * std::exp(barrier);
  const double diode = -std::expm1(std::max(-u1 / (pair.eta * vt), -700.0));
  const double i = saturation * diode;
  if (!std::isfinite(i))
    throw PreconditionError("thermionic_current: parameters yield a non-finite current");
  return i;
}

IVCurve device_iv(const std::vector<double>& u_sweep, const Config& cfg,
                  double generation_scale) {
  const int n = static_cast<int>(u_sweep.size());
  if (n == 0) throw PreconditionError("device_iv: empty bias sweep");
  if (!(u_sweep.front() >= 0))
    throw PreconditionError("device_iv: biases must be >= 0");
  for (int i = 0; i + 1 < n; ++i)
    if (!(u_sweep[i + 1] > u_sweep[i]))
      throw PreconditionError("device_iv: sweep must increase strictly");
  if (!(generation_scale > 0) || !std::isfinite(generation_scale))
    throw PreconditionError("device_iv: generation scale must be positive");

  const SpinChargeState nv =
      nv_state(cfg.rates, cfg.drive, cfg.geometry.beam_waist);
  const double g =
      cfg.material.nv_density() * nv.pair_rate * generation_scale;
  const CarrierState carriers = steady_carriers(g, cfg.material);
  const double p0 = carriers.p;

  IVCurve curve;
  curve.drive = cfg.drive;
  curve.p0 = p0;
  curve.points.resize(n);

  const DiodePair pair =
      diode_from(cfg.transport, cfg.drive.positive_electrode);
  const double w = cfg.transport.edge_weight;
  run_indexed(n, cfg.solver.threads, [&](int i) {
    const double u = u_sweep[i];
    try {
      const DepletionMetrics m =
          metrics_at(cfg.geometry, cfg.material, cfg.solver, p0, u,
                     cfg.drive.positive_electrode);
      IVPoint pt;
      pt.u = u;
      pt.e_center = m.e_center;
      pt.e_edge = m.e_edge;
      pt.w_vertical = m.w_vertical;
      pt.l_lateral = m.l_lateral;
      pt.stage = m.stage;
      if (p0 > 0) {
        const double e_eff = (1.0 - w) * m.e_center + w * m.e_edge;
        double u1 = u;
        double current = thermionic_current(u1, e_eff, pair, cfg.material);
        if (cfg.transport.series_resistance > 0) {
          for (int k = 0; k < 50; ++k) {
            const double u1_next = std::max(
                u - cfg.transport.series_resistance * current, 0.0);
            if (std::fabs(u1_next - u1) <= 1e-12 * std::max(u, 1.0)) break;
            u1 = u1_next;
            current = thermionic_current(u1, e_eff, pair, cfg.material);
          }
        }
        pt.current = current;
      }
      curve.points[i] = pt;
    } catch (const ConvergenceError& e) {
      throw ConvergenceError(bias_tag(u) + e.what());
    } catch (const PreconditionError& e) {
      throw PreconditionError(bias_tag(u) + e.what());
    }
  });
  return curve;
}

double find_inflection(const std::vector<double>& u,
                       const std::vector<double>& current) {
  if (u.size() < 7 || current.size() != u.size())
    throw PreconditionError("find_inflection: need >= 7 matched points");
  for (std::size_t i = 0; i + 1 < u.size(); ++i)
    if (!(u[i + 1] > u[i]))
      throw PreconditionError("find_inflection: biases must increase strictly");

  std::vector<double> uf, cf;
  for (std::size_t i = 0; i < u.size(); ++i)
    if (u[i] >= kTurnOnCutV) {
      uf.push_back(u[i]);
      cf.push_back(current[i]);
    }
  const int n = static_cast<int>(uf.size());
  if (n < 7)
    throw PreconditionError(
        "find_inflection: sweep does not span the knee above the turn-on");

  const double u0 = uf.front(), du = uf.back() - uf.front();
  const auto [imin, imax] = std::minmax_element(cf.begin(), cf.end());
  const double c0 = *imin, dc = *imax - c0;
  if (!(dc > 0))
    throw ConvergenceError("find_inflection: flat curve has no knee");
  std::vector<double> un(n), yn(n);
  for (int i = 0; i < n; ++i) {
    un[i] = (uf[i] - u0) / du;
    yn[i] = (cf[i] - c0) / dc;
  }

  const SplineFit fit = smoothing_spline(un, yn, kSplineStiffness);
  // The saturating knee sits in the upper part of the rise. Below it the
  // contact field grows like sqrt(U), so the curvature of I(U) diverges
  // toward U = 0 and would shadow the knee; knots before half the rise is
  // complete are not candidates.
  int lo = 1;
  while (lo <= n - 2 && fit.y_hat[lo] < kKneeMinRise) ++lo;
  if (lo > n - 2 - kBoundaryMargin)
    throw ConvergenceError(
        "find_inflection: curve still rising at the sweep end (no knee)");
  int best = lo;
  for (int j = lo + 1; j <= n - 2; ++j)
    if (std::fabs(fit.d2[j]) > std::fabs(fit.d2[best])) best = j;
  if (best < 1 + kBoundaryMargin || best > n - 2 - kBoundaryMargin)
    throw ConvergenceError(
        "find_inflection: curvature maximum at the sweep boundary (no knee)");

  // Parabolic vertex through the argmax knot and its neighbors, in volts.
  const int j = best, hw = kRefineHalfWindow;
  const double x1 = uf[j - hw], x2 = uf[j], x3 = uf[j + hw];
  const double y1 = std::fabs(fit.d2[j - hw]);
  const double y2 = std::fabs(fit.d2[j]);
  const double y3 = std::fabs(fit.d2[j + hw]);
  const double d1 = (y2 - y1) / (x2 - x1);
  const double d2 = (y3 - y2) / (x3 - x2);
  const double a = (d2 - d1) / (x3 - x1);
  if (!(a < 0)) return x2;
  return std::clamp(0.5 * (x1 + x2) - d1 / (2.0 * a), x1, x3);
}

double find_inflection(const IVCurve& curve) {
  std::vector<double> u, i;
  u.reserve(curve.points.size());
  i.reserve(curve.points.size());
  for (const IVPoint& pt : curve.points) {
    u.push_back(pt.u);
    i.push_back(pt.current);
  }
  return find_inflection(u, i);
}

BarrierFit calibrate_barrier(const std::vector<double>& u,
                             const std::vector<double>& current,
                             const DiodePair& seed, const MaterialParams& mat) {
  const int n = static_cast<int>(u.size());
  if (n < 10 || current.size() != u.size())
    throw PreconditionError("calibrate_barrier: need >= 10 matched points");
  for (int i = 0; i < n; ++i)
    if (!(u[i] > 0) || !(current[i] > 0) || !std::isfinite(current[i]))
      throw PreconditionError(
          "calibrate_barrier: points must have U > 0 and I > 0");
  if (!(seed.phi1 > 0) || !(seed.eta > 0) || !(seed.a_eff > 0))
    throw PreconditionError("calibrate_barrier: seed outside physical bounds");

  const double vt = phys::thermal_voltage(mat.temperature);
  const double ln_richardson =
      std::log(seed.a_star * mat.temperature * mat.temperature);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) y[i] = std::log(current[i]);

  // x = (phi1, eta, ln a_eff). phi1 and ln a_eff shift log I by the same
  // constant (slopes -1/Vt and 1), so J is rank 2 and the damped step stays
  // orthogonal to that null direction: the seed's split between the two is
  // preserved and the degeneracy surfaces in the covariance, not the path.
  Eigen::Vector3d x(seed.phi1, seed.eta, std::log(seed.a_eff));
  const auto residual = [&](const Eigen::Vector3d& p, Eigen::VectorXd& r,
                            Eigen::MatrixXd* jac) {
    for (int i = 0; i < n; ++i) {
      const double z = u[i] / (p[1] * vt);
      const double f = -std::expm1(-z);
      r[i] = p[2] + ln_richardson - p[0] / vt + std::log(f) - y[i];
      if (jac) {
        (*jac)(i, 0) = -1.0 / vt;
        (*jac)(i, 1) = -(z / p[1]) * std::exp(-z) / f;
        (*jac)(i, 2) = 1.0;
      }
    }
  };

  Eigen::VectorXd r(n);
  Eigen::MatrixXd jac(n, 3);
  residual(x, r, &jac);
  double cost = 0.5 * r.squaredNorm();
  double mu = 1e-3;
  int iters = 0;
  bool converged = false;
  for (; iters < 200 && !converged; ++iters) {
    const Eigen::Matrix3d h = jac.transpose() * jac;
    const Eigen::Vector3d grad = jac.transpose() * r;
    if (grad.lpNorm<Eigen::Infinity>() < 1e-12 * (1.0 + cost)) {
      converged = true;
      break;
    }
    bool accepted = false;
    for (int k = 0; k < 60; ++k) {
      const Eigen::Vector3d step =
          (h + mu * Eigen::Matrix3d::Identity()).ldlt().solve(-grad);
      const Eigen::Vector3d trial = x + step;
      if (trial[1] > 0) {
        Eigen::VectorXd rt(n);
        residual(trial, rt, nullptr);
        const double ct = 0.5 * rt.squaredNorm();
        if (ct < cost) {
          if (step.lpNorm<Eigen::Infinity>() <
              1e-12 * (1.0 + x.lpNorm<Eigen::Infinity>()))
            converged = true;
          x = trial;
          r.swap(rt);
          cost = ct;
          mu = std::max(mu * 0.3, 1e-14);
          accepted = true;
          break;
        }
      }
      mu *= 4.0;
    }
    if (!accepted) {
      converged = grad.lpNorm<Eigen::Infinity>() < 1e-8;
      break;
    }
    residual(x, r, &jac);
  }
  if (!converged)
    throw ConvergenceError("calibrate_barrier: fit did not converge");
  if (!(x[0] > 0) || x[0] > 10 || x[1] < 0.5 || x[1] > 20)
    throw PreconditionError("calibrate_barrier: fit escaped physical bounds");

  residual(x, r, &jac);
  const Eigen::Matrix3d h = jac.transpose() * jac;
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(
      h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Vector3d s = svd.singularValues();
  int rank = 0;
  for (int i = 0; i < 3; ++i)
    if (s[i] > s[0] * 1e-12) ++rank;
  const double sigma2 = r.squaredNorm() / std::max(1, n - rank);
  Eigen::Matrix3d pinv = Eigen::Matrix3d::Zero();
  for (int i = 0; i < rank; ++i)
    pinv += svd.matrixV().col(i) * svd.matrixU().col(i).transpose() / s[i];

  BarrierFit fit;
  fit.phi1 = x[0];
  fit.eta = x[1];
  fit.a_eff = std::exp(x[2]);
  const Eigen::Matrix3d cov = sigma2 * pinv;
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k) fit.covariance[3 * i + k] = cov(i, k);
  fit.rms_log_residual = std::sqrt(r.squaredNorm() / n);
  fit.condition = s[0] / std::max(s[2], s[0] * 1e-300);
  fit.iterations = iters;
  return fit;
}

}  // namespace fedmr
