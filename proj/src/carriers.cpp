#include "fedmr/carriers.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "fedmr/photophysics.hpp"

namespace fedmr {

namespace {

// Trap charges at fixed free-carrier densities (the stationary points of the
// two charge-exchange equations).
double donor_plus(double n, double p, const MaterialParams& m) {
  const double cap_h = m.kappa_hn * m.c_h * p;
  const double cap_e = m.c_e * n;
  return m.n_nitrogen * cap_h / (cap_h + cap_e);
}

double acceptor_minus(double n, double p, const MaterialParams& m) {
  const double cap_e = m.c_e * n;
  const double cap_h = m.c_h * p;
  return m.n_boron * cap_e / (cap_e + cap_h);
}

// Electron density closing the neutrality equation at fixed p. The left side
// p + N_D+(n) falls with n while the right side n + N_A-(n) grows, so the
// root is unique; bracketed bisection is unconditionally safe.
double electron_density_at(double p, const MaterialParams& m) {
  auto defect = [&](double n) {
    return p + donor_plus(n, p, m) - n - acceptor_minus(n, p, m);
  };
  double lo = p * 1e-30;
  double hi = p + m.n_nitrogen;  // defect(hi) < 0: n alone beats every + term
  for (int it = 0; it < 200; ++it) {
    const double mid = std::sqrt(lo * hi);  // densities span many decades
    (defect(mid) > 0 ? lo : hi) = mid;
  }
  return std::sqrt(lo * hi);
}

}  // namespace

double generation_for_hole_density(double p, const MaterialParams& m) {
  if (p <= 0) return 0.0;
  const double n = electron_density_at(p, m);
  return m.c_e * n *
         (donor_plus(n, p, m) + m.n_boron - acceptor_minus(n, p, m));
}

CarrierState steady_carriers(double G, const MaterialParams& m) {
  if (G < 0) throw PreconditionError("steady_carriers: negative generation");
  CarrierState s;
  if (G == 0) {
    s.p = s.n = 0.0;
    s.n_d_plus = s.n_a_minus = m.n_boron;  // dark compensation
    return s;
  }

  // Newton on x = (ln n, ln p); residuals scaled to O(1):
  //   R1 = electron budget / G - 1
  //   R2 = neutrality defect / (p + N_D+)
  auto residual = [&](double n_, double p_, double& r1, double& r2) {
    const double Np = donor_plus(n_, p_, m);
    const double Na = acceptor_minus(n_, p_, m);
    r1 = m.c_e * n_ * (Np + m.n_boron - Na) / G - 1.0;
    r2 = (p_ + Np - n_ - Na) / (p_ + Np);
  };

  auto newton = [&](double& n, double& p) {
    double r1, r2;
    residual(n, p, r1, r2);
    for (int it = 0; it < 100; ++it) {
      if (std::fabs(r1) < 1e-12 && std::fabs(r2) < 1e-12) return true;
      // analytic Jacobian in the log variables
      const double A = m.kappa_hn * m.c_h * p, B = m.c_e * n;
      const double Np = m.n_nitrogen * A / (A + B);
      const double dNp_dln_n = -m.n_nitrogen * A * B / ((A + B) * (A + B));
      const double dNp_dln_p = -dNp_dln_n;
      const double C = m.c_h * p;
      const double Na = m.n_boron * B / (B + C);
      const double dNa_dln_n = m.n_boron * B * C / ((B + C) * (B + C));
      const double dNa_dln_p = -dNa_dln_n;
      Eigen::Matrix2d J;
      Eigen::Vector2d r(r1, r2);
      J(0, 0) = (m.c_e * n * (Np + m.n_boron - Na) +
                 m.c_e * n * (dNp_dln_n - dNa_dln_n)) / G;
      J(0, 1) = m.c_e * n * (dNp_dln_p - dNa_dln_p) / G;
      const double scale2 = p + Np;
      J(1, 0) = (dNp_dln_n - n - dNa_dln_n) / scale2 -
                r2 * dNp_dln_n / scale2;
      J(1, 1) = (p + dNp_dln_p - dNa_dln_p) / scale2 -
                r2 * (p + dNp_dln_p) / scale2;
      Eigen::Vector2d step = J.partialPivLu().solve(-r);
      // cap the log step, then backtrack on the residual norm
      const double cap = 2.0;
      const double biggest = std::max(std::fabs(step(0)), std::fabs(step(1)));
      if (biggest > cap) step *= cap / biggest;
      const double norm0 = r.squaredNorm();
      double damp = 1.0;
      for (int bt = 0; bt < 40; ++bt) {
        const double n_try = n * std::exp(damp * step(0));
        const double p_try = p * std::exp(damp * step(1));
        double t1, t2;
        residual(n_try, p_try, t1, t2);
        if (t1 * t1 + t2 * t2 < norm0 ||
            (std::fabs(t1) < 1e-12 && std::fabs(t2) < 1e-12)) {
          n = n_try;
          p = p_try;
          r1 = t1;
          r2 = t2;
          break;
        }
        damp *= 0.5;
        if (bt == 39) damp = 0.0;
      }
      if (damp == 0.0) break;  // stuck on this start
    }
    return std::fabs(r1) < 1e-12 && std::fabs(r2) < 1e-12;
  };

  // Initial guess. Free regime: p ~ sqrt(G/c_h). Heavy compensation pins
  // N_A- where donor and acceptor charges balance, and p follows from the
  // hole budget against that fixed trap charge. The balance ratio
  // x = c_e n / (c_h p) solves
  //   x^2 + kappa (1 - rho) x - kappa rho = 0,  rho = N_N / N_B.
  const double rho = m.n_nitrogen / m.n_boron;
  const double k = m.kappa_hn;
  const double x =
      0.5 * (k * (rho - 1) +
             std::sqrt(k * k * (rho - 1) * (rho - 1) + 4 * k * rho));
  const double na_comp = m.n_boron * x / (1 + x);
  const double np_comp = m.n_nitrogen * k / (k + x);
  const double p_comp =
      G / (m.c_h * (na_comp + k * (m.n_nitrogen - np_comp)));
  const double p_free = std::sqrt(G / m.c_h);

  double n, p;
  if (p_comp < p_free) {
    p = p_comp;
    n = x * (m.c_h / m.c_e) * p;
  } else {
    p = p_free;
    n = G / (m.c_e * m.n_boron);
  }
  if (!newton(n, p)) {
    // rescue: coarse nested bisection on the electron budget, then polish
    double lo = p * 1e-12, hi = p * 1e12;
    for (int it = 0; it < 80; ++it) {
      const double mid = std::sqrt(lo * hi);
      (generation_for_hole_density(mid, m) < G ? lo : hi) = mid;
    }
    p = std::sqrt(lo * hi);
    n = electron_density_at(p, m);
    if (!newton(n, p)) {
      double r1, r2;
      residual(n, p, r1, r2);
      throw ConvergenceError("steady_carriers: Newton stalled, residuals " +
                             std::to_string(r1) + ", " + std::to_string(r2));
    }
  }

  s.n = n;
  s.p = p;
  s.n_d_plus = donor_plus(n, p, m);
  s.n_a_minus = acceptor_minus(n, p, m);
  s.neutrality_residual =
      std::fabs(s.p + s.n_d_plus - s.n - s.n_a_minus) / (s.p + s.n_d_plus);
  return s;
}

double calibrate_generation(const Config& cfg) {
  const double target = cfg.calibration.target_p0;
  if (target <= 0) return 0.0;
  const double g_needed = generation_for_hole_density(target, cfg.material);

  DriveConditions cal = cfg.drive;
  cal.optical_power = cfg.calibration.at_power;
  cal.rf_enabled = false;
  const SpinChargeState st = nv_state(cfg.rates, cal, cfg.geometry.beam_waist);
  const double g_model = cfg.material.nv_density() * st.pair_rate;
  if (g_model <= 0)
    throw PreconditionError("calibrate_generation: no pair generation at the "
                            "calibration power");
  return g_needed / g_model;
}

}  // namespace fedmr
