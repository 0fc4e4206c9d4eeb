#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "fedmr/carriers.hpp"
#include "fedmr/photophysics.hpp"

using namespace fedmr;

namespace {

// Independent oracle: outer bisection on p over the HOLE budget (the Newton
// solver closes the electron budget; the two coincide only at the true
// stationary point), inner damped fixed point on the neutrality equation.
struct Oracle {
  const MaterialParams& m;

  double donor_plus(double n, double p) const {
    const double a = m.kappa_hn * m.c_h * p, b = m.c_e * n;
    return m.n_nitrogen * a / (a + b);
  }
  double acceptor_minus(double n, double p) const {
    const double b = m.c_e * n, c = m.c_h * p;
    return m.n_boron * b / (b + c);
  }
  // neutrality defect is strictly increasing in n, so bisect
  double inner_n(double p) const {
    double lo = p * 1e-30, hi = p + m.n_nitrogen;
    for (int it = 0; it < 300; ++it) {
      const double mid = std::sqrt(lo * hi);
      const double d = mid + acceptor_minus(mid, p) - donor_plus(mid, p) - p;
      (d > 0 ? hi : lo) = mid;
    }
    return std::sqrt(lo * hi);
  }
  double hole_budget(double p) const {
    const double n = inner_n(p);
    return m.c_h * p * acceptor_minus(n, p) +
           m.kappa_hn * m.c_h * p * (m.n_nitrogen - donor_plus(n, p));
  }
  double solve_p(double G) const {
    double lo = std::sqrt(G / m.c_h) * 1e-8, hi = std::sqrt(G / m.c_h) * 1e8;
    for (int it = 0; it < 200; ++it) {
      const double mid = std::sqrt(lo * hi);
      (hole_budget(mid) < G ? lo : hi) = mid;
    }
    return std::sqrt(lo * hi);
  }
};

}  // namespace

TEST_CASE("newton solve agrees with the nested-bisection oracle") {
  std::mt19937_64 rng(31337);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int checked = 0;
  for (int trial = 0; trial < 100; ++trial) {
    MaterialParams m;
    m.n_nitrogen = std::pow(10.0, 21 + 3 * u(rng));
    m.n_boron = m.n_nitrogen * (0.01 + 0.49 * u(rng));
    m.c_e = std::pow(10.0, -13 + 2 * u(rng));
    m.c_h = m.c_e * std::pow(10.0, -3 * u(rng));  // c_e >= c_h
    m.kappa_hn = std::pow(10.0, -7 + 4 * u(rng));
    const double G = std::pow(10.0, 20 + 10 * u(rng));

    CarrierState s = steady_carriers(G, m);
    Oracle oracle{m};
    const double p_ref = oracle.solve_p(G);
    CHECK(s.p == doctest::Approx(p_ref).epsilon(1e-8));

    CHECK(s.neutrality_residual < 1e-6);
    CHECK(s.p > s.n);  // p-type under illumination with c_e >= c_h
    CHECK(s.n_d_plus >= 0);
    CHECK(s.n_d_plus <= m.n_nitrogen);
    CHECK(s.n_a_minus >= 0);
    CHECK(s.n_a_minus <= m.n_boron);
    ++checked;
  }
  CHECK(checked == 100);
}

TEST_CASE("hole density rises strictly with generation") {
  MaterialParams m;
  double prev = 0.0;
  for (double G = 1e22; G < 1e31; G *= 10) {
    CarrierState s = steady_carriers(G, m);
    CHECK(s.p > prev);
    prev = s.p;
  }
}

TEST_CASE("dark diamond is compensated and insulating") {
  MaterialParams m;
  CarrierState s = steady_carriers(0.0, m);
  CHECK(s.p == 0.0);
  CHECK(s.n == 0.0);
  CHECK(s.n_d_plus == m.n_boron);
  CHECK(s.n_a_minus == m.n_boron);
  CHECK_THROWS_AS(steady_carriers(-1.0, m), PreconditionError);
}

TEST_CASE("compensation regimes at default doping") {
  MaterialParams m;
  // donor-compensated floor: p tracks G linearly while N_D+ ~ N_A- >> p
  const double r_lin =
      steady_carriers(1e23, m).p / steady_carriers(1e22, m).p;
  CHECK(r_lin == doctest::Approx(10.0).epsilon(0.03));
  // free regime: p ~ sqrt(G/c_h) once holes outnumber the ionized traps
  CHECK(steady_carriers(1e28, m).p ==
        doctest::Approx(std::sqrt(1e28 / m.c_h)).epsilon(0.01));
  // acceptor saturation pushes p above the square-root law
  CHECK(steady_carriers(1e30, m).p > std::sqrt(1e30 / m.c_h));
}

TEST_CASE("generation inverse matches the forward solve") {
  MaterialParams m;
  for (double p : {1e18, 3.5e20, 5e21}) {
    const double G = generation_for_hole_density(p, m);
    CarrierState s = steady_carriers(G, m);
    CHECK(s.p == doctest::Approx(p).epsilon(1e-10));
  }
  CHECK(generation_for_hole_density(0.0, m) == 0.0);
}

TEST_CASE("calibration reproduces the target hole density") {
  Config cfg;
  const double scale = calibrate_generation(cfg);
  // frozen from the independent python evaluation of the same chain
  CHECK(scale == doctest::Approx(1.8863050747937644).epsilon(1e-9));

  DriveConditions cal = cfg.drive;
  cal.optical_power = cfg.calibration.at_power;
  cal.rf_enabled = false;
  const SpinChargeState st = nv_state(cfg.rates, cal, cfg.geometry.beam_waist);
  const double G = scale * cfg.material.nv_density() * st.pair_rate;
  CHECK(G == doctest::Approx(1.2397968773546384e27).epsilon(1e-9));
  CHECK(steady_carriers(G, cfg.material).p ==
        doctest::Approx(3.5e20).epsilon(1e-10));

  // the calibrated model's 400 mW prediction, frozen
  DriveConditions hp = cal;
  hp.optical_power = 0.4;
  const double G4 = scale * cfg.material.nv_density() *
                    nv_state(cfg.rates, hp, cfg.geometry.beam_waist).pair_rate;
  CHECK(steady_carriers(G4, cfg.material).p ==
        doctest::Approx(7.059745713333953e20).epsilon(1e-8));

  Config zero = cfg;
  zero.calibration.target_p0 = 0.0;
  CHECK(calibrate_generation(zero) == 0.0);
}
