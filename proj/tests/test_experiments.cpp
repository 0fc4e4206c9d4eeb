#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <vector>

#include "fedmr/constants.hpp"
#include "fedmr/experiments.hpp"

using namespace fedmr;

namespace {

constexpr double kScale = 1.8863050747937644;  // calibration at the defaults

std::vector<double> rangev(double a, double b, double step) {
  std::vector<double> v;
  for (double u = a; u <= b + 1e-9 * step; u += step) v.push_back(u);
  return v;
}

int argmax(const std::vector<double>& v) {
  int best = 0;
  for (int i = 1; i < (int)v.size(); ++i)
    if (v[i] > v[best]) best = i;
  return best;
}

Config fast_config() {
  Config cfg;
  cfg.geometry.beam_waist = 4e-6;
  cfg.geometry.grid_h = 1e-6;
  return cfg;
}

}  // namespace

TEST_CASE("contrast arithmetic and zero-baseline rejection") {
  CHECK(pdmr_contrast(1.0e-9, 0.9e-9) == doctest::Approx(0.10).epsilon(1e-12));
  CHECK(pdmr_contrast(3e-8, 3e-8) == 0.0);
  CHECK(odmr_contrast(2.0, 1.5) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK_THROWS_AS(pdmr_contrast(0.0, 1e-9), PreconditionError);
  CHECK_THROWS_AS(odmr_contrast(-1.0, 0.5), PreconditionError);
}

TEST_CASE("gradient mapping hits the target resonances at the electrode centers") {
  const DeviceGeometry geom;
  double b0 = 0, grad = 0;
  gradient_for_resonances(1.98e9, 2.02e9, geom, b0, grad);
  CHECK(b0 == doctest::Approx(0.87e9 / phys::gamma_hz_t).epsilon(1e-12));
  CHECK(grad == doctest::Approx(-5.70939).epsilon(1e-5));

  const double x_mid = 0.5 * geom.box_width();
  const double x_a = 0.5 * (geom.electrode_a_x0() + geom.electrode_a_x1());
  const double b_a = b0 + grad * (x_a - x_mid);
  CHECK(phys::zfs_hz - phys::gamma_hz_t * b_a ==
        doctest::Approx(1.98e9).epsilon(1e-12));

  CHECK_THROWS_AS(gradient_for_resonances(3.0e9, 2.02e9, geom, b0, grad),
                  PreconditionError);
}

TEST_CASE("spectrum peak follows the positive electrode and its local resonance") {
  Config cfg = fast_config();
  gradient_for_resonances(1.98e9, 2.02e9, cfg.geometry, cfg.drive.b_axial,
                          cfg.drive.b_gradient);
  const auto freqs = rangev(1.85e9, 2.15e9, 1e7);

  const SpectrumResult ra = spectrum_scan(freqs, 150.0, cfg, kScale);
  CHECK(ra.positive == Electrode::A);
  CHECK(ra.frequencies[argmax(ra.pdmr)] == 1.98e9);
  CHECK(argmax(ra.pdmr) == argmax(ra.odmr_a));
  CHECK(ra.frequencies[argmax(ra.odmr_b)] == 2.02e9);

  Config flipped = cfg;
  flipped.drive.positive_electrode = Electrode::B;
  const SpectrumResult rb = spectrum_scan(freqs, 150.0, flipped, kScale);
  CHECK(rb.frequencies[argmax(rb.pdmr)] == 2.02e9);
  CHECK(argmax(rb.pdmr) == argmax(rb.odmr_b));

  // all contrasts bounded, far-detuned baseline negligible
  for (int k = 0; k < (int)freqs.size(); ++k) {
    for (double c : {ra.pdmr[k], ra.odmr_a[k], ra.odmr_b[k]}) {
      CHECK(c > -1.0);
      CHECK(c < 1.0);
    }
  }
  CHECK(std::fabs(ra.pdmr.front()) < 1e-3);
  CHECK(std::fabs(ra.odmr_a.back()) < 1e-3);

  // stored contrasts recompute exactly from the persisted raw observables
  for (int k = 0; k < (int)freqs.size(); ++k) {
    CHECK(std::fabs(ra.pdmr[k] - pdmr_contrast(ra.i_off, ra.i_on[k])) < 1e-12);
    CHECK(std::fabs(ra.odmr_a[k] -
                    odmr_contrast(ra.pl_a_off, ra.pl_a_on[k])) < 1e-12);
    CHECK(std::fabs(ra.odmr_b[k] -
                    odmr_contrast(ra.pl_b_off, ra.pl_b_on[k])) < 1e-12);
  }
  CHECK(ra.b_a > ra.b_b);  // the negative gradient tilts A above B
  CHECK(ra.pl_a_off == ra.pl_b_off);  // RF off: no local field dependence

  CHECK_THROWS_AS(spectrum_scan({}, 150.0, cfg, kScale), PreconditionError);
  CHECK_THROWS_AS(spectrum_scan(freqs, 0.0, cfg, kScale), PreconditionError);
}

TEST_CASE("zero gradient collapses the spectrum to one line at the zfs") {
  Config cfg = fast_config();
  const auto freqs = rangev(2.83e9, 2.91e9, 2e6);
  const SpectrumResult r = spectrum_scan(freqs, 150.0, cfg, kScale);
  const int ip = argmax(r.pdmr);
  CHECK(r.frequencies[ip] == 2.87e9);

  const double half = r.pdmr[ip] / 2;
  double flo = 0, fhi = 0;
  for (int i = 1; i < (int)freqs.size(); ++i) {
    if (r.pdmr[i - 1] < half && r.pdmr[i] >= half) flo = freqs[i];
    if (r.pdmr[i - 1] >= half && r.pdmr[i] < half) fhi = freqs[i - 1];
  }
  const double fwhm = fhi - flo;
  CHECK(fwhm > 0.5 * cfg.rates.linewidth);
  CHECK(fwhm < 2.0 * cfg.rates.linewidth);
}

TEST_CASE("contrast sweep partitions into ordered contiguous regimes") {
  Config cfg = fast_config();
  cfg.drive.optical_power = 0.4;
  const auto sweep = rangev(10, 120, 5);
  const ContrastSweep s = contrast_vs_voltage(sweep, cfg, kScale);

  CHECK(s.knee_on <= s.knee_off);
  CHECK(s.p0_on < s.p0_off);
  int last = 0;
  for (std::size_t k = 0; k < s.regime.size(); ++k) {
    const int r = static_cast<int>(s.regime[k]);
    CHECK(r >= last);  // never steps back: <= 3 contiguous bands in order
    last = r;
    CHECK(std::fabs(s.c_pdmr[k] - pdmr_contrast(s.i_off[k], s.i_on[k])) <
          1e-12);
    CHECK(s.c_pdmr[k] >= 0.0);
    CHECK(s.c_pdmr[k] < 1.0);
  }
  CHECK(s.regime.front() == Regime::rising);
  CHECK(s.regime.back() == Regime::plateau);

  double pmin = 1e300, pmax = 0, psum = 0;
  int np = 0;
  for (std::size_t k = 0; k < s.regime.size(); ++k)
    if (s.regime[k] == Regime::plateau) {
      pmin = std::min(pmin, s.c_pdmr[k]);
      pmax = std::max(pmax, s.c_pdmr[k]);
      psum += s.c_pdmr[k];
      ++np;
    }
  REQUIRE(np > 0);
  CHECK((pmax - pmin) / (psum / np) < 0.05);
}

TEST_CASE("disabled rf drive yields exactly zero contrast everywhere") {
  Config cfg = fast_config();
  cfg.drive.rf_enabled = false;
  const ContrastSweep s = contrast_vs_voltage(rangev(10, 120, 5), cfg, kScale);
  CHECK(s.p0_on == s.p0_off);
  CHECK(s.knee_on == s.knee_off);
  for (std::size_t k = 0; k < s.c_pdmr.size(); ++k) {
    CHECK(s.c_pdmr[k] == 0.0);
    CHECK(s.i_on[k] == s.i_off[k]);
  }
}

TEST_CASE("larger beam at fixed intensity raises both knee and plateau contrast") {
  Config cfg = fast_config();
  const auto cases = beam_size_study({{4e-6, 0.1}, {8e-6, 0.4}},
                                     rangev(10, 240, 10), cfg, kScale);
  REQUIRE(cases.size() == 2);
  CHECK(cases[1].sweep.knee_off > cases[0].sweep.knee_off);
  CHECK(cases[1].plateau_contrast > cases[0].plateau_contrast);

  CHECK_THROWS_AS(beam_size_study({{4e-6, 0.1}, {8e-6, 0.1}},
                                  rangev(10, 240, 10), cfg, kScale),
                  PreconditionError);
  CHECK_THROWS_AS(beam_size_study({{4e-6, 0.1}}, rangev(10, 240, 10), cfg,
                                  kScale),
                  PreconditionError);
}

TEST_CASE("identical beam cases reproduce bit-identical sweeps") {
  Config cfg = fast_config();
  const auto cases = beam_size_study({{4e-6, 0.1}, {4e-6, 0.1}},
                                     rangev(10, 120, 10), cfg, kScale);
  REQUIRE(cases.size() == 2);
  const ContrastSweep& x = cases[0].sweep;
  const ContrastSweep& y = cases[1].sweep;
  REQUIRE(x.c_pdmr.size() == y.c_pdmr.size());
  CHECK(std::memcmp(x.c_pdmr.data(), y.c_pdmr.data(),
                    x.c_pdmr.size() * sizeof(double)) == 0);
  CHECK(std::memcmp(x.i_off.data(), y.i_off.data(),
                    x.i_off.size() * sizeof(double)) == 0);
  CHECK(x.knee_off == y.knee_off);
  CHECK(cases[0].plateau_contrast == cases[1].plateau_contrast);
}

TEST_CASE("electrical and optical contrast report side by side") {
  Config cfg = fast_config();
  cfg.drive.optical_power = 0.4;
  const ReadoutComparison cmp = compare_readout(110.0, cfg, kScale);
  CHECK(cmp.c_pdmr > 0);
  CHECK(cmp.c_odmr > 0);
  CHECK(cmp.c_pdmr < 1);
  CHECK(cmp.c_odmr < 1);
}
