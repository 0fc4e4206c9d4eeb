#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>

#include "fedmr/config.hpp"
#include "fedmr/units.hpp"

using namespace fedmr;
using units::Dim;

static double q(const char* text, Dim dim) {
  double v = 0;
  std::string err;
  REQUIRE_MESSAGE(units::parse_quantity(text, dim, v, err), err);
  return v;
}

TEST_CASE("quantities convert to SI") {
  CHECK(q("0.1 W", Dim::power) == 0.1);
  CHECK(q("100 mW", Dim::power) == 0.1);
  CHECK(q("2.87 GHz", Dim::frequency) == 2.87e9);
  CHECK(q("31.045 mT", Dim::bfield) == doctest::Approx(31.045e-3).epsilon(1e-15));
  CHECK(q("1.76e17 cm^-3", Dim::density) == doctest::Approx(1.76e23).epsilon(1e-15));
  CHECK(q("1e-8 cm^3/s", Dim::capture) == doctest::Approx(1e-14).epsilon(1e-15));
  CHECK(q("90 A/cm^2/K^2", Dim::richardson) == 90e4);
  CHECK(q("3.5e20", Dim::density) == 3.5e20);  // bare number = SI
}

TEST_CASE("equal lengths in different decimal units are bit identical") {
  CHECK(q("200 um", Dim::length) == q("200000 nm", Dim::length));
  CHECK(q("50 um", Dim::length) == q("5e-5 m", Dim::length));
  CHECK(q("0.5 um", Dim::length) == q("500 nm", Dim::length));
}

TEST_CASE("dBm converts through the milliwatt log scale") {
  CHECK(q("0 dBm", Dim::power_dbm) == doctest::Approx(1e-3).epsilon(1e-14));
  CHECK(q("25 dBm", Dim::power_dbm) ==
        doctest::Approx(0.316227766016838).epsilon(1e-14));
  CHECK(q("-10 dBm", Dim::power_dbm) == doctest::Approx(1e-4).epsilon(1e-14));
}

TEST_CASE("unit errors are rejected with a message") {
  double v = 0;
  std::string err;
  CHECK_FALSE(units::parse_quantity("5 parsec", Dim::length, v, err));
  CHECK(err.find("parsec") != std::string::npos);
  CHECK_FALSE(units::parse_quantity("5 V", Dim::length, v, err));
  CHECK_FALSE(units::parse_quantity("quick", Dim::power, v, err));
}

static const char* kSample = R"(# device under test
[material]
n_boron = 8.8e15 cm^-3
temperature = 300 K

[geometry]
electrode_gap = 200 um
beam_waist = 5 um

[drive]
optical_power = 100 mW
rf_power = 25 dBm
positive_electrode = B
rf_enabled = false
)";

TEST_CASE("config text parses with units and comments") {
  Config c = load_config(kSample);
  CHECK(c.material.n_boron == doctest::Approx(8.8e21).epsilon(1e-15));
  CHECK(c.geometry.electrode_gap == 200e-6);
  CHECK(c.drive.optical_power == 0.1);
  CHECK(c.drive.rf_power == doctest::Approx(0.316227766016838).epsilon(1e-14));
  CHECK(c.drive.positive_electrode == Electrode::B);
  CHECK_FALSE(c.drive.rf_enabled);
  // untouched keys keep their defaults
  CHECK(c.material.eps_s == 5.7);
  CHECK(c.geometry.electrode_width == 50e-6);
}

TEST_CASE("overrides beat environment beats file") {
  setenv("FEDMR_DRIVE_OPTICAL_POWER", "200 mW", 1);
  Config via_env = load_config(kSample);
  CHECK(via_env.drive.optical_power == 0.2);
  Config via_set = load_config(kSample, {"drive.optical_power=400 mW"});
  CHECK(via_set.drive.optical_power == 0.4);
  unsetenv("FEDMR_DRIVE_OPTICAL_POWER");
}

TEST_CASE("malformed input names the offending line") {
  CHECK_THROWS_WITH_AS(load_config("[material]\nbogus = 1\n"),
                       doctest::Contains("line 2"), ConfigError);
  CHECK_THROWS_AS(load_config("eps_s = 5.7\n"), ConfigError);  // outside section
  CHECK_THROWS_AS(load_config("[material]\neps_s 5.7\n"), ConfigError);
  CHECK_THROWS_AS(load_config("[material\neps_s = 5.7\n"), ConfigError);
  CHECK_THROWS_AS(load_config("[material]\neps_s = 5.7 parsec\n"), ConfigError);
  CHECK_THROWS_AS(load_config(kSample, {"drive.optical_power"}), ConfigError);
}

TEST_CASE("validation rejects inconsistent parameter sets") {
  // compensation ordering
  CHECK_THROWS_AS(load_config("[material]\nn_boron = 2e23 m^-3\n"), ConfigError);
  // slab deeper than an explicitly pinned box
  CHECK_THROWS_AS(
      load_config("[geometry]\nbeam_waist = 30 um\nbox_depth = 40 um\n"),
      ConfigError);
  // an unpinned box follows the slab, so a wide beam alone is fine
  CHECK(load_config("[geometry]\nbeam_waist = 30 um\n")
            .geometry.box_depth_eff() == 60e-6);
  // grid must divide the electrode footprint
  CHECK_THROWS_AS(load_config("[geometry]\ngrid_h = 0.7 um\n"), ConfigError);
  // unknown kernel backend name
  CHECK_THROWS_AS(load_config("[solver]\nkernels = sse9\n"), ConfigError);
  CHECK_THROWS_AS(load_config("[transport]\neta = 0.5\n"), ConfigError);
  CHECK_THROWS_AS(load_config("[material]\nnv_fraction = 1.5\n"), ConfigError);
}

TEST_CASE("serialization round trips bit exactly") {
  Config c = load_config(kSample, {"rates.pump_coeff=0.77",
                                   "solver.kernels=scalar"});
  const std::string s1 = serialize_config(c);
  Config back = load_config(s1);
  const std::string s2 = serialize_config(back);
  CHECK(s1 == s2);
  CHECK(config_hash(c) == config_hash(back));

  Config other = load_config(kSample);
  CHECK(config_hash(c) != config_hash(other));
}

TEST_CASE("shipped rate defaults file matches the built-in model") {
  Config file = load_config_file(FEDMR_DATA_DIR "/rate_model_defaults.ini");
  const RateModel& r = file.rates;
  const RateModel d;
  CHECK(r.k_rad == d.k_rad);
  CHECK(r.k_isc0 == d.k_isc0);
  CHECK(r.k_isc1 == d.k_isc1);
  CHECK(r.k_ms == d.k_ms);
  CHECK(r.k_rad0 == d.k_rad0);
  CHECK(r.pump_coeff == d.pump_coeff);
  CHECK(r.ion_coeff == d.ion_coeff);
  CHECK(r.back_coeff == d.back_coeff);
  CHECK(r.back_polarization == d.back_polarization);
  CHECK(r.rabi_rate_1mw == d.rabi_rate_1mw);
  CHECK(r.linewidth == d.linewidth);
  CHECK(r.nv0_filter_leak == d.nv0_filter_leak);
  CHECK(r.bg_pl_coeff == d.bg_pl_coeff);
  CHECK(r.nv0_pl_alpha == d.nv0_pl_alpha);
}
