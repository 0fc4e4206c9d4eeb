#ifndef FEDMR_PHOTOPHYSICS_HPP
#define FEDMR_PHOTOPHYSICS_HPP

#include <array>
#include <vector>

#include "fedmr/config.hpp"

namespace fedmr {

// Occupation indices of the seven-level NV charge/spin cycle.
enum Level : int {
  lv_gs0 = 0,   // NV- ground, m_S = 0
  lv_gs1 = 1,   // NV- ground, m_S = +-1 (lumped)
  lv_es0 = 2,   // NV- excited, m_S = 0
  lv_es1 = 3,   // NV- excited, m_S = +-1
  lv_ms = 4,    // NV- metastable singlet
  lv_nv0g = 5,  // NV0 ground
  lv_nv0e = 6,  // NV0 excited
};

// Fully scaled rates entering the master equation, all [1/s].
struct LevelRates {
  double k_pump = 0;   // spin-conserving optical excitation (both charge states)
  double k_rad = 0;    // NV- radiative decay
  double k_isc0 = 0;   // ISC from es0
  double k_isc1 = 0;   // ISC from es1
  double k_ms = 0;     // metastable -> gs0
  double k_rad0 = 0;   // NV0 radiative decay
  double k_ion = 0;    // NV- es -> NV0 ground (emits a free electron)
  double k_back = 0;   // NV0 es -> NV- ground (emits a free hole)
  double back_pol = 0; // fraction of k_back arriving spin polarized in gs0
  double k_mix = 0;    // RF ground-state spin exchange
};

struct SpinChargeState {
  std::array<double, 7> populations{};  // fractions, sum to 1
  double pair_rate = 0;    // electron-hole pairs per NV [1/s]
  double pl_nv_minus = 0;  // NV- emission per NV [1/s]
  double pl_nv_zero = 0;   // NV0 emission per NV [1/s]
  double residual = 0;     // ||M p||_inf / max |M_ij| of the solved system
};

// Top-hat equivalent intensity of a beam of the given waist [W/m^2].
double beam_intensity(double power, double waist);

// RF-driven ground-state mixing rate [1/s]: the 1 mW Rabi rate scaled by
// sqrt(P/1mW), weighted by the four-family Lorentzian line shape at the drive
// frequency. Zero when the drive is disabled.
double rf_mixing_rate(const RateModel& rates, const DriveConditions& drive);
double rf_mixing_rate(const RateModel& rates, double rf_power, double rf_frequency,
                      double b_axial, bool rf_enabled);

LevelRates level_rates(const RateModel& rates, double intensity, double k_mix);

// Steady state of the master equation (singular linear system closed by the
// population-conservation row). Throws PreconditionError when every rate is
// zero (no stationary distribution is selected).
SpinChargeState steady_state(const LevelRates& lr);

// Convenience for the common path: intensity from drive power and geometry
// waist, mixing rate from the RF settings.
SpinChargeState nv_state(const RateModel& rates, const DriveConditions& drive,
                         double waist);

// PL per NV landing in the collection band [1/s]: NV- emission, the NV0
// fraction passing the filter, and the spin-independent background.
double collected_pl(const SpinChargeState& state, const RateModel& rates,
                    double intensity);

// Volumetric pair generation on the device grid [m^-3 s^-1]: uniform
// nv_density * pair_rate * scale inside the illuminated slab (the top
// slab_depth() of the box across its full width), zero below.
struct GenerationField {
  int nx = 0, nz = 0;      // node counts
  double h = 0;            // node spacing [m]
  int slab_rows = 0;       // node rows inside the slab (z < slab_depth)
  std::vector<double> g;   // row-major, k = iz*nx + ix
};
GenerationField generation_field(const DeviceGeometry& geom,
                                 const SpinChargeState& state, double nv_density,
                                 double scale = 1.0);

}  // namespace fedmr

#endif
