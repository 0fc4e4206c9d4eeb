#include "fedmr/photophysics.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "fedmr/constants.hpp"
#include "fedmr/spectrum.hpp"

namespace fedmr {

double beam_intensity(double power, double waist) {
  return power / (phys::pi * waist * waist);
}

double rf_mixing_rate(const RateModel& rates, double rf_power, double rf_frequency,
                      double b_axial, bool rf_enabled) {
  if (!rf_enabled || rf_power <= 0) return 0.0;
  const double k_rabi = rates.rabi_rate_1mw * std::sqrt(rf_power / 1e-3);
  const auto lines = spectrum::nv_lines(b_axial, rates.linewidth);
  return k_rabi * spectrum::line_shape(rf_frequency, lines);
}

double rf_mixing_rate(const RateModel& rates, const DriveConditions& drive) {
  return rf_mixing_rate(rates, drive.rf_power, drive.rf_frequency, drive.b_axial,
                        drive.rf_enabled);
}

LevelRates level_rates(const RateModel& rates, double intensity, double k_mix) {
  LevelRates lr;
  lr.k_pump = rates.pump_coeff * intensity;
  lr.k_rad = rates.k_rad;
  lr.k_isc0 = rates.k_isc0;
  lr.k_isc1 = rates.k_isc1;
  lr.k_ms = rates.k_ms;
  lr.k_rad0 = rates.k_rad0;
  lr.k_ion = rates.ion_coeff * intensity;
  lr.k_back = rates.back_coeff * intensity;
  lr.back_pol = rates.back_polarization;
  lr.k_mix = k_mix;
  return lr;
}

SpinChargeState steady_state(const LevelRates& lr) {
  Eigen::Matrix<double, 7, 7> M = Eigen::Matrix<double, 7, 7>::Zero();
  auto add = [&M](int src, int dst, double k) {
    M(dst, src) += k;
    M(src, src) -= k;
  };
  add(lv_gs0, lv_es0, lr.k_pump);
  add(lv_gs1, lv_es1, lr.k_pump);
  add(lv_es0, lv_gs0, lr.k_rad);
  add(lv_es1, lv_gs1, lr.k_rad);
  add(lv_es0, lv_ms, lr.k_isc0);
  add(lv_es1, lv_ms, lr.k_isc1);
  add(lv_ms, lv_gs0, lr.k_ms);
  add(lv_es0, lv_nv0g, lr.k_ion);
  add(lv_es1, lv_nv0g, lr.k_ion);
  add(lv_nv0g, lv_nv0e, lr.k_pump);
  add(lv_nv0e, lv_nv0g, lr.k_rad0);
  add(lv_nv0e, lv_gs0, lr.k_back * (1.0 + lr.back_pol) / 2.0);
  add(lv_nv0e, lv_gs1, lr.k_back * (1.0 - lr.back_pol) / 2.0);
  add(lv_gs0, lv_gs1, lr.k_mix);
  add(lv_gs1, lv_gs0, lr.k_mix);

  const double max_rate = M.cwiseAbs().maxCoeff();
  if (max_rate == 0.0)
    throw PreconditionError("steady_state: all rates are zero (degenerate input)");

  SpinChargeState out;
  Eigen::Matrix<double, 7, 1> p;
  if (lr.k_pump == 0.0) {
    // Dark diamond: the optical cycle is off, the ground manifolds are
    // absorbing and the stationary distribution is not unique; pick the fully
    // relaxed one (RF mixing splits it over the two spin states).
    p.setZero();
    if (lr.k_mix > 0) {
      p(lv_gs0) = 0.5;
      p(lv_gs1) = 0.5;
    } else {
      p(lv_gs0) = 1.0;
    }
  } else {
    Eigen::Matrix<double, 7, 7> A = M;
    A.row(6).setOnes();  // close the singular system with sum(p) = 1
    Eigen::Matrix<double, 7, 1> b = Eigen::Matrix<double, 7, 1>::Zero();
    b(6) = 1.0;
    p = A.partialPivLu().solve(b);
  }

  out.residual = (M * p).cwiseAbs().maxCoeff() / max_rate;
  for (int i = 0; i < 7; ++i) out.populations[i] = std::max(p(i), 0.0);
  const double es = out.populations[lv_es0] + out.populations[lv_es1];
  out.pair_rate = lr.k_ion * es;
  out.pl_nv_minus = lr.k_rad * es;
  out.pl_nv_zero = lr.k_rad0 * out.populations[lv_nv0e];
  return out;
}

SpinChargeState nv_state(const RateModel& rates, const DriveConditions& drive,
                         double waist) {
  const double I = beam_intensity(drive.optical_power, waist);
  const double k_mix = rf_mixing_rate(rates, drive);
  return steady_state(level_rates(rates, I, k_mix));
}

double collected_pl(const SpinChargeState& state, const RateModel& rates,
                    double intensity) {
  return state.pl_nv_minus + rates.nv0_filter_leak * state.pl_nv_zero +
         rates.bg_pl_coeff * intensity;
}

GenerationField generation_field(const DeviceGeometry& geom,
                                 const SpinChargeState& state, double nv_density,
                                 double scale) {
  if (geom.slab_depth() > geom.box_depth_eff())
    throw PreconditionError("generation_field: illuminated slab deeper than the box");
  GenerationField f;
  f.h = geom.grid_h;
  f.nx = static_cast<int>(std::lround(geom.box_width() / f.h)) + 1;
  f.nz = static_cast<int>(std::lround(geom.box_depth_eff() / f.h)) + 1;
  f.slab_rows = static_cast<int>(std::lround(geom.slab_depth() / f.h));
  f.g.assign(static_cast<std::size_t>(f.nx) * f.nz, 0.0);
  const double g0 = nv_density * state.pair_rate * scale;
  // Nodes on the slab/bulk interface (iz == slab_rows) carry the full local
  // value; the half-cell volume weighting at that row is applied by the
  // electrostatic charge assembly.
  for (int iz = 0; iz <= f.slab_rows && iz < f.nz; ++iz)
    for (int ix = 0; ix < f.nx; ++ix)
      f.g[static_cast<std::size_t>(iz) * f.nx + ix] = g0;
  return f;
}

}  // namespace fedmr
