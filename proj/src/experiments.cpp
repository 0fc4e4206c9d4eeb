#include "fedmr/experiments.hpp"

#include <algorithm>
#include <cmath>

#include "fedmr/constants.hpp"
#include "fedmr/photophysics.hpp"

namespace fedmr {

namespace {

// Local axial field at both electrode centers; drive.b_axial is referenced
// to the box midpoint.
void local_fields(const Config& cfg, double& b_a, double& b_b) {
  const DeviceGeometry& g = cfg.geometry;
  const double x_mid = 0.5 * g.box_width();
  const double x_a = 0.5 * (g.electrode_a_x0() + g.electrode_a_x1());
  const double x_b = 0.5 * (g.electrode_b_x0() + g.electrode_b_x1());
  b_a = cfg.drive.b_axial + cfg.drive.b_gradient * (x_a - x_mid);
  b_b = cfg.drive.b_axial + cfg.drive.b_gradient * (x_b - x_mid);
}

double contrast(double off, double on, const char* what) {
  if (!(off > 0))
    throw PreconditionError(std::string(what) + ": baseline must be positive");
  return (off - on) / off;
}

}  // namespace

double pdmr_contrast(double i_off, double i_on) {
  return contrast(i_off, i_on, "pdmr_contrast");
}

double odmr_contrast(double pl_off, double pl_on) {
  return contrast(pl_off, pl_on, "odmr_contrast");
}

SpectrumResult spectrum_scan(const std::vector<double>& frequencies,
                             double bias, const Config& cfg,
                             double generation_scale) {
  if (frequencies.empty())
    throw PreconditionError("spectrum_scan: empty frequency list");
  for (double f : frequencies)
    if (!(f > 0))
      throw PreconditionError("spectrum_scan: frequencies must be positive");
  if (!(bias > 0))
    throw PreconditionError("spectrum_scan: bias must be positive");

  SpectrumResult res;
  res.frequencies = frequencies;
  res.bias = bias;
  res.positive = cfg.drive.positive_electrode;
  local_fields(cfg, res.b_a, res.b_b);
  const double b_pos = res.positive == Electrode::A ? res.b_a : res.b_b;
  const double intensity =
      beam_intensity(cfg.drive.optical_power, cfg.geometry.beam_waist);

  Config off = cfg;
  off.drive.rf_enabled = false;
  const SpinChargeState s_off =
      nv_state(off.rates, off.drive, off.geometry.beam_waist);
  res.pl_a_off = res.pl_b_off = collected_pl(s_off, cfg.rates, intensity);
  res.i_off =
      device_iv({bias}, off, generation_scale).points.front().current;

  const int n = static_cast<int>(frequencies.size());
  res.pdmr.resize(n);
  res.odmr_a.resize(n);
  res.odmr_b.resize(n);
  res.i_on.resize(n);
  res.pl_a_on.resize(n);
  res.pl_b_on.resize(n);
  for (int k = 0; k < n; ++k) {
    Config local = cfg;
    local.drive.rf_enabled = true;
    local.drive.rf_frequency = frequencies[k];

    local.drive.b_axial = res.b_a;
    res.pl_a_on[k] = collected_pl(
        nv_state(local.rates, local.drive, local.geometry.beam_waist),
        cfg.rates, intensity);
    local.drive.b_axial = res.b_b;
    res.pl_b_on[k] = collected_pl(
        nv_state(local.rates, local.drive, local.geometry.beam_waist),
        cfg.rates, intensity);

    local.drive.b_axial = b_pos;
    res.i_on[k] =
        device_iv({bias}, local, generation_scale).points.front().current;

    res.pdmr[k] = pdmr_contrast(res.i_off, res.i_on[k]);
    res.odmr_a[k] = odmr_contrast(res.pl_a_off, res.pl_a_on[k]);
    res.odmr_b[k] = odmr_contrast(res.pl_b_off, res.pl_b_on[k]);
  }
  return res;
}

void gradient_for_resonances(double f_a, double f_b,
                             const DeviceGeometry& geom, double& b_axial,
                             double& b_gradient) {
  if (!(f_a > 0) || !(f_b > 0) || f_a > phys::zfs_hz || f_b > phys::zfs_hz)
    throw PreconditionError(
        "gradient_for_resonances: targets must sit below the zero-field line");
  const double b_a = (phys::zfs_hz - f_a) / phys::gamma_hz_t;
  const double b_b = (phys::zfs_hz - f_b) / phys::gamma_hz_t;
  const double x_a = 0.5 * (geom.electrode_a_x0() + geom.electrode_a_x1());
  const double x_b = 0.5 * (geom.electrode_b_x0() + geom.electrode_b_x1());
  b_axial = 0.5 * (b_a + b_b);
  b_gradient = (b_b - b_a) / (x_b - x_a);
}

ContrastSweep contrast_vs_voltage(const std::vector<double>& u_sweep,
                                  const Config& cfg, double generation_scale) {
  Config off = cfg;
  off.drive.rf_enabled = false;
  Config on = cfg;  // honors a disabled drive: the pair then degenerates
  const IVCurve curve_off = device_iv(u_sweep, off, generation_scale);
  const IVCurve curve_on = device_iv(u_sweep, on, generation_scale);

  ContrastSweep sweep;
  sweep.voltages = u_sweep;
  sweep.drive = cfg.drive;
  sweep.p0_off = curve_off.p0;
  sweep.p0_on = curve_on.p0;
  sweep.knee_off = find_inflection(curve_off);
  sweep.knee_on = find_inflection(curve_on);

  const int n = static_cast<int>(u_sweep.size());
  sweep.c_pdmr.resize(n);
  sweep.regime.resize(n);
  sweep.i_off.resize(n);
  sweep.i_on.resize(n);
  for (int k = 0; k < n; ++k) {
    sweep.i_off[k] = curve_off.points[k].current;
    sweep.i_on[k] = curve_on.points[k].current;
    sweep.c_pdmr[k] = pdmr_contrast(sweep.i_off[k], sweep.i_on[k]);
    const double u = u_sweep[k];
    sweep.regime[k] = u < sweep.knee_on    ? Regime::rising
                      : u < sweep.knee_off ? Regime::fast_rise
                                           : Regime::plateau;
  }
  return sweep;
}

std::vector<BeamCase> beam_size_study(
    const std::vector<std::array<double, 2>>& waist_power,
    const std::vector<double>& u_sweep, const Config& cfg,
    double generation_scale) {
  if (waist_power.size() < 2)
    throw PreconditionError("beam_size_study: need at least two beam cases");
  const double i0 = beam_intensity(waist_power[0][1], waist_power[0][0]);
  for (const auto& [waist, power] : waist_power) {
    if (!(waist > 0) || !(power > 0))
      throw PreconditionError("beam_size_study: waist and power must be positive");
    const double in = beam_intensity(power, waist);
    if (std::fabs(in - i0) > 1e-9 * i0)
      throw PreconditionError(
          "beam_size_study: pairs must keep the intensity constant");
  }

  std::vector<BeamCase> cases;
  cases.reserve(waist_power.size());
  for (const auto& [waist, power] : waist_power) {
    Config local = cfg;
    local.geometry.beam_waist = waist;
    local.drive.optical_power = power;
    BeamCase bc;
    bc.waist = waist;
    bc.power = power;
    bc.sweep = contrast_vs_voltage(u_sweep, local, generation_scale);
    double sum = 0;
    int count = 0;
    for (std::size_t k = 0; k < bc.sweep.regime.size(); ++k)
      if (bc.sweep.regime[k] == Regime::plateau) {
        sum += bc.sweep.c_pdmr[k];
        ++count;
      }
    if (count == 0)
      throw ConvergenceError("beam_size_study: sweep never reaches the plateau");
    bc.plateau_contrast = sum / count;
    cases.push_back(std::move(bc));
  }
  return cases;
}

ReadoutComparison compare_readout(double bias, const Config& cfg,
                                  double generation_scale) {
  Config off = cfg;
  off.drive.rf_enabled = false;
  Config on = cfg;
  on.drive.rf_enabled = true;
  const double intensity =
      beam_intensity(cfg.drive.optical_power, cfg.geometry.beam_waist);

  ReadoutComparison cmp;
  cmp.c_pdmr = pdmr_contrast(
      device_iv({bias}, off, generation_scale).points.front().current,
      device_iv({bias}, on, generation_scale).points.front().current);
  cmp.c_odmr = odmr_contrast(
      collected_pl(nv_state(off.rates, off.drive, off.geometry.beam_waist),
                   cfg.rates, intensity),
      collected_pl(nv_state(on.rates, on.drive, on.geometry.beam_waist),
                   cfg.rates, intensity));
  return cmp;
}

}  // namespace fedmr
