#ifndef FEDMR_EXPERIMENTS_HPP
#define FEDMR_EXPERIMENTS_HPP

#include <array>
#include <vector>

#include "fedmr/config.hpp"
#include "fedmr/transport.hpp"

namespace fedmr {

// (off - on) / off. The baseline must be positive; zero-baseline throws
// PreconditionError.
double pdmr_contrast(double i_off, double i_on);
double odmr_contrast(double pl_off, double pl_on);

// Per-frequency contrasts plus every raw observable they derive from, so a
// reader of the persisted columns can recompute them exactly.
struct SpectrumResult {
  std::vector<double> frequencies;     // Hz
  std::vector<double> pdmr;            // C_PDMR(f), electrical
  std::vector<double> odmr_a, odmr_b;  // C_ODMR(f) per electrode region
  std::vector<double> i_on;            // A
  std::vector<double> pl_a_on, pl_b_on;  // collected PL per NV [1/s]
  double i_off = 0;
  double pl_a_off = 0, pl_b_off = 0;
  double bias = 0;
  Electrode positive = Electrode::A;
  double b_a = 0, b_b = 0;  // local axial field at each electrode center [T]
};

// RF-frequency scan at fixed bias. The axial-field gradient maps each
// electrode region to its own resonance (field sampled at the electrode
// centers, drive.b_axial referenced to the box midpoint); the optical
// contrasts are local, while the current samples the hole density under the
// positive contact, so the PDMR peak falls on that electrode's resonance.
SpectrumResult spectrum_scan(const std::vector<double>& frequencies,
                             double bias, const Config& cfg,
                             double generation_scale);

// Axial field and gradient that put the aligned-family resonance
// (zfs - gamma B) of electrode A's center at f_a and of B's at f_b.
void gradient_for_resonances(double f_a, double f_b,
                             const DeviceGeometry& geom, double& b_axial,
                             double& b_gradient);

enum class Regime { rising, fast_rise, plateau };

struct ContrastSweep {
  std::vector<double> voltages;
  std::vector<double> c_pdmr;
  std::vector<Regime> regime;       // contiguous bands, in enum order
  std::vector<double> i_off, i_on;  // raw currents behind c_pdmr [A]
  double knee_on = 0, knee_off = 0; // inflection of each IV curve [V]
  double p0_off = 0, p0_on = 0;     // hole densities of the two runs [m^-3]
  DriveConditions drive;
};

// Paired RF-off / RF-on IV sweeps reduced to contrast per bias. Regimes:
// rising below the RF-on knee, fast-rise between the knees, plateau above
// the RF-off knee. A config with RF disabled yields identical pairs and a
// zero contrast everywhere. Knee-detection and solver errors propagate.
ContrastSweep contrast_vs_voltage(const std::vector<double>& u_sweep,
                                  const Config& cfg, double generation_scale);

struct BeamCase {
  double waist = 0;   // m
  double power = 0;   // W
  ContrastSweep sweep;
  double plateau_contrast = 0;  // mean C_PDMR over the plateau band
};

// Contrast sweeps for (waist, power) pairs at constant intensity
// (power scaled with waist^2); rejects pairs that change the intensity.
// A larger waist deepens the illuminated slab, so its knee moves up and its
// plateau contrast grows.
std::vector<BeamCase> beam_size_study(
    const std::vector<std::array<double, 2>>& waist_power,
    const std::vector<double>& u_sweep, const Config& cfg,
    double generation_scale);

// The electrical and optical contrast of the same drive at one bias,
// reported side by side (in the plateau the electrical one comes out on top
// at high power: the exponential field sensitivity beats the background
// dilution of the collected PL band).
struct ReadoutComparison {
  double c_pdmr = 0;
  double c_odmr = 0;
};
ReadoutComparison compare_readout(double bias, const Config& cfg,
                                  double generation_scale);

}  // namespace fedmr

#endif
