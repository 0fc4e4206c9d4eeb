#ifndef FEDMR_TRANSPORT_HPP
#define FEDMR_TRANSPORT_HPP

#include <array>
#include <vector>

#include "fedmr/config.hpp"

namespace fedmr {

// Image-force barrier lowering sqrt(q E / (4 pi eps0 eps_s)) [V] at contact
// field E >= 0 [V/m].
double image_force_lowering(double e_field, const MaterialParams& mat);

// The reverse-biased contact of the back-to-back pair. The whole applied
// bias is attributed to it (U1 = U assumption; the forward diode and bulk
// drop are negligible unless series_resistance enables the refinement).
struct DiodePair {
  double phi1 = 1.2;     // barrier height [V]
  double eta = 1.1;      // ideality factor
  double a_star = 90e4;  // Richardson constant [A m^-2 K^-2]
  double a_eff = 2.5e-9; // emitting contact area [m^2]
  Electrode reverse_contact = Electrode::A;  // the positive electrode (p-type)
};

DiodePair diode_from(const TransportParams& tp, Electrode positive);

// Thermionic emission over the lowered barrier:
//   I = A_eff A* T^2 exp(-q (phi1 - dphi(E)) / kT) (1 - exp(-q U1 / (eta kT)))
// U1 = 0 returns exactly 0. Exponentials are overflow guarded; non-finite
// inputs or parameters yielding a non-finite current throw PreconditionError.
double thermionic_current(double u1, double e_field, const DiodePair& pair,
                          const MaterialParams& mat);

struct IVPoint {
  double u = 0;           // applied bias [V]
  double current = 0;     // [A]
  double e_center = 0;    // contact-surface field at the device midpoint [V/m]
  double e_edge = 0;      // max electrode-edge field [V/m]
  double w_vertical = 0;  // depletion depth under the reverse contact [m]
  double l_lateral = 0;   // lateral depletion reach past the inner edge [m]
  int stage = 1;          // 1 vertical, 2 slab bottom reached, 3 lateral
};

struct IVCurve {
  std::vector<IVPoint> points;  // ordered by strictly increasing u
  DriveConditions drive;        // snapshot of the producing drive
  double p0 = 0;                // quasi-neutral hole density of the sweep [m^-3]
};

// Full readout pipeline over an ascending, non-negative bias sweep: the RF
// conditions set the NV pair rate, the calibrated generation fixes the hole
// density, each bias gets a 2D field solve, and the current is thermionic
// emission at the reverse contact with U1 = U. Zero optical power (no free
// holes) gives identically zero current. Depletion metrics for repeated
// (p0, U, polarity, grid) combinations are served from a process-wide cache.
// Sweep points run on solver.threads workers; results are ordered by U and
// solver failures rethrow with the offending bias named.
IVCurve device_iv(const std::vector<double>& u_sweep, const Config& cfg,
                  double generation_scale);

// Knee voltage: the maximum-|curvature| interior knot of a smoothing-spline
// fit of I(U) on the affinely normalized sweep, refined by a three-point
// parabola. Needs >= 7 points spanning the knee. Knots in the diode turn-on
// region or before half the rise is complete are not candidates (constants
// documented in the source). Throws ConvergenceError when the curvature
// maximum sits at the sweep boundary or the curve is still rising at the
// sweep end (no interior knee).
double find_inflection(const std::vector<double>& u,
                       const std::vector<double>& current);
double find_inflection(const IVCurve& curve);

struct BarrierFit {
  double phi1 = 0;
  double eta = 0;
  double a_eff = 0;
  // Covariance of (phi1, eta, ln a_eff), row major. phi1 and ln a_eff enter
  // the model only through one common offset, so their block is a ridge; the
  // condition number of J^T J records that degeneracy.
  std::array<double, 9> covariance{};
  double rms_log_residual = 0;
  double condition = 0;
  int iterations = 0;
};

// Levenberg-Marquardt least squares of log I over (phi1, eta, ln a_eff)
// against measured (U, I) pairs, using the zero-field thermionic form (the
// barrier-lowering term is a calibration-time constant absorbed into phi1).
// Needs >= 10 points with U > 0 and I > 0. Throws ConvergenceError on
// stagnation and PreconditionError on malformed data or a fit escaping the
// physical bounds.
BarrierFit calibrate_barrier(const std::vector<double>& u,
                             const std::vector<double>& current,
                             const DiodePair& seed, const MaterialParams& mat);

}  // namespace fedmr

#endif
