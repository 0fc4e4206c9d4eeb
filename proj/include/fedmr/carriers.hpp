#ifndef FEDMR_CARRIERS_HPP
#define FEDMR_CARRIERS_HPP

#include "fedmr/config.hpp"

namespace fedmr {

// Steady-state free-carrier and trap-charge densities, all [m^-3].
//
// The balance is a two-trap capture model in overcompensated material
// (N_nitrogen > N_boron), documented as a reconstruction:
//   donor charge:    c_e n N_D+ = kappa_hn c_h p (N_N - N_D+)
//   acceptor charge: c_h p N_A- = c_e n (N_B - N_A-)
//   electron budget: G = c_e n (N_D+ + N_B - N_A-)
//   neutrality:      p + N_D+ = n + N_A-
// (the hole budget follows from these four). Hole capture on neutral donors
// is suppressed by kappa_hn; electrons recombine mostly on neutral boron,
// which is what keeps holes the majority carrier under illumination.
struct CarrierState {
  double p = 0;
  double n = 0;
  double n_d_plus = 0;
  double n_a_minus = 0;
  double neutrality_residual = 0;  // |p + N_D+ - n - N_A-| / (p + N_D+)
};

// Solves the balance at pair-generation density G [m^-3 s^-1]. G = 0 returns
// the dark compensated state (p = n = 0, N_D+ = N_A- = N_boron). Newton on
// (ln n, ln p) with backtracking damping; throws ConvergenceError on failure.
CarrierState steady_carriers(double G, const MaterialParams& mat);

// Exact inverse of the balance: the generation density that sustains hole
// density p (inner bisection on n through the neutrality equation).
double generation_for_hole_density(double p, const MaterialParams& mat);

// Multiplicative factor on the modeled pair generation such that the
// calibration target (calibration.target_p0 at calibration.at_power, RF off)
// is met exactly. Stored in the run manifest by the CLI.
double calibrate_generation(const Config& cfg);

}  // namespace fedmr

#endif
