#ifndef FEDMR_CONSTANTS_HPP
#define FEDMR_CONSTANTS_HPP

namespace fedmr {

// CODATA 2018 exact values (SI).
namespace phys {
inline constexpr double q_e   = 1.602176634e-19;   // elementary charge [C]
inline constexpr double k_B   = 1.380649e-23;      // Boltzmann constant [J/K]
inline constexpr double eps_0 = 8.8541878128e-12;  // vacuum permittivity [F/m]
inline constexpr double pi    = 3.141592653589793;

// NV ground-state constants.
inline constexpr double zfs_hz      = 2.87e9;      // zero-field splitting [Hz]
inline constexpr double gamma_hz_t  = 28.024e9;    // gyromagnetic ratio [Hz/T]

inline double thermal_voltage(double temperature_k) {
  return k_B * temperature_k / q_e;  // kT/q [V]
}
}  // namespace phys

}  // namespace fedmr

#endif
