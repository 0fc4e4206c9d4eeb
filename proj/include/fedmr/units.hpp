#ifndef FEDMR_UNITS_HPP
#define FEDMR_UNITS_HPP

#include <string>
#include <string_view>

namespace fedmr::units {

// Dimension of a config field. Every field declares one; the parser accepts
// any unit registered for that dimension and converts to SI with a single
// IEEE multiply or divide by an exact power of ten, so equal quantities
// written in different decimal units land on the identical double.
enum class Dim {
  none,        // dimensionless
  length,      // m
  power,       // W
  power_dbm,   // stored as W, parsed from dBm or W
  voltage,     // V
  temperature, // K
  frequency,   // Hz
  bfield,      // T
  bgradient,   // T/m
  density,     // m^-3
  capture,     // m^3/s
  rate,        // 1/s
  rate_per_intensity, // m^2/J  (rate per unit optical intensity)
  richardson,  // A m^-2 K^-2
  area,        // m^2
  resistance,  // Ohm
};

// Converts "value [unit]" to SI. Returns false and fills err on unknown or
// dimension-mismatched unit or a malformed number.
bool parse_quantity(std::string_view text, Dim dim, double& out_si, std::string& err);

// Unit the canonical serializer labels a dimension with (always the SI one).
const char* si_unit_name(Dim dim);

}  // namespace fedmr::units

#endif
