#include "fedmr/units.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <map>
#include <vector>

namespace fedmr::units {

namespace {

struct UnitDef {
  const char* name;
  Dim dim;
  double factor;  // exact power of ten
  bool divide;    // apply as value/factor instead of value*factor
};

// One entry per accepted spelling. Conversions are a single correctly rounded
// IEEE op so "200 um" and "200000 nm" produce bit-identical SI values.
const UnitDef kUnits[] = {
    {"m", Dim::length, 1.0, false},
    {"mm", Dim::length, 1e3, true},
    {"um", Dim::length, 1e6, true},
    {"\xc2\xb5m", Dim::length, 1e6, true},  // UTF-8 micro sign
    {"nm", Dim::length, 1e9, true},
    {"W", Dim::power, 1.0, false},
    {"mW", Dim::power, 1e3, true},
    {"uW", Dim::power, 1e6, true},
    {"W", Dim::power_dbm, 1.0, false},
    {"mW", Dim::power_dbm, 1e3, true},
    {"V", Dim::voltage, 1.0, false},
    {"mV", Dim::voltage, 1e3, true},
    {"kV", Dim::voltage, 1e3, false},
    {"K", Dim::temperature, 1.0, false},
    {"Hz", Dim::frequency, 1.0, false},
    {"kHz", Dim::frequency, 1e3, false},
    {"MHz", Dim::frequency, 1e6, false},
    {"GHz", Dim::frequency, 1e9, false},
    {"T", Dim::bfield, 1.0, false},
    {"mT", Dim::bfield, 1e3, true},
    {"T/m", Dim::bgradient, 1.0, false},
    {"mT/um", Dim::bgradient, 1e3, false},
    {"mT/\xc2\xb5m", Dim::bgradient, 1e3, false},
    {"m^-3", Dim::density, 1.0, false},
    {"cm^-3", Dim::density, 1e6, false},
    {"m^3/s", Dim::capture, 1.0, false},
    {"cm^3/s", Dim::capture, 1e6, true},
    {"1/s", Dim::rate, 1.0, false},
    {"s^-1", Dim::rate, 1.0, false},
    {"Hz", Dim::rate, 1.0, false},
    {"m^2/J", Dim::rate_per_intensity, 1.0, false},
    {"cm^2/J", Dim::rate_per_intensity, 1e4, true},
    {"A/m^2/K^2", Dim::richardson, 1.0, false},
    {"A/cm^2/K^2", Dim::richardson, 1e4, false},
    {"m^2", Dim::area, 1.0, false},
    {"cm^2", Dim::area, 1e4, true},
    {"um^2", Dim::area, 1e12, true},
    {"Ohm", Dim::resistance, 1.0, false},
    {"kOhm", Dim::resistance, 1e3, false},
};

}  // namespace

bool parse_quantity(std::string_view text, Dim dim, double& out_si, std::string& err) {
  std::string s(text);
  const char* begin = s.c_str();
  char* end = nullptr;
  double value = std::strtod(begin, &end);
  if (end == begin) {
    err = "not a number: '" + s + "'";
    return false;
  }
  if (!std::isfinite(value)) {
    err = "non-finite value: '" + s + "'";
    return false;
  }
  while (*end && std::isspace(static_cast<unsigned char>(*end))) ++end;
  std::string unit(end);
  while (!unit.empty() && std::isspace(static_cast<unsigned char>(unit.back()))) unit.pop_back();

  if (unit.empty()) {  // bare number: SI assumed (dBm fields take it as watts too)
    out_si = value;
    return true;
  }
  if (dim == Dim::power_dbm && unit == "dBm") {
    out_si = 1e-3 * std::pow(10.0, value / 10.0);
    return true;
  }
  for (const UnitDef& u : kUnits) {
    if (u.dim == dim && unit == u.name) {
      out_si = u.divide ? value / u.factor : value * u.factor;
      return true;
    }
  }
  err = "unit '" + unit + "' not valid here";
  return false;
}

const char* si_unit_name(Dim dim) {
  switch (dim) {
    case Dim::none: return "";
    case Dim::length: return "m";
    case Dim::power: return "W";
    case Dim::power_dbm: return "W";
    case Dim::voltage: return "V";
    case Dim::temperature: return "K";
    case Dim::frequency: return "Hz";
    case Dim::bfield: return "T";
    case Dim::bgradient: return "T/m";
    case Dim::density: return "m^-3";
    case Dim::capture: return "m^3/s";
    case Dim::rate: return "1/s";
    case Dim::rate_per_intensity: return "m^2/J";
    case Dim::richardson: return "A/m^2/K^2";
    case Dim::area: return "m^2";
    case Dim::resistance: return "Ohm";
  }
  return "";
}

}  // namespace fedmr::units
