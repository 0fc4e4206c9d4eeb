#include "fedmr/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>

#include "fedmr/units.hpp"

namespace fedmr {

namespace {

using units::Dim;

struct FieldDef {
  const char* section;
  const char* key;
  Dim dim;
  std::function<double*(Config&)> num;      // numeric fields
  std::function<std::string(const Config&)> get_text;  // non-numeric fields
  std::function<bool(Config&, const std::string&)> set_text;
};

FieldDef num_field(const char* sec, const char* key, Dim dim, std::function<double*(Config&)> f) {
  return FieldDef{sec, key, dim, std::move(f), nullptr, nullptr};
}

FieldDef text_field(const char* sec, const char* key,
                    std::function<std::string(const Config&)> get,
                    std::function<bool(Config&, const std::string&)> set) {
  return FieldDef{sec, key, Dim::none, nullptr, std::move(get), std::move(set)};
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

bool parse_int(const std::string& s, int& out) {
  char* end = nullptr;
  long v = std::strtol(s.c_str(), &end, 10);
  if (end == s.c_str() || *end != '\0') return false;
  out = static_cast<int>(v);
  return true;
}

const std::vector<FieldDef>& field_table() {
  static const std::vector<FieldDef> t = [] {
    std::vector<FieldDef> v;
    auto M = [](auto fn) { return std::function<double*(Config&)>(fn); };
    v.push_back(num_field("material", "eps_s", Dim::none, M([](Config& c) { return &c.material.eps_s; })));
    v.push_back(num_field("material", "n_nitrogen", Dim::density, M([](Config& c) { return &c.material.n_nitrogen; })));
    v.push_back(num_field("material", "n_boron", Dim::density, M([](Config& c) { return &c.material.n_boron; })));
    v.push_back(num_field("material", "nv_fraction", Dim::none, M([](Config& c) { return &c.material.nv_fraction; })));
    v.push_back(num_field("material", "c_e", Dim::capture, M([](Config& c) { return &c.material.c_e; })));
    v.push_back(num_field("material", "c_h", Dim::capture, M([](Config& c) { return &c.material.c_h; })));
    v.push_back(num_field("material", "kappa_hn", Dim::none, M([](Config& c) { return &c.material.kappa_hn; })));
    v.push_back(num_field("material", "temperature", Dim::temperature, M([](Config& c) { return &c.material.temperature; })));

    v.push_back(num_field("geometry", "electrode_width", Dim::length, M([](Config& c) { return &c.geometry.electrode_width; })));
    v.push_back(num_field("geometry", "electrode_gap", Dim::length, M([](Config& c) { return &c.geometry.electrode_gap; })));
    v.push_back(num_field("geometry", "beam_waist", Dim::length, M([](Config& c) { return &c.geometry.beam_waist; })));
    v.push_back(num_field("geometry", "box_depth", Dim::length, M([](Config& c) { return &c.geometry.box_depth; })));
    v.push_back(num_field("geometry", "margin_x", Dim::length, M([](Config& c) { return &c.geometry.margin_x; })));
    v.push_back(num_field("geometry", "grid_h", Dim::length, M([](Config& c) { return &c.geometry.grid_h; })));

    v.push_back(num_field("drive", "optical_power", Dim::power, M([](Config& c) { return &c.drive.optical_power; })));
    v.push_back(num_field("drive", "rf_power", Dim::power_dbm, M([](Config& c) { return &c.drive.rf_power; })));
    v.push_back(num_field("drive", "rf_frequency", Dim::frequency, M([](Config& c) { return &c.drive.rf_frequency; })));
    v.push_back(num_field("drive", "b_axial", Dim::bfield, M([](Config& c) { return &c.drive.b_axial; })));
    v.push_back(num_field("drive", "b_gradient", Dim::bgradient, M([](Config& c) { return &c.drive.b_gradient; })));
    v.push_back(text_field("drive", "rf_enabled",
        [](const Config& c) { return std::string(c.drive.rf_enabled ? "true" : "false"); },
        [](Config& c, const std::string& s) {
          if (s == "true" || s == "1" || s == "on") { c.drive.rf_enabled = true; return true; }
          if (s == "false" || s == "0" || s == "off") { c.drive.rf_enabled = false; return true; }
          return false;
        }));
    v.push_back(text_field("drive", "positive_electrode",
        [](const Config& c) { return std::string(c.drive.positive_electrode == Electrode::A ? "A" : "B"); },
        [](Config& c, const std::string& s) {
          if (s == "A" || s == "a") { c.drive.positive_electrode = Electrode::A; return true; }
          if (s == "B" || s == "b") { c.drive.positive_electrode = Electrode::B; return true; }
          return false;
        }));

    v.push_back(num_field("rates", "k_rad", Dim::rate, M([](Config& c) { return &c.rates.k_rad; })));
    v.push_back(num_field("rates", "k_isc0", Dim::rate, M([](Config& c) { return &c.rates.k_isc0; })));
    v.push_back(num_field("rates", "k_isc1", Dim::rate, M([](Config& c) { return &c.rates.k_isc1; })));
    v.push_back(num_field("rates", "k_ms", Dim::rate, M([](Config& c) { return &c.rates.k_ms; })));
    v.push_back(num_field("rates", "k_rad0", Dim::rate, M([](Config& c) { return &c.rates.k_rad0; })));
    v.push_back(num_field("rates", "pump_coeff", Dim::rate_per_intensity, M([](Config& c) { return &c.rates.pump_coeff; })));
    v.push_back(num_field("rates", "ion_coeff", Dim::rate_per_intensity, M([](Config& c) { return &c.rates.ion_coeff; })));
    v.push_back(num_field("rates", "back_coeff", Dim::rate_per_intensity, M([](Config& c) { return &c.rates.back_coeff; })));
    v.push_back(num_field("rates", "back_polarization", Dim::none, M([](Config& c) { return &c.rates.back_polarization; })));
    v.push_back(num_field("rates", "rabi_rate_1mw", Dim::rate, M([](Config& c) { return &c.rates.rabi_rate_1mw; })));
    v.push_back(num_field("rates", "linewidth", Dim::frequency, M([](Config& c) { return &c.rates.linewidth; })));
    v.push_back(num_field("rates", "nv0_filter_leak", Dim::none, M([](Config& c) { return &c.rates.nv0_filter_leak; })));
    v.push_back(num_field("rates", "bg_pl_coeff", Dim::rate_per_intensity, M([](Config& c) { return &c.rates.bg_pl_coeff; })));
    v.push_back(num_field("rates", "nv0_pl_alpha", Dim::none, M([](Config& c) { return &c.rates.nv0_pl_alpha; })));

    v.push_back(num_field("transport", "phi1", Dim::voltage, M([](Config& c) { return &c.transport.phi1; })));
    v.push_back(num_field("transport", "eta", Dim::none, M([](Config& c) { return &c.transport.eta; })));
    v.push_back(num_field("transport", "a_star", Dim::richardson, M([](Config& c) { return &c.transport.a_star; })));
    v.push_back(num_field("transport", "a_eff", Dim::area, M([](Config& c) { return &c.transport.a_eff; })));
    v.push_back(num_field("transport", "series_resistance", Dim::resistance, M([](Config& c) { return &c.transport.series_resistance; })));
    v.push_back(num_field("transport", "edge_weight", Dim::none, M([](Config& c) { return &c.transport.edge_weight; })));

    v.push_back(num_field("solver", "depletion_threshold", Dim::none, M([](Config& c) { return &c.solver.depletion_threshold; })));
    v.push_back(num_field("solver", "newton_tol", Dim::none, M([](Config& c) { return &c.solver.newton_tol; })));
    v.push_back(num_field("solver", "cg_tol", Dim::none, M([](Config& c) { return &c.solver.cg_tol; })));
    v.push_back(text_field("solver", "max_newton",
        [](const Config& c) { return std::to_string(c.solver.max_newton); },
        [](Config& c, const std::string& s) { return parse_int(s, c.solver.max_newton); }));
    v.push_back(text_field("solver", "kernels",
        [](const Config& c) { return c.solver.kernels; },
        [](Config& c, const std::string& s) {
          if (s != "scalar" && s != "avx2" && s != "neon" && s != "auto") return false;
          c.solver.kernels = s;
          return true;
        }));
    v.push_back(text_field("solver", "threads",
        [](const Config& c) { return std::to_string(c.solver.threads); },
        [](Config& c, const std::string& s) { return parse_int(s, c.solver.threads); }));
    v.push_back(text_field("solver", "cache_dir",
        [](const Config& c) { return c.solver.cache_dir; },
        [](Config& c, const std::string& s) { c.solver.cache_dir = s; return true; }));

    v.push_back(num_field("calibration", "target_p0", Dim::density, M([](Config& c) { return &c.calibration.target_p0; })));
    v.push_back(num_field("calibration", "at_power", Dim::power, M([](Config& c) { return &c.calibration.at_power; })));
    return v;
  }();
  return t;
}

const FieldDef* find_field(const std::string& section, const std::string& key) {
  for (const FieldDef& f : field_table())
    if (section == f.section && key == f.key) return &f;
  return nullptr;
}

std::string trim(std::string s) {
  auto sp = [](unsigned char c) { return std::isspace(c) != 0; };
  while (!s.empty() && sp(s.front())) s.erase(s.begin());
  while (!s.empty() && sp(s.back())) s.pop_back();
  return s;
}

void apply_value(Config& cfg, const FieldDef& f, const std::string& value,
                 const std::string& where) {
  if (f.num) {
    double si = 0.0;
    std::string err;
    if (!units::parse_quantity(value, f.dim, si, err))
      throw ConfigError(where + ": " + err);
    *f.num(cfg) = si;
  } else {
    if (!f.set_text(cfg, trim(value)))
      throw ConfigError(where + ": invalid value '" + value + "'");
  }
}

void apply_env_overrides(Config& cfg) {
  for (const FieldDef& f : field_table()) {
    std::string name = "FEDMR_";
    for (const char* p = f.section; *p; ++p) name += static_cast<char>(std::toupper(*p));
    name += '_';
    for (const char* p = f.key; *p; ++p) name += static_cast<char>(std::toupper(*p));
    if (const char* v = std::getenv(name.c_str()))
      apply_value(cfg, f, v, "env " + name);
  }
}

}  // namespace

Config load_config(const std::string& text, const std::vector<std::string>& overrides) {
  Config cfg;  // defaults
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(lineno);
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + ": unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (section.empty()) throw ConfigError(where + ": key outside any [section]");
    const FieldDef* f = find_field(section, key);
    if (!f) throw ConfigError(where + ": unknown key " + section + "." + key);
    apply_value(cfg, *f, value, where);
  }

  apply_env_overrides(cfg);

  for (const std::string& ov : overrides) {
    auto eq = ov.find('=');
    auto dot = ov.find('.');
    if (eq == std::string::npos || dot == std::string::npos || dot > eq)
      throw ConfigError("override '" + ov + "': expected section.key=value");
    std::string section_k = trim(ov.substr(0, dot));
    std::string key = trim(ov.substr(dot + 1, eq - dot - 1));
    const FieldDef* f = find_field(section_k, key);
    if (!f) throw ConfigError("override: unknown key " + section_k + "." + key);
    apply_value(cfg, *f, trim(ov.substr(eq + 1)), "override " + section_k + "." + key);
  }

  validate(cfg);
  return cfg;
}

Config load_config_file(const std::string& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_config(ss.str(), overrides);
}

void validate(const Config& cfg) {
  auto req = [](bool ok, const char* msg) {
    if (!ok) throw ConfigError(msg);
  };
  const MaterialParams& m = cfg.material;
  req(m.eps_s >= 1.0, "material.eps_s must be >= 1");
  req(m.n_nitrogen > 0 && m.n_boron > 0, "dopant densities must be positive");
  req(m.n_nitrogen > m.n_boron,
      "material: n_nitrogen must exceed n_boron (overcompensated regime)");
  req(m.nv_fraction > 0 && m.nv_fraction < 1, "material.nv_fraction must be in (0,1)");
  req(m.c_e > 0 && m.c_h > 0, "capture coefficients must be positive");
  req(m.kappa_hn > 0 && m.kappa_hn <= 1, "material.kappa_hn must be in (0,1]");
  req(m.temperature > 0, "material.temperature must be positive");

  const DeviceGeometry& g = cfg.geometry;
  req(g.electrode_width > 0 && g.electrode_gap > 0 && g.beam_waist > 0 &&
          g.box_depth >= 0 && g.margin_x >= 0 && g.grid_h > 0,
      "geometry: all lengths must be positive");
  req(g.slab_depth() <= g.box_depth_eff(),
      "geometry: illuminated slab deeper than the box");
  auto divides = [&](double len, const char* msg) {
    double r = len / g.grid_h;
    if (std::fabs(r - std::round(r)) > 1e-3 * r)
      throw ConfigError(std::string("geometry: grid_h does not divide ") + msg);
  };
  divides(g.electrode_width, "electrode_width");
  divides(g.electrode_gap, "electrode_gap");
  divides(g.margin_x, "margin_x");
  divides(g.box_depth_eff(), "box_depth");
  divides(g.slab_depth(), "slab depth");
  req(g.slab_depth() / g.grid_h >= 8.0 - 1e-9,
      "geometry: grid too coarse, need at least 8 cells across the slab depth");

  req(cfg.drive.optical_power >= 0, "drive.optical_power must be >= 0");
  req(cfg.drive.rf_power >= 0, "drive.rf_power must be >= 0");
  req(cfg.drive.rf_frequency > 0, "drive.rf_frequency must be positive");

  const RateModel& r = cfg.rates;
  req(r.k_rad > 0 && r.k_isc0 >= 0 && r.k_isc1 >= 0 && r.k_ms > 0 && r.k_rad0 > 0,
      "rates: fixed rates must be positive");
  req(r.k_isc1 >= r.k_isc0, "rates: k_isc1 must be >= k_isc0 (spin-selective ISC)");
  req(r.pump_coeff > 0 && r.ion_coeff > 0 && r.back_coeff > 0,
      "rates: optical coefficients must be positive");
  req(r.rabi_rate_1mw >= 0, "rates.rabi_rate_1mw must be >= 0");
  req(r.linewidth > 0, "rates.linewidth must be positive");
  req(r.nv0_filter_leak >= 0 && r.nv0_filter_leak <= 1,
      "rates.nv0_filter_leak must be in [0,1]");
  req(r.back_polarization >= 0 && r.back_polarization <= 1,
      "rates.back_polarization must be in [0,1]");
  req(r.bg_pl_coeff >= 0, "rates.bg_pl_coeff must be >= 0");
  req(r.nv0_pl_alpha > 0, "rates.nv0_pl_alpha must be positive");

  const TransportParams& t = cfg.transport;
  req(t.phi1 > 0, "transport.phi1 must be positive");
  req(t.eta >= 1.0, "transport.eta must be >= 1");
  req(t.a_star > 0 && t.a_eff > 0, "transport: a_star and a_eff must be positive");
  req(t.series_resistance >= 0, "transport.series_resistance must be >= 0");
  req(t.edge_weight >= 0 && t.edge_weight <= 1, "transport.edge_weight must be in [0,1]");

  const SolverParams& s = cfg.solver;
  req(s.depletion_threshold > 0 && s.depletion_threshold < 1,
      "solver.depletion_threshold must be in (0,1)");
  req(s.newton_tol > 0 && s.cg_tol > 0, "solver tolerances must be positive");
  req(s.max_newton >= 1, "solver.max_newton must be >= 1");
  req(s.threads >= 0, "solver.threads must be >= 0");

  req(cfg.calibration.target_p0 > 0, "calibration.target_p0 must be positive");
  req(cfg.calibration.at_power > 0, "calibration.at_power must be positive");
}

std::string serialize_config(const Config& cfg) {
  std::ostringstream out;
  std::string section;
  Config& c = const_cast<Config&>(cfg);  // num accessors are non-const
  for (const FieldDef& f : field_table()) {
    if (section != f.section) {
      section = f.section;
      out << "[" << section << "]\n";
    }
    out << f.key << " = ";
    if (f.num) {
      out << fmt_double(*f.num(c));
      if (const char* u = units::si_unit_name(f.dim); *u) out << " " << u;
    } else {
      out << f.get_text(cfg);
    }
    out << "\n";
  }
  return out.str();
}

std::string config_hash(const Config& cfg) {
  const std::string s = serialize_config(cfg);
  std::uint64_t h = 1469598103934665603ull;  // FNV-1a 64
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace fedmr
