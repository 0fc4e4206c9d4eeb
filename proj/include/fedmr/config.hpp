#ifndef FEDMR_CONFIG_HPP
#define FEDMR_CONFIG_HPP

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace fedmr {

// Thrown for malformed config text, unknown keys/units, or violated
// parameter invariants. The CLI maps it to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown when a solver fails to converge. CLI exit code 3.
struct ConvergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown on violated numeric preconditions of an operation. CLI exit code 2.
struct PreconditionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// All values SI. Defaults reproduce the reference device: 1 ppm substitutional
// nitrogen, ~50 ppb boron, 0.3% NV yield, type-IIa permittivity.
struct MaterialParams {
  double eps_s = 5.7;            // relative permittivity
  double n_nitrogen = 1.76e23;   // substitutional N density [m^-3] (1 ppm)
  double n_boron = 8.8e21;       // B acceptor density [m^-3] (~50 ppb)
  double nv_fraction = 0.003;    // NV yield per substitutional N
  double c_e = 1e-12;            // e capture on ionized donors [m^3/s] (1e-6 cm^3/s)
  double c_h = 1e-14;            // h capture on ionized acceptors [m^3/s] (1e-8 cm^3/s)
  double kappa_hn = 1e-6;        // h capture suppression on neutral donors
  double temperature = 300.0;    // [K]

  double nv_density() const { return nv_fraction * n_nitrogen; }
};

// Lateral-injection geometry: x spans both electrodes and the gap, z is depth
// from the contact surface. The beam runs along x just below the surface; its
// top-hat slab is 2*beam_waist deep. The outer electrode edges sit on the box
// walls, where the Neumann condition acts as a mirror plane.
struct DeviceGeometry {
  double electrode_width = 50e-6;  // contact width along x [m]
  double electrode_gap = 200e-6;   // inner-edge separation [m]
  double beam_waist = 5e-6;        // Gaussian waist of the lateral beam [m]
  double box_depth = 0;            // simulated depth [m]; 0 follows the slab
  double margin_x = 0;             // extra width beyond the outer edges [m]
  double grid_h = 0.5e-6;          // uniform node spacing [m]

  double slab_depth() const { return 2.0 * beam_waist; }
  // The bias field dies off within the illuminated layer (Neumann backside,
  // charge-free bulk), so the box tracks the slab unless the user widens it.
  double box_depth_eff() const {
    return box_depth > 0 ? box_depth : slab_depth();
  }
  double box_width() const { return 2.0 * margin_x + 2.0 * electrode_width + electrode_gap; }
  // Electrode footprints in box coordinates (x=0 at left box edge).
  double electrode_a_x0() const { return margin_x; }
  double electrode_a_x1() const { return margin_x + electrode_width; }
  double electrode_b_x0() const { return margin_x + electrode_width + electrode_gap; }
  double electrode_b_x1() const { return margin_x + 2.0 * electrode_width + electrode_gap; }
};

enum class Electrode { A, B };

struct DriveConditions {
  double optical_power = 0.1;      // [W]
  double rf_power = 0.316227766016838;  // [W], 25 dBm
  double rf_frequency = 2.87e9;    // [Hz]
  bool rf_enabled = true;
  double b_axial = 0.0;            // axial field at box center [T]
  double b_gradient = 0.0;         // axial-field gradient along x [T/m]
  Electrode positive_electrode = Electrode::A;
};

// NV charge-cycle rate model. Optical rates scale linearly with intensity
// through the *_coeff entries; fixed rates are intensity independent.
struct RateModel {
  double k_rad = 6.6e7;        // NV- excited-state radiative decay [1/s]
  double k_isc0 = 5e6;         // ISC from m_S=0 excited state [1/s]
  double k_isc1 = 5e7;         // ISC from m_S=+-1 excited state [1/s]
  double k_ms = 1e6;           // metastable return to m_S=0 ground state [1/s]
  double k_rad0 = 5e7;         // NV0 excited-state decay [1/s]
  double pump_coeff = 0.05;    // NV- (and NV0) pump rate per intensity [m^2/J]
  double ion_coeff = 0.01;     // ionization rate from NV- ES per intensity [m^2/J]
  double back_coeff = 0.01;    // back-conversion from NV0 ES per intensity [m^2/J]
  double back_polarization = 0.8;  // fraction of back-converted population
                                   // returning to m_S=0; the rest splits evenly
  double rabi_rate_1mw = 6e5;  // spin mixing rate at 1 mW rf drive [1/s]
  double linewidth = 1e7;      // Lorentzian FWHM of each spin line [Hz]
  double nv0_filter_leak = 0.3;  // NV0 emission fraction inside the NV-
                                 // collection band
  double bg_pl_coeff = 1.3e-3;   // spin-independent background PL collected per
                                 // intensity [m^2/J] (dilutes optical contrast)
  double nv0_pl_alpha = 0.7;     // NV0-filter PL gain per unit NV- loss in the
                                 // depletion imaging profile
};

struct TransportParams {
  double phi1 = 1.2;           // reverse-junction barrier height [V]
  double eta = 1.1;            // ideality factor
  double a_star = 90e4;        // Richardson constant [A m^-2 K^-2]
  double a_eff = 2.5e-9;       // emitting contact area [m^2] (50x50 um default)
  double series_resistance = 0.0;  // [Ohm]; 0 disables the refinement
  double edge_weight = 0.0;    // mix of E_edge into the barrier-lowering field
};

struct SolverParams {
  double depletion_threshold = 0.01;  // hole survival defining "depleted"
  double newton_tol = 1e-8;    // nonlinear residual, relative to charge scale
  double cg_tol = 1e-10;       // inner linear solve, relative residual
  int max_newton = 60;
  std::string kernels = "auto";  // scalar | avx2 | neon | auto
  int threads = 0;             // 0: hardware concurrency
  std::string cache_dir;       // empty: field cache disabled
};

struct CalibrationTarget {
  double target_p0 = 3.5e20;   // quasi-neutral hole density [m^-3]
  double at_power = 0.1;       // optical power the target refers to [W]
};

struct Config {
  MaterialParams material;
  DeviceGeometry geometry;
  DriveConditions drive;
  RateModel rates;
  TransportParams transport;
  SolverParams solver;
  CalibrationTarget calibration;
};

// Parses INI-style text ([section] / key = value [unit] / '#' comments).
// Precedence: file < FEDMR_<SECTION>_<KEY> environment variables < overrides
// (CLI --set entries, "section.key=value"). Unknown keys and malformed values
// throw ConfigError naming the line. validate() runs on the result.
Config load_config(const std::string& text,
                   const std::vector<std::string>& overrides = {});
Config load_config_file(const std::string& path,
                        const std::vector<std::string>& overrides = {});

// Enforces the parameter invariants (positive lengths, grid compatibility,
// overcompensation ordering, slab fits in the box, ...). Throws ConfigError.
void validate(const Config& cfg);

// Canonical SI serialization. Round trip is bit exact:
// serialize_config(load_config(serialize_config(c))) == serialize_config(c).
std::string serialize_config(const Config& cfg);

// FNV-1a 64 over the canonical serialization, hex encoded.
std::string config_hash(const Config& cfg);

}  // namespace fedmr

#endif
