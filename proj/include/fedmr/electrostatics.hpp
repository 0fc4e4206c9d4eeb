#ifndef FEDMR_ELECTROSTATICS_HPP
#define FEDMR_ELECTROSTATICS_HPP

#include <vector>

#include "fedmr/config.hpp"

namespace fedmr {

// Uniform cross-section grid; node (ix, iz) sits at (ix*h, iz*h), iz = 0 on
// the electrode surface. Row-major storage, k = iz*nx + ix.
struct Grid2D {
  int nx = 0;
  int nz = 0;
  int slab_rows = 0;  // node row iz == slab_rows lies on the slab bottom
  double h = 0;
};

// Derives the grid from the geometry. Throws PreconditionError when the slab
// is resolved by fewer than 8 cells.
Grid2D make_grid(const DeviceGeometry& geom);

struct FieldSolution {
  Grid2D grid;
  double u_applied = 0;
  Electrode positive = Electrode::A;
  std::vector<double> phi;          // V
  std::vector<double> ex, ez;       // V/m, central differences inside,
                                    // second-order one-sided on boundaries
  std::vector<double> rho;          // C/m^3
  std::vector<unsigned char> depleted;  // hole survival below threshold
  double gauss_residual = 0;        // discrete Gauss law check, relative
  int newton_iters = 0;
  long cg_iters = 0;                // linear iterations across all Newton steps
};

struct DepletionMetrics {
  double w_vertical = 0;   // m, under the positive electrode center
  double l_lateral = 0;    // m, slab-bottom reach past the inner edge
  double e_center = 0;     // V/m at the contact surface midpoint
  double e_edge = 0;       // V/m, max over the two electrode edge nodes
  int stage = 1;           // 1 vertical, 2 slab bottom reached, 3 lateral
};

// Abrupt-junction depletion width sqrt(2 eps0 eps_s U / (q p0)); the analytic
// oracle for the 2D solver.
double depletion_width_1d(double u, double p0, const MaterialParams& mat);

// Solves eps0*eps_s * lap(phi) = q * p_col(x) * (1 - exp(-phi/Vt)) inside the
// illuminated slab (Laplace below it) with +u on the positive electrode, 0 on
// the other, Neumann everywhere else. Boltzmann hole response; damped Newton
// with an SSOR-preconditioned CG inner solve on the active kernel backend.
// p_col is the per-column quasi-neutral hole density (size grid.nx).
FieldSolution solve_poisson(const DeviceGeometry& geom,
                            const MaterialParams& mat,
                            const SolverParams& solver,
                            const std::vector<double>& p_col, double u,
                            Electrode positive);

DepletionMetrics extract_metrics(const FieldSolution& sol,
                                 const DeviceGeometry& geom,
                                 const MaterialParams& mat,
                                 const SolverParams& solver,
                                 const std::vector<double>& p_col);

// Bias-on minus bias-off PL change per column, averaged over the top 5 slab
// rows, sign set by the filter, normalized at the positive-electrode surface
// midpoint. x is measured from the positive electrode's outer edge toward
// the gap.
enum class PlFilter { nv_minus, nv_zero };
struct PlProfile {
  std::vector<double> x;    // m
  std::vector<double> dpl;  // normalized
};
PlProfile delta_pl_profile(const FieldSolution& on, const FieldSolution& off,
                           const DeviceGeometry& geom, PlFilter filter,
                           double alpha);

}  // namespace fedmr

#endif
