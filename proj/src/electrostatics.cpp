#include "fedmr/electrostatics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include "fedmr/constants.hpp"
#include "fedmr/kernels.hpp"

namespace fedmr {

namespace {

using kernels::Backend;
using kernels::PaddedField;
using kernels::StencilOp;

// Everything is scaled by 1/(eps0*eps_s): face conductances become O(1) and
// the charge term q*p*V/eps lands near unity on the default grid, which keeps
// the CG reductions well away from denormal territory.
struct Problem {
  Grid2D g;
  double u = 0;
  double vt = 0;
  double eps = 0;
  double qp_scale = 0;               // max charge term, for the Newton tol
  std::vector<double> diag0;         // conductance part of the diagonal
  std::vector<double> cw, ce, cn, cs;
  std::vector<double> b0;            // Dirichlet contributions
  std::vector<double> charge_coef;   // q * p * V_cell / eps per node
  std::vector<unsigned char> dirichlet;
  std::vector<double> dval;
};

int grid_index(double x, double h, const char* what) {
  const double r = x / h;
  const long i = std::lround(r);
  if (std::fabs(r - i) > 1e-6)
    throw PreconditionError(std::string(what) + " does not land on a grid line");
  return static_cast<int>(i);
}

// exp(-phi/Vt) with the argument clamped so accumulation spikes cannot
// overflow; the clamp is applied identically in residual and Jacobian.
double boltz(double phi, double vt) {
  const double a = std::min(-phi / vt, 40.0);
  return std::exp(a);
}

Problem assemble(const Grid2D& g, const DeviceGeometry& geom,
                 const MaterialParams& mat, const std::vector<double>& p_col,
                 double u) {
  Problem pr;
  pr.g = g;
  pr.u = u;
  pr.vt = phys::thermal_voltage(mat.temperature);
  pr.eps = phys::eps_0 * mat.eps_s;

  const int nx = g.nx, nz = g.nz;
  const std::size_t n = static_cast<std::size_t>(nx) * nz;
  pr.diag0.assign(n, 0.0);
  pr.cw.assign(n, 0.0);
  pr.ce.assign(n, 0.0);
  pr.cn.assign(n, 0.0);
  pr.cs.assign(n, 0.0);
  pr.b0.assign(n, 0.0);
  pr.charge_coef.assign(n, 0.0);
  pr.dirichlet.assign(n, 0);
  pr.dval.assign(n, 0.0);

  const int ia0 = grid_index(geom.electrode_a_x0(), g.h, "electrode edge");
  const int ia1 = grid_index(geom.electrode_a_x1(), g.h, "electrode edge");
  const int ib0 = grid_index(geom.electrode_b_x0(), g.h, "electrode edge");
  const int ib1 = grid_index(geom.electrode_b_x1(), g.h, "electrode edge");
  for (int ix = ia0; ix <= ia1; ++ix) {
    pr.dirichlet[ix] = 1;
    pr.dval[ix] = u;  // canonical solve: positive electrode on the left
  }
  for (int ix = ib0; ix <= ib1; ++ix) pr.dirichlet[ix] = 1;

  // finite-volume faces: half cells along every outer boundary
  auto wx = [&](int ix) { return (ix == 0 || ix == nx - 1) ? 0.5 : 1.0; };
  auto wz = [&](int iz) { return (iz == 0 || iz == nz - 1) ? 0.5 : 1.0; };

  for (int iz = 0; iz < nz; ++iz) {
    for (int ix = 0; ix < nx; ++ix) {
      const std::size_t k = static_cast<std::size_t>(iz) * nx + ix;
      if (pr.dirichlet[k]) {
        pr.diag0[k] = 1.0;
        pr.b0[k] = pr.dval[k];
        continue;
      }
      double d = 0.0;
      auto face = [&](int jx, int jz, double cond, double& coef) {
        d += cond;
        const std::size_t m = static_cast<std::size_t>(jz) * nx + jx;
        if (pr.dirichlet[m])
          pr.b0[k] += cond * pr.dval[m];
        else
          coef = cond;
      };
      if (ix > 0) face(ix - 1, iz, wz(iz), pr.cw[k]);
      if (ix < nx - 1) face(ix + 1, iz, wz(iz), pr.ce[k]);
      if (iz > 0) face(ix, iz - 1, wx(ix), pr.cn[k]);
      if (iz < nz - 1) face(ix, iz + 1, wx(ix), pr.cs[k]);
      pr.diag0[k] = d;

      // hole charge occupies z < slab depth; the node row on the slab bottom
      // carries only the upper half of its control cell
      double zfrac = 0.0;
      if (iz < g.slab_rows) zfrac = (iz == 0) ? 0.5 : 1.0;
      if (iz == g.slab_rows) zfrac = 0.5;
      pr.charge_coef[k] =
          phys::q_e * p_col[ix] * wx(ix) * zfrac * g.h * g.h / pr.eps;
      pr.qp_scale = std::max(pr.qp_scale, pr.charge_coef[k]);
    }
  }
  return pr;
}

// nonlinear residual R(phi) = A0 phi - b0 + charge(phi); zero on Dirichlet rows
void residual_vec(const Problem& pr, const Backend& be, const double* phi,
                  double* work_apply, double* r) {
  const std::size_t n = pr.diag0.size();
  StencilOp op{pr.g.nx, pr.g.nz, pr.diag0.data(), pr.cw.data(), pr.ce.data(),
               pr.cn.data(), pr.cs.data()};
  be.apply(op, phi, work_apply);
  for (std::size_t k = 0; k < n; ++k) {
    const double charge =
        pr.charge_coef[k] == 0.0
            ? 0.0
            : pr.charge_coef[k] * (1.0 - boltz(phi[k], pr.vt));
    r[k] = work_apply[k] - pr.b0[k] + charge;
  }
}

// SSOR preconditioner on the red-black ordering: the palindromic half-sweep
// pattern keeps M symmetric positive definite for CG.
void precondition(const Backend& be, const StencilOp& op, const double* r,
                  double* z, std::size_t n) {
  std::memset(z, 0, n * sizeof(double));
  const double omega = 1.5;
  be.rb_sweep(op, 0, omega, r, z);
  be.rb_sweep(op, 1, omega, r, z);
  be.rb_sweep(op, 0, omega, r, z);
}

int pcg(const Backend& be, const StencilOp& op, const double* b, double* x,
        double rel_tol, int nx, int nz) {
  const std::size_t n = static_cast<std::size_t>(nx) * nz;
  PaddedField r(nx, nz), z(nx, nz), p(nx, nz), ap(nx, nz);
  std::memset(x, 0, n * sizeof(double));
  std::memcpy(r.interior(), b, n * sizeof(double));
  const double r0 = std::sqrt(be.dot(r.interior(), r.interior(), n));
  if (r0 == 0.0) return 0;
  precondition(be, op, r.interior(), z.interior(), n);
  std::memcpy(p.interior(), z.interior(), n * sizeof(double));
  double rz = be.dot(r.interior(), z.interior(), n);
  const int max_it = 20000;
  for (int it = 1; it <= max_it; ++it) {
    be.apply(op, p.interior(), ap.interior());
    const double pap = be.dot(p.interior(), ap.interior(), n);
    if (pap <= 0.0)
      throw ConvergenceError("poisson: CG lost positive definiteness");
    const double alpha = rz / pap;
    be.axpy(alpha, p.interior(), x, n);
    be.axpy(-alpha, ap.interior(), r.interior(), n);
    if (std::sqrt(be.dot(r.interior(), r.interior(), n)) <= rel_tol * r0)
      return it;
    precondition(be, op, r.interior(), z.interior(), n);
    const double rz_next = be.dot(r.interior(), z.interior(), n);
    be.xpby(z.interior(), rz_next / rz, p.interior(), n);
    rz = rz_next;
  }
  throw ConvergenceError("poisson: CG failed to reach tolerance in " +
                         std::to_string(max_it) + " iterations");
}

// One damped-Newton descent from the current phi. Returns iterations used,
// or -1 when backtracking stalls before reaching the tolerance.
int newton(const Problem& pr, const Backend& be, const SolverParams& sp,
           PaddedField& phi, long& cg_iters) {
  const int nx = pr.g.nx, nz = pr.g.nz;
  const std::size_t n = pr.diag0.size();
  PaddedField r(nx, nz), dphi(nx, nz), trial(nx, nz), work(nx, nz);
  std::vector<double> jdiag(n), rhs(n);

  // tolerance pinned to the charge scale; pure-Laplace solves (no holes)
  // fall back to the bias scale
  const double tol = sp.newton_tol * (pr.qp_scale > 0
                                          ? pr.qp_scale
                                          : std::max(std::fabs(pr.u), pr.vt));

  residual_vec(pr, be, phi.interior(), work.interior(), r.interior());
  double rnorm = be.norm_inf(r.interior(), n);
  for (int it = 0; it < sp.max_newton; ++it) {
    if (rnorm < tol) return it;
    for (std::size_t k = 0; k < n; ++k) {
      double add = 0.0;
      if (pr.charge_coef[k] != 0.0) {
        const double e = boltz(phi.interior()[k], pr.vt);
        // flat clamp: past the cap the model's charge is constant
        if (-phi.interior()[k] / pr.vt < 40.0)
          add = pr.charge_coef[k] * e / pr.vt;
      }
      jdiag[k] = pr.diag0[k] + add;
      rhs[k] = -r.interior()[k];
    }
    StencilOp op{nx, nz, jdiag.data(), pr.cw.data(), pr.ce.data(),
                 pr.cn.data(), pr.cs.data()};
    cg_iters += pcg(be, op, rhs.data(), dphi.interior(), sp.cg_tol, nx, nz);

    double damp = 1.0;
    bool accepted = false;
    for (int bt = 0; bt < 30; ++bt) {
      std::memcpy(trial.interior(), phi.interior(), n * sizeof(double));
      be.axpy(damp, dphi.interior(), trial.interior(), n);
      residual_vec(pr, be, trial.interior(), work.interior(), r.interior());
      const double rt = be.norm_inf(r.interior(), n);
      if (rt < rnorm || rt < tol) {
        std::memcpy(phi.interior(), trial.interior(), n * sizeof(double));
        rnorm = rt;
        accepted = true;
        break;
      }
      damp *= 0.5;
    }
    if (!accepted) {
      // leave phi as is; residual vector must match it again
      residual_vec(pr, be, phi.interior(), work.interior(), r.interior());
      return -1;
    }
  }
  return rnorm < tol ? sp.max_newton : -1;
}

// Warm start from the one-dimensional depletion profile: each column under
// the positive electrode gets the abrupt-junction potential, with the excess
// past full depletion parked as a flat pocket below the slab. Ground-side and
// gap columns start neutral; Newton fills in the lateral spreading.
void seed_guess(const Problem& pr, const std::vector<double>& pc,
                double* phi) {
  const int nx = pr.g.nx, nz = pr.g.nz;
  const double d = pr.g.slab_rows * pr.g.h;
  for (int ix = 0; ix < nx; ++ix) {
    const double us = pr.dirichlet[ix] ? pr.dval[ix] : 0.0;
    const double p = pc[ix];
    for (int iz = 0; iz < nz; ++iz) {
      const std::size_t k = static_cast<std::size_t>(iz) * nx + ix;
      if (pr.dirichlet[k]) {
        phi[k] = pr.dval[k];
        continue;
      }
      if (us <= 0.0) {
        phi[k] = 0.0;
        continue;
      }
      const double z = iz * pr.g.h;
      if (p <= 0.0) {
        phi[k] = us;  // charge-free column under the contact
        continue;
      }
      const double qp_eps = phys::q_e * p / pr.eps;
      const double w = std::sqrt(2.0 * us / qp_eps);
      if (w <= d) {
        const double t = 1.0 - z / w;
        phi[k] = t > 0 ? us * t * t : 0.0;
      } else {
        // slab fully depleted; uniform field pocket below carries the rest
        phi[k] = us - qp_eps * (std::min(z, d) * d - 0.5 * std::min(z, d) *
                                std::min(z, d));
      }
    }
  }
}

std::uint64_t fnv64(const void* data, std::size_t len, std::uint64_t h) {
  const unsigned char* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

std::filesystem::path cache_path(const SolverParams& sp, const Grid2D& g,
                                 const MaterialParams& mat,
                                 const std::vector<double>& p_col, double u) {
  std::uint64_t h = 1469598103934665603ull;
  const char version[] = "fedmr-field-1";
  h = fnv64(version, sizeof(version), h);
  const double nums[] = {static_cast<double>(g.nx), static_cast<double>(g.nz),
                         static_cast<double>(g.slab_rows), g.h,     u,
                         mat.eps_s, mat.temperature, sp.cg_tol};
  h = fnv64(nums, sizeof(nums), h);
  h = fnv64(p_col.data(), p_col.size() * sizeof(double), h);
  char name[64];
  std::snprintf(name, sizeof(name), "fedmr-%016llx.field",
                static_cast<unsigned long long>(h));
  return std::filesystem::path(sp.cache_dir) / name;
}

bool load_cached_phi(const std::filesystem::path& path, std::size_t n,
                     std::vector<double>& phi) {
  std::ifstream f(path, std::ios::binary);
  if (!f) return false;
  char magic[8] = {};
  std::uint64_t count = 0;
  f.read(magic, 8);
  f.read(reinterpret_cast<char*>(&count), 8);
  if (!f || std::memcmp(magic, "FDMRFLD1", 8) != 0 || count != n) return false;
  phi.resize(n);
  f.read(reinterpret_cast<char*>(phi.data()), n * sizeof(double));
  return static_cast<bool>(f);
}

void store_cached_phi(const std::filesystem::path& path,
                      const std::vector<double>& phi) {
  std::error_code ec;
  std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) return;  // cache is best effort
  const std::uint64_t count = phi.size();
  f.write("FDMRFLD1", 8);
  f.write(reinterpret_cast<const char*>(&count), 8);
  f.write(reinterpret_cast<const char*>(phi.data()), count * sizeof(double));
}

void mirror_x(std::vector<double>& v, int nx, int nz, double sign) {
  for (int iz = 0; iz < nz; ++iz) {
    double* row = v.data() + static_cast<std::size_t>(iz) * nx;
    std::reverse(row, row + nx);
    if (sign < 0)
      for (int ix = 0; ix < nx; ++ix) row[ix] = -row[ix];
  }
}

// derivative along one axis: central inside, second-order one-sided at ends
double d_axis(const std::vector<double>& phi, std::size_t k, int stride,
              int idx, int count, double h) {
  if (idx == 0)
    return (-3 * phi[k] + 4 * phi[k + stride] - phi[k + 2 * stride]) / (2 * h);
  if (idx == count - 1)
    return (3 * phi[k] - 4 * phi[k - stride] + phi[k - 2 * stride]) / (2 * h);
  return (phi[k + stride] - phi[k - stride]) / (2 * h);
}

void finish_solution(const Problem& pr, const std::vector<double>& p_col,
                     const MaterialParams& mat, double threshold,
                     FieldSolution& sol) {
  const int nx = pr.g.nx, nz = pr.g.nz;
  const std::size_t n = sol.phi.size();
  sol.ex.resize(n);
  sol.ez.resize(n);
  sol.rho.resize(n);
  sol.depleted.assign(n, 0);
  const double vt = pr.vt;
  for (int iz = 0; iz < nz; ++iz) {
    for (int ix = 0; ix < nx; ++ix) {
      const std::size_t k = static_cast<std::size_t>(iz) * nx + ix;
      sol.ex[k] = -d_axis(sol.phi, k, 1, ix, nx, pr.g.h);
      sol.ez[k] = -d_axis(sol.phi, k, nx, iz, nz, pr.g.h);
      const bool in_slab = iz <= pr.g.slab_rows && p_col[ix] > 0;
      if (in_slab) {
        const double surv = boltz(sol.phi[k], vt);
        sol.rho[k] = -phys::q_e * p_col[ix] * (1.0 - surv);
        sol.depleted[k] = surv < threshold ? 1 : 0;
      } else {
        sol.rho[k] = 0.0;
      }
    }
  }

  // discrete Gauss law on the contour two cells inside the outer boundary:
  // conductance fluxes against the enclosed charge, an exact finite-volume
  // identity up to the solver tolerances
  const double eps = pr.eps;
  double flux = 0.0, flux_abs = 0.0, charge = 0.0, charge_abs = 0.0;
  auto phi_at = [&](int ix, int iz) {
    return sol.phi[static_cast<std::size_t>(iz) * nx + ix];
  };
  auto add_flux = [&](double f) {
    flux += f;
    flux_abs += std::fabs(f);
  };
  const int x0 = 2, x1 = nx - 3, z0 = 2, z1 = nz - 3;
  for (int iz = z0; iz <= z1; ++iz) {
    add_flux(eps * (phi_at(x0, iz) - phi_at(x0 - 1, iz)));
    add_flux(eps * (phi_at(x1, iz) - phi_at(x1 + 1, iz)));
  }
  for (int ix = x0; ix <= x1; ++ix) {
    add_flux(eps * (phi_at(ix, z0) - phi_at(ix, z0 - 1)));
    add_flux(eps * (phi_at(ix, z1) - phi_at(ix, z1 + 1)));
  }
  for (int iz = z0; iz <= z1; ++iz)
    for (int ix = x0; ix <= x1; ++ix) {
      const std::size_t k = static_cast<std::size_t>(iz) * nx + ix;
      const double c = eps * pr.charge_coef[k] *
                       (1.0 - boltz(sol.phi[k], vt));
      charge += c;
      charge_abs += std::fabs(c);
    }
  const double denom = std::max(charge_abs, flux_abs);
  sol.gauss_residual = denom > 0 ? std::fabs(flux + charge) / denom : 0.0;
}

}  // namespace

Grid2D make_grid(const DeviceGeometry& geom) {
  Grid2D g;
  g.h = geom.grid_h;
  g.nx = grid_index(geom.box_width(), g.h, "box width") + 1;
  g.nz = grid_index(geom.box_depth_eff(), g.h, "box depth") + 1;
  g.slab_rows = grid_index(geom.slab_depth(), g.h, "slab depth");
  if (g.slab_rows < 8)
    throw PreconditionError(
        "grid too coarse: fewer than 8 cells across the illuminated slab");
  if (g.slab_rows > g.nz - 1)
    throw PreconditionError("illuminated slab deeper than the box");
  return g;
}

double depletion_width_1d(double u, double p0, const MaterialParams& mat) {
  if (u < 0) throw PreconditionError("depletion width: negative bias");
  if (p0 <= 0) throw PreconditionError("depletion width: nonpositive density");
  return std::sqrt(2.0 * phys::eps_0 * mat.eps_s * u / (phys::q_e * p0));
}

FieldSolution solve_poisson(const DeviceGeometry& geom,
                            const MaterialParams& mat,
                            const SolverParams& solver,
                            const std::vector<double>& p_col, double u,
                            Electrode positive) {
  const Grid2D g = make_grid(geom);
  if (static_cast<int>(p_col.size()) != g.nx)
    throw PreconditionError("hole density map does not match the grid");
  for (double p : p_col)
    if (!(p >= 0)) throw PreconditionError("negative hole density in map");
  if (u < 0) throw PreconditionError("poisson: negative bias");

  // canonical orientation: positive electrode on the left; polarity B is the
  // exact mirror image, which makes the symmetry bit-for-bit
  std::vector<double> pc = p_col;
  if (positive == Electrode::B) std::reverse(pc.begin(), pc.end());

  Problem pr = assemble(g, geom, mat, pc, u);
  const Backend& be = kernels::active();
  const std::size_t n = pr.diag0.size();

  FieldSolution sol;
  sol.grid = g;
  sol.u_applied = u;
  sol.positive = positive;

  std::filesystem::path cpath;
  bool cached = false;
  if (!solver.cache_dir.empty()) {
    cpath = cache_path(solver, g, mat, pc, u);
    cached = load_cached_phi(cpath, n, sol.phi);
  }

  if (!cached) {
    PaddedField phi(g.nx, g.nz);
    seed_guess(pr, pc, phi.interior());

    long cg = 0;
    int iters = newton(pr, be, solver, phi, cg);
    if (iters < 0) {
      // voltage continuation: walk the bias up in quarters, reusing phi
      iters = 0;
      for (int step = 1; step <= 4; ++step) {
        Problem sub = assemble(g, geom, mat, pc, u * step / 4.0);
        if (step == 1)
          seed_guess(sub, pc, phi.interior());
        else
          for (std::size_t k = 0; k < n; ++k)
            if (sub.dirichlet[k]) phi.interior()[k] = sub.dval[k];
        const int it = newton(sub, be, solver, phi, cg);
        if (it < 0)
          throw ConvergenceError(
              "poisson: Newton stalled at continuation bias " +
              std::to_string(u * step / 4.0) + " V");
        iters += it;
      }
    }
    sol.newton_iters = iters;
    sol.cg_iters = cg;
    sol.phi.assign(phi.interior(), phi.interior() + n);
    if (!solver.cache_dir.empty()) store_cached_phi(cpath, sol.phi);
  }

  finish_solution(pr, pc, mat, solver.depletion_threshold, sol);

  if (positive == Electrode::B) {
    mirror_x(sol.phi, g.nx, g.nz, 1.0);
    mirror_x(sol.ex, g.nx, g.nz, -1.0);
    mirror_x(sol.ez, g.nx, g.nz, 1.0);
    mirror_x(sol.rho, g.nx, g.nz, 1.0);
    for (int iz = 0; iz < g.nz; ++iz) {
      unsigned char* row = sol.depleted.data() +
                           static_cast<std::size_t>(iz) * g.nx;
      std::reverse(row, row + g.nx);
    }
  }
  return sol;
}

namespace {

// sub-cell root of f(z) = target between grid nodes j and j+1 along a line of
// samples, using the parabola through three surrounding nodes
double crossing(const std::vector<double>& f, int j, int count, double h,
                double target) {
  const int c = std::clamp(j, 1, count - 2);
  const double fm = f[c - 1], f0 = f[c], fp = f[c + 1];
  const double a = 0.5 * (fp - 2 * f0 + fm);
  const double b = 0.5 * (fp - fm);
  // f(t) = a t^2 + b t + f0, t in cell units centered on node c
  const double lo = j - c, hi = j + 1 - c;
  double tl = lo, th = hi;
  double fl = a * tl * tl + b * tl + f0 - target;
  for (int it = 0; it < 60; ++it) {
    const double tm = 0.5 * (tl + th);
    const double fmid = a * tm * tm + b * tm + f0 - target;
    if ((fmid > 0) == (fl > 0)) {
      tl = tm;
      fl = fmid;
    } else {
      th = tm;
    }
  }
  return (c + 0.5 * (tl + th)) * h;
}

}  // namespace

DepletionMetrics extract_metrics(const FieldSolution& sol,
                                 const DeviceGeometry& geom,
                                 const MaterialParams& mat,
                                 const SolverParams& solver,
                                 const std::vector<double>& p_col) {
  const Grid2D& g = sol.grid;
  DepletionMetrics m;
  const bool pos_a = sol.positive == Electrode::A;
  const int e0 = grid_index(
      pos_a ? geom.electrode_a_x0() : geom.electrode_b_x0(), g.h, "electrode");
  const int e1 = grid_index(
      pos_a ? geom.electrode_a_x1() : geom.electrode_b_x1(), g.h, "electrode");
  const int ixc = (e0 + e1) / 2;
  const int inner = pos_a ? e1 : e0;  // edge facing the gap

  auto phi_at = [&](int ix, int iz) {
    return sol.phi[static_cast<std::size_t>(iz) * g.nx + ix];
  };
  auto mag = [&](int ix, int iz) {
    const std::size_t k = static_cast<std::size_t>(iz) * g.nx + ix;
    return std::hypot(sol.ex[k], sol.ez[k]);
  };
  m.e_center = mag(ixc, 0);
  m.e_edge = std::max(mag(e0, 0), mag(e1, 0));

  const double p0 = p_col[ixc];
  if (p0 <= 0) return m;  // nothing to deplete

  const double vt = phys::thermal_voltage(mat.temperature);
  const double phi_c = vt * std::log(1.0 / solver.depletion_threshold);
  // offset from the survival contour to the abrupt-model edge; the Boltzmann
  // tail shifts the contour inward by the same construction that defines it
  const double dv = std::sqrt(std::max(
      0.0, 2.0 * phys::eps_0 * mat.eps_s * (phi_c - vt) / (phys::q_e * p0)));
  const double d = g.slab_rows * g.h;

  // vertical extent under the electrode center
  if (phi_at(ixc, 0) > phi_c) {
    std::vector<double> col(g.slab_rows + 1);
    for (int iz = 0; iz <= g.slab_rows; ++iz) col[iz] = phi_at(ixc, iz);
    int j = -1;
    for (int iz = 1; iz <= g.slab_rows; ++iz)
      if (col[iz] < phi_c) {
        j = iz - 1;
        break;
      }
    if (j < 0)
      m.w_vertical = d;  // contour exits through the slab bottom
    else
      m.w_vertical = std::min(
          d, crossing(col, j, g.slab_rows + 1, g.h, phi_c) + dv);
  }

  // lateral reach along the slab-bottom row, past the inner electrode edge
  const int izb = g.slab_rows;
  if (phi_at(inner, izb) > phi_c) {
    const int dir = pos_a ? 1 : -1;
    const int limit = pos_a ? g.nx - 1 : 0;
    std::vector<double> row;
    for (int ix = inner; ix != limit; ix += dir)
      row.push_back(phi_at(ix, izb));
    row.push_back(phi_at(limit, izb));
    int j = -1;
    for (std::size_t i = 1; i < row.size(); ++i)
      if (row[i] < phi_c) {
        j = static_cast<int>(i) - 1;
        break;
      }
    if (j < 0)
      m.l_lateral = (row.size() - 1) * g.h;
    else
      m.l_lateral =
          crossing(row, j, static_cast<int>(row.size()), g.h, phi_c) + dv;
  }

  if (m.w_vertical >= d * (1.0 - 1e-9))
    m.stage = m.l_lateral > g.h ? 3 : 2;
  return m;
}

PlProfile delta_pl_profile(const FieldSolution& on, const FieldSolution& off,
                           const DeviceGeometry& geom, PlFilter filter,
                           double alpha) {
  if (on.grid.nx != off.grid.nx || on.grid.nz != off.grid.nz)
    throw PreconditionError("delta PL: solutions on different grids");
  const Grid2D& g = on.grid;
  const int band = std::min(5, g.slab_rows);
  std::vector<double> val(g.nx, 0.0);
  for (int ix = 0; ix < g.nx; ++ix) {
    double s = 0.0;
    for (int iz = 0; iz < band; ++iz) {
      const std::size_t k = static_cast<std::size_t>(iz) * g.nx + ix;
      s += static_cast<double>(on.depleted[k]) -
           static_cast<double>(off.depleted[k]);
    }
    val[ix] = s / band;
  }

  const bool pos_a = on.positive == Electrode::A;
  const int e0 = grid_index(
      pos_a ? geom.electrode_a_x0() : geom.electrode_b_x0(), g.h, "electrode");
  const int e1 = grid_index(
      pos_a ? geom.electrode_a_x1() : geom.electrode_b_x1(), g.h, "electrode");
  const double mid = val[(e0 + e1) / 2];
  const double sign = filter == PlFilter::nv_minus ? 1.0 : -alpha;

  PlProfile prof;
  prof.x.resize(g.nx);
  prof.dpl.resize(g.nx);
  const double outer = pos_a ? geom.electrode_a_x0() : geom.electrode_b_x1();
  for (int j = 0; j < g.nx; ++j) {
    const int ix = pos_a ? j : g.nx - 1 - j;
    prof.x[j] = pos_a ? ix * g.h - outer : outer - ix * g.h;
    prof.dpl[j] = mid != 0.0 ? sign * val[ix] / mid : 0.0;
  }
  return prof;
}

}  // namespace fedmr
