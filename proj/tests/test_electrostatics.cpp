#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <vector>

#include "fedmr/config.hpp"
#include "fedmr/constants.hpp"
#include "fedmr/electrostatics.hpp"

using namespace fedmr;

namespace {

const double kP0 = 3.5e20;  // m^-3, the paper-calibrated quasi-neutral density

std::vector<double> uniform_map(const DeviceGeometry& geom, double p) {
  return std::vector<double>(make_grid(geom).nx, p);
}

FieldSolution solve_default(double u, Electrode pos = Electrode::A,
                            double p = kP0) {
  DeviceGeometry geom;
  MaterialParams mat;
  SolverParams solver;
  return solve_poisson(geom, mat, solver, uniform_map(geom, p), u, pos);
}

DepletionMetrics metrics_of(const FieldSolution& sol, double p = kP0) {
  DeviceGeometry geom;
  MaterialParams mat;
  SolverParams solver;
  return extract_metrics(sol, geom, mat, solver, uniform_map(geom, p));
}

}  // namespace

TEST_CASE("abrupt-junction width matches the hand-evaluated closed form") {
  MaterialParams mat;
  // sqrt(2 * 8.8541878128e-12 * 5.7 * 50 / (1.602176634e-19 * 3.5e20))
  CHECK(depletion_width_1d(50.0, kP0, mat) ==
        doctest::Approx(9.4879e-6).epsilon(1e-3));
  CHECK(depletion_width_1d(0.0, kP0, mat) == 0.0);
  // quadrupling the bias doubles the width
  CHECK(depletion_width_1d(120.0, kP0, mat) ==
        doctest::Approx(2.0 * depletion_width_1d(30.0, kP0, mat))
            .epsilon(1e-12));
  CHECK_THROWS_AS(depletion_width_1d(-1.0, kP0, mat), PreconditionError);
  CHECK_THROWS_AS(depletion_width_1d(10.0, 0.0, mat), PreconditionError);
}

TEST_CASE("zero bias yields the trivial solution") {
  FieldSolution sol = solve_default(0.0);
  for (double v : sol.phi) CHECK(v == 0.0);
  for (double e : sol.ex) CHECK(e == 0.0);
  for (unsigned char dep : sol.depleted) CHECK(dep == 0);
  CHECK(sol.gauss_residual == 0.0);
  DepletionMetrics m = metrics_of(sol);
  CHECK(m.w_vertical == 0.0);
  CHECK(m.l_lateral == 0.0);
  CHECK(m.stage == 1);
}

TEST_CASE("vertical depletion tracks the 1D oracle well below the knee") {
  for (double u : {10.0, 20.0, 30.0}) {
    FieldSolution sol = solve_default(u);
    DepletionMetrics m = metrics_of(sol);
    const double w1d = depletion_width_1d(u, kP0, MaterialParams{});
    CHECK(std::fabs(m.w_vertical - w1d) / w1d < 0.10);
    CHECK(m.stage == 1);
    CHECK(sol.gauss_residual < 1e-6);
  }
}

TEST_CASE("Dirichlet electrode rows carry the applied potentials exactly") {
  DeviceGeometry geom;
  const Grid2D g = make_grid(geom);
  FieldSolution sol = solve_default(75.0);
  const int ia0 = 0;
  const int ia1 = static_cast<int>(std::lround(geom.electrode_a_x1() / g.h));
  const int ib0 = static_cast<int>(std::lround(geom.electrode_b_x0() / g.h));
  for (int ix = ia0; ix <= ia1; ++ix)
    CHECK(sol.phi[ix] == doctest::Approx(75.0).epsilon(1e-12));
  for (int ix = ib0; ix < g.nx; ++ix) CHECK(sol.phi[ix] == 0.0);
}

TEST_CASE("stages advance monotonically and the contact field saturates") {
  FieldSolution s30 = solve_default(30.0);
  FieldSolution s70 = solve_default(70.0);
  FieldSolution s100 = solve_default(100.0);
  FieldSolution s150 = solve_default(150.0);
  DepletionMetrics m30 = metrics_of(s30);
  DepletionMetrics m70 = metrics_of(s70);
  DepletionMetrics m100 = metrics_of(s100);
  DepletionMetrics m150 = metrics_of(s150);

  CHECK(m30.stage == 1);
  CHECK(m70.stage >= 2);
  CHECK(m100.stage == 3);
  CHECK(m150.stage == 3);
  CHECK(m100.l_lateral > 0.0);
  CHECK(m150.l_lateral > m100.l_lateral);

  // past the knee the center field pins at q*p0*d/eps while the edge grows
  const double d = DeviceGeometry{}.slab_depth();
  const double e_sat = phys::q_e * kP0 * d / (phys::eps_0 * 5.7);
  CHECK(std::fabs(m100.e_center - e_sat) / e_sat < 0.05);
  CHECK(std::fabs(m150.e_center - m100.e_center) / m100.e_center < 0.02);
  CHECK(m150.e_edge > m100.e_edge);
  CHECK(m100.e_center <= m150.e_center);  // monotone non-decreasing
}

TEST_CASE("halving the grid step moves the metrics by well under two percent") {
  DeviceGeometry coarse;
  DeviceGeometry fine;
  fine.grid_h = coarse.grid_h / 2.0;
  MaterialParams mat;
  SolverParams solver;
  FieldSolution sc = solve_poisson(coarse, mat, solver,
                                   uniform_map(coarse, kP0), 100.0,
                                   Electrode::A);
  FieldSolution sf = solve_poisson(fine, mat, solver, uniform_map(fine, kP0),
                                   100.0, Electrode::A);
  DepletionMetrics mc = extract_metrics(sc, coarse, mat, solver,
                                        uniform_map(coarse, kP0));
  DepletionMetrics mf = extract_metrics(sf, fine, mat, solver,
                                        uniform_map(fine, kP0));
  CHECK(std::fabs(mf.w_vertical - mc.w_vertical) / mc.w_vertical < 0.02);
  CHECK(std::fabs(mf.e_center - mc.e_center) / mc.e_center < 0.02);
}

TEST_CASE("swapping polarity mirrors the solution bit for bit") {
  FieldSolution a = solve_default(90.0, Electrode::A);
  FieldSolution b = solve_default(90.0, Electrode::B);
  const Grid2D& g = a.grid;
  for (int iz = 0; iz < g.nz; ++iz)
    for (int ix = 0; ix < g.nx; ++ix) {
      const std::size_t k = static_cast<std::size_t>(iz) * g.nx + ix;
      const std::size_t km = static_cast<std::size_t>(iz) * g.nx +
                             (g.nx - 1 - ix);
      CHECK(a.phi[k] == b.phi[km]);
      CHECK(a.ex[k] == -b.ex[km]);
      CHECK(a.ez[k] == b.ez[km]);
      CHECK(a.depleted[k] == b.depleted[km]);
    }
  // metrics follow the positive electrode to the mirrored side
  DepletionMetrics ma = metrics_of(a);
  DepletionMetrics mb = metrics_of(b);
  CHECK(ma.w_vertical == mb.w_vertical);
  CHECK(ma.l_lateral == mb.l_lateral);
  CHECK(ma.e_center == mb.e_center);
}

TEST_CASE("gauss law holds on every converged solution") {
  for (double u : {15.0, 55.0, 125.0}) {
    FieldSolution sol = solve_default(u);
    CHECK(sol.gauss_residual < 1e-6);
  }
}

TEST_CASE("a dark column map solves as pure dielectric") {
  DeviceGeometry geom;
  MaterialParams mat;
  SolverParams solver;
  std::vector<double> dark(make_grid(geom).nx, 0.0);
  FieldSolution sol = solve_poisson(geom, mat, solver, dark, 100.0,
                                    Electrode::A);
  for (unsigned char dep : sol.depleted) CHECK(dep == 0);
  for (double r : sol.rho) CHECK(r == 0.0);
  DepletionMetrics m = extract_metrics(sol, geom, mat, solver, dark);
  CHECK(m.w_vertical == 0.0);
  CHECK(m.e_center > 0.0);
  CHECK(sol.gauss_residual < 1e-6);
}

TEST_CASE("malformed inputs are rejected up front") {
  DeviceGeometry geom;
  MaterialParams mat;
  SolverParams solver;
  std::vector<double> p = uniform_map(geom, kP0);

  std::vector<double> short_map(p.begin(), p.end() - 1);
  CHECK_THROWS_AS(
      solve_poisson(geom, mat, solver, short_map, 10.0, Electrode::A),
      PreconditionError);

  std::vector<double> negative = p;
  negative[5] = -1.0;
  CHECK_THROWS_AS(
      solve_poisson(geom, mat, solver, negative, 10.0, Electrode::A),
      PreconditionError);

  CHECK_THROWS_AS(solve_poisson(geom, mat, solver, p, -5.0, Electrode::A),
                  PreconditionError);

  DeviceGeometry coarse;
  coarse.grid_h = 2e-6;  // five cells across the slab
  CHECK_THROWS_AS(make_grid(coarse), PreconditionError);

  DeviceGeometry shallow;
  shallow.box_depth = 4e-6;  // explicit box above the slab bottom
  CHECK_THROWS_AS(make_grid(shallow), PreconditionError);
}

TEST_CASE("field cache round trips and reruns bit identically") {
  namespace fs = std::filesystem;
  DeviceGeometry geom;
  MaterialParams mat;
  SolverParams solver;
  solver.cache_dir = (fs::temp_directory_path() / "fedmr-cache-test").string();
  fs::remove_all(solver.cache_dir);
  std::vector<double> p = uniform_map(geom, kP0);

  FieldSolution first = solve_poisson(geom, mat, solver, p, 80.0,
                                      Electrode::A);
  CHECK(first.newton_iters > 0);
  CHECK(!fs::is_empty(solver.cache_dir));

  FieldSolution second = solve_poisson(geom, mat, solver, p, 80.0,
                                       Electrode::A);
  CHECK(second.newton_iters == 0);  // served from the cache
  REQUIRE(second.phi.size() == first.phi.size());
  for (std::size_t k = 0; k < first.phi.size(); ++k)
    CHECK(second.phi[k] == first.phi[k]);

  // a different bias must not collide
  FieldSolution other = solve_poisson(geom, mat, solver, p, 81.0,
                                      Electrode::A);
  CHECK(other.newton_iters > 0);
  fs::remove_all(solver.cache_dir);
}

TEST_CASE("delta PL profile normalizes at the electrode midpoint") {
  DeviceGeometry geom;
  FieldSolution on = solve_default(150.0);
  FieldSolution off = solve_default(0.0);

  PlProfile minus = delta_pl_profile(on, off, geom, PlFilter::nv_minus, 0.7);
  PlProfile zero = delta_pl_profile(on, off, geom, PlFilter::nv_zero, 0.7);
  REQUIRE(minus.x.size() == static_cast<std::size_t>(on.grid.nx));

  // x runs from the positive electrode's outer edge; midpoint at 25 um
  const int imid = 50;  // 25 um / 0.5 um
  CHECK(minus.x[0] == 0.0);
  CHECK(minus.x[imid] == doctest::Approx(25e-6).epsilon(1e-12));
  CHECK(minus.dpl[imid] == doctest::Approx(1.0).epsilon(1e-12));

  // the NV0 filter view is the same profile scaled by -alpha
  for (std::size_t j = 0; j < minus.dpl.size(); ++j)
    CHECK(zero.dpl[j] == doctest::Approx(-0.7 * minus.dpl[j]).epsilon(1e-12));

  // far side of the gap is undepleted: no PL change there
  CHECK(minus.dpl[on.grid.nx - 1] == 0.0);

  // identical solutions give an identically zero profile
  PlProfile flat = delta_pl_profile(off, off, geom, PlFilter::nv_minus, 0.7);
  for (double v : flat.dpl) CHECK(v == 0.0);
}

TEST_CASE("polarity B reports the profile from its own outer edge") {
  DeviceGeometry geom;
  FieldSolution on_b = solve_default(150.0, Electrode::B);
  FieldSolution off_b = solve_default(0.0, Electrode::B);
  FieldSolution on_a = solve_default(150.0, Electrode::A);
  FieldSolution off_a = solve_default(0.0, Electrode::A);

  PlProfile pb = delta_pl_profile(on_b, off_b, geom, PlFilter::nv_minus, 0.7);
  PlProfile pa = delta_pl_profile(on_a, off_a, geom, PlFilter::nv_minus, 0.7);
  REQUIRE(pb.x.size() == pa.x.size());
  for (std::size_t j = 0; j < pa.x.size(); ++j) {
    CHECK(pb.x[j] == doctest::Approx(pa.x[j]).epsilon(1e-12));
    CHECK(pb.dpl[j] == pa.dpl[j]);
  }
}
