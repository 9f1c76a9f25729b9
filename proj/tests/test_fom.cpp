#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>

#include "dtwin/errors.hpp"
#include "dtwin/fom.hpp"
#include "dtwin/metrics.hpp"
#include "oracles.hpp"

using namespace dtwin;
using namespace dtwin::fom;

namespace {

Case benchmark_case() {
  Case c;
  c.material = oracle::benchmark_material();
  c.boundary.oven_vapor_density = Forcing::fixed(0.1);
  c.t_end = 600.0;
  return c;
}

// Uniform state in equilibrium with an oven at the same temperature and
// vapor density.
struct Equilibrium {
  Grid1D grid = Grid1D::uniform(0.01, 12);
  FoodMaterial m = oracle::benchmark_material();
  BoundarySpec bc;
  FieldState state;

  explicit Equilibrium(double T = 350.0) {
    const double cw = 375.0;
    const double rho = material::equilibrium_vapor_density(T, cw, m);
    LocalState s{T, 101325.0, rho * 0.5 * m.porosity, cw};
    state.cells.assign(grid.size(), s);
    bc.oven_temperature = Forcing::fixed(T);
    bc.oven_vapor_density = Forcing::fixed(rho);
  }
};

double max_rel_change(const FieldState& a, const FieldState& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.cells.size(); ++i) {
    const auto &x = a.cells[i], &y = b.cells[i];
    d = std::max({d, std::abs(x.temperature - y.temperature) / x.temperature,
                  std::abs(x.pressure - y.pressure) / x.pressure,
                  std::abs(x.vapor_conc - y.vapor_conc) / std::max(x.vapor_conc, 1e-12),
                  std::abs(x.water_conc - y.water_conc) / std::max(x.water_conc, 1e-12)});
  }
  return d;
}

}  // namespace

TEST_CASE("grids") {
  const auto g = Grid1D::uniform(0.01, 4);
  CHECK(g.size() == 4);
  CHECK(g.centers()[0] == doctest::Approx(0.00125));
  CHECK(g.length() == doctest::Approx(0.01));
  const auto gr = Grid1D::graded(0.01, 5, 1.2);
  CHECK(gr.widths()[1] == doctest::Approx(1.2 * gr.widths()[0]));
  CHECK(gr.length() == doctest::Approx(0.01));
  CHECK_THROWS_AS(Grid1D::uniform(0.01, 1), DomainError);
  CHECK_THROWS_AS(Grid1D(std::vector<double>{0.0, 0.5, 0.4}), DomainError);
}

TEST_CASE("initial vapor is converted from mol/m^3 with the vapor molar mass") {
  const auto g = Grid1D::uniform(0.01, 5);
  const auto s = uniform_state(g, oracle::benchmark_material(), InitialCondition{});
  CHECK(s.cells[0].vapor_conc == doctest::Approx(0.17 * 0.018015));
  CHECK(s.cells[0].water_conc == doctest::Approx(375.0));
  InitialCondition bad;
  bad.water_saturation = 1.5;
  CHECK_THROWS_AS(uniform_state(g, oracle::benchmark_material(), bad), DomainError);
}

TEST_CASE("total moisture") {
  const auto g = Grid1D::uniform(0.01, 7);
  FieldState s;
  s.cells.assign(7, LocalState{300.0, 101325.0, 0.0, 375.0});
  CHECK(total_moisture(s, g) == doctest::Approx(3.75));
  for (auto& c : s.cells) c.vapor_conc = 0.1;
  CHECK(total_moisture(s, g) == doctest::Approx(3.751));
  const double full = total_moisture(s, g);
  for (auto& c : s.cells) c.water_conc *= 0.5;
  CHECK(total_moisture(s, g) == doctest::Approx(0.5 * (full - 0.001) + 0.001));
  for (auto& c : s.cells) c.water_conc = c.vapor_conc = 0.0;
  CHECK(total_moisture(s, g) == 0.0);
  s.cells.pop_back();
  CHECK_THROWS_AS(total_moisture(s, g), DomainError);
}

TEST_CASE("interior fluxes") {
  const auto m = oracle::benchmark_material();
  const auto g = Grid1D::uniform(0.01, 10);
  FieldState s;
  s.cells.assign(10, LocalState{300.0, 101325.0, 0.01, 375.0});

  SUBCASE("uniform state carries no flux") {
    const auto f = interior_fluxes(s, g, m);
    for (std::size_t k = 0; k <= 10; ++k) {
      CHECK(f.gas[k] == 0.0);
      CHECK(f.vapor[k] == 0.0);
      CHECK(f.water[k] == 0.0);
      CHECK(f.heat[k] == 0.0);
    }
  }
  SUBCASE("conduction follows Fourier's law") {
    for (std::size_t i = 0; i < 10; ++i) s.cells[i].temperature = 300.0 + 10.0 * static_cast<double>(i);
    const auto f = interior_fluxes(s, g, m);
    const double k = material::effective_properties(s.cells[0], m).conductivity;
    for (std::size_t face = 1; face < 10; ++face) CHECK(f.heat[face] == doctest::Approx(-k * 10.0 / 0.001));
  }
  SUBCASE("gas flows down the pressure gradient") {
    s.cells[4].pressure = 101400.0;
    const auto f = interior_fluxes(s, g, m);
    CHECK(f.gas[4] < 0.0);
    CHECK(f.gas[5] > 0.0);
    CHECK(f.water[4] < 0.0);
    CHECK(f.water[5] > 0.0);
  }
  SUBCASE("capillary flow runs from wet to dry") {
    s.cells[4].water_conc = 400.0;
    const auto f = interior_fluxes(s, g, m);
    CHECK(f.water[4] < 0.0);
    CHECK(f.water[5] > 0.0);
  }
  SUBCASE("non-finite state is a numerical failure naming the cell") {
    s.cells[3].temperature = std::nan("");
    CHECK_THROWS_AS(interior_fluxes(s, g, m), NumericalFailure);
  }
}

TEST_CASE("boundary fluxes") {
  const auto m = oracle::benchmark_material();
  BoundarySpec bc;
  bc.oven_vapor_density = Forcing::fixed(0.0);

  SUBCASE("half-saturated surface") {
    const LocalState s{400.0, 101325.0, 0.2 * 0.5 * 0.75, 375.0};
    const auto b = boundary_fluxes(s, bc, 0.0, m);
    CHECK(b.vapor == doctest::Approx(7.5e-4));
    CHECK(b.water == doctest::Approx(7.5e-4));
  }
  SUBCASE("vapor in equilibrium with the oven air exchanges heat only") {
    bc.oven_vapor_density = Forcing::fixed(0.2);
    const LocalState s{400.0, 101325.0, 0.2 * 0.5 * 0.75, 375.0};
    const auto b = boundary_fluxes(s, bc, 0.0, m);
    CHECK(b.vapor == doctest::Approx(0.0).scale(1e-12));
    CHECK(b.water == doctest::Approx(0.0).scale(1e-12));
    CHECK(b.heat_in == doctest::Approx(20.0 * 50.15));
  }
  SUBCASE("dry surface loses vapor only") {
    const LocalState s{400.0, 101325.0, 0.1 * 0.75, 0.0};
    const auto b = boundary_fluxes(s, bc, 0.0, m);
    CHECK(b.vapor == doctest::Approx(7.5e-4));
    CHECK(b.water == 0.0);
    CHECK(b.pressure == 101325.0);
    CHECK(b.heat_in == doctest::Approx(20.0 * 50.15));
  }
  SUBCASE("wet surface splits the exchange by saturation and pays latent heat") {
    const LocalState s{400.0, 101325.0, 0.1 * 0.75 * 0.5, 375.0};
    const auto b = boundary_fluxes(s, bc, 0.0, m);
    CHECK(b.vapor == doctest::Approx(3.75e-4));
    CHECK(b.water == doctest::Approx(3.75e-4));
    CHECK(b.heat_in == doctest::Approx(20.0 * 50.15 - 2.26e6 * 3.75e-4));
  }
  SUBCASE("zero transfer coefficients insulate the surface") {
    bc.heat_transfer = 0.0;
    bc.mass_transfer = 0.0;
    const LocalState s{300.0, 101325.0, 0.05, 375.0};
    const auto b = boundary_fluxes(s, bc, 0.0, m);
    CHECK(b.vapor == 0.0);
    CHECK(b.water == 0.0);
    CHECK(b.heat_in == 0.0);
  }
  SUBCASE("surface balance with a finite conductance") {
    const LocalState s{300.0, 101325.0, 0.0, 0.0};
    const double K = 20.0;
    const auto b = boundary_fluxes(s, bc, 0.0, m, K);
    CHECK(b.surface_temperature == doctest::Approx(0.5 * (300.0 + 450.15)));
    CHECK(b.heat_in == doctest::Approx(K * (b.surface_temperature - 300.0)));
  }
  SUBCASE("time-varying oven") {
    bc.oven_temperature = Forcing::of(Signal::uniform(0.0, 10.0, {300.0, 400.0}));
    const LocalState s{300.0, 101325.0, 0.0, 0.0};
    CHECK(boundary_fluxes(s, bc, 5.0, m).heat_in == doctest::Approx(20.0 * 50.0));
    CHECK(boundary_fluxes(s, bc, 50.0, m).heat_in == doctest::Approx(20.0 * 100.0));
  }
}

TEST_CASE("an equilibrium state is stationary") {
  Equilibrium eq;
  SolveConfig cfg;
  const auto next = step(eq.state, 5.0, eq.grid, eq.bc, eq.m, cfg);
  CHECK(max_rel_change(eq.state, next) < 1e-7);
  CHECK(next.time == doctest::Approx(5.0));
}

TEST_CASE("an insulated conduction slab keeps its temperature") {
  const auto m = oracle::conduction_material();
  const auto g = Grid1D::uniform(0.01, 10);
  BoundarySpec bc;
  bc.heat_transfer = 0.0;
  bc.mass_transfer = 0.0;
  FieldState s;
  s.cells.assign(10, LocalState{320.0, 101325.0, 0.0, 375.0});
  const auto next = step(s, 5.0, g, bc, m, SolveConfig{});
  CHECK(max_rel_change(s, next) < 1e-10);
}

TEST_CASE("implicit steps agree with an explicit reference and converge to it") {
  const auto m = oracle::benchmark_material();
  const std::size_t n = 10;
  const auto g = Grid1D::uniform(0.01, n);
  BoundarySpec bc;
  bc.oven_vapor_density = Forcing::fixed(0.0);
  const auto init = uniform_state(g, m, InitialCondition{});

  std::vector<oracle::ExplicitFom::Cell> e0;
  for (const auto& c : init.cells) e0.push_back({c.temperature, c.pressure, c.vapor_conc, c.water_conc});
  const oracle::ExplicitFom ref(m, 0.01, n, 20.0, 0.01, 101325.0, 450.15, 0.0);
  const auto e = ref.advance(e0, 1.0, 1e-5);

  // Largest deviation of each field's change over 1 s, relative to the
  // largest change of that field.
  auto deviation = [&](double h) {
    SolveConfig cfg;
    cfg.adaptive = false;
    cfg.dt_min = h / 10.0;
    FieldState s = init;
    for (long k = 0; k < std::lround(1.0 / h); ++k) s = step(s, h, g, bc, m, cfg);
    std::array<double, 4> dev{}, span{};
    for (std::size_t i = 0; i < n; ++i) {
      const auto& c = s.cells[i];
      const auto& z = init.cells[i];
      const std::array<double, 4> mine{c.temperature - z.temperature, c.pressure - z.pressure,
                                       c.vapor_conc - z.vapor_conc, c.water_conc - z.water_conc};
      const std::array<double, 4> theirs{e[i].T - z.temperature, e[i].p - z.pressure, e[i].cv - z.vapor_conc,
                                         e[i].cw - z.water_conc};
      for (int f = 0; f < 4; ++f) {
        dev[f] = std::max(dev[f], std::abs(mine[f] - theirs[f]));
        span[f] = std::max(span[f], std::abs(theirs[f]));
      }
    }
    for (int f = 0; f < 4; ++f) dev[f] /= span[f];
    return std::pair{dev, s};
  };

  const auto [coarse, s] = deviation(0.01);
  const auto [fine, unused] = deviation(0.002);
  for (int f = 0; f < 4; ++f) {
    CAPTURE(f);
    CHECK(coarse[f] < 0.02);
    CHECK(fine[f] < coarse[f]);
  }
  CHECK(s.cells[0].temperature > init.cells[0].temperature);
  CHECK(s.cells[0].water_conc < init.cells[0].water_conc);
}

TEST_CASE("one second in a dry oven heats and dries the surface") {
  const auto m = oracle::benchmark_material();
  const auto g = Grid1D::uniform(0.01, 10);
  BoundarySpec bc;  // dry oven
  const auto init = uniform_state(g, m, InitialCondition{});
  const auto next = step(init, 1.0, g, bc, m, SolveConfig{});
  CHECK(next.cells[0].temperature > init.cells[0].temperature);
  CHECK(next.cells[0].water_conc < init.cells[0].water_conc);
}

TEST_CASE("maximum principle for pure conduction") {
  Case c;
  c.material = oracle::conduction_material();
  c.boundary.mass_transfer = 0.0;
  c.cells = 20;
  c.t_end = 3000.0;
  const auto traj = c.run();
  double lo = 1e300, hi = -1e300;
  for (const auto& f : traj.fields)
    for (const auto& s : f.cells) {
      lo = std::min(lo, s.temperature);
      hi = std::max(hi, s.temperature);
    }
  CHECK(lo >= 293.15 - 1e-9);
  CHECK(hi <= 450.15 + 1e-9);
  CHECK(traj.max_temperature <= 450.15 + 1e-9);
  for (std::size_t k = 1; k < traj.probes.size(); ++k)
    CHECK(traj.probes[k].core_temperature >= traj.probes[k - 1].core_temperature - 1e-9);
}

TEST_CASE("benchmark run: invariants along the trajectory") {
  auto c = benchmark_case();
  const auto traj = c.run();
  REQUIRE(traj.probes.size() == 601);
  const double cmax = c.material.max_water_concentration();

  CHECK(traj.probes.front().moisture == doctest::Approx(3.75 + 0.01 * 0.17 * 0.018015));
  const double drift = traj.initial_moisture - traj.final_moisture - traj.cumulative_outflow;
  CHECK(std::abs(drift) <= 1e-9 * traj.initial_moisture);

  for (const auto& p : traj.probes) {
    CHECK(p.surface_pressure == 101325.0);
    CHECK(p.core_temperature <= 450.15);
    CHECK(p.surface_temperature <= 450.15);
  }
  CHECK(traj.max_temperature < 450.15);
  for (const auto& f : traj.fields)
    for (const auto& s : f.cells) {
      const auto sat = material::saturations(s.water_conc, c.material);
      CHECK(std::abs(sat.water + sat.gas - 1.0) <= 1e-12);
      CHECK(s.water_conc >= 0.0);
      CHECK(s.water_conc <= cmax);
      CHECK(s.vapor_conc >= 0.0);
      CHECK(s.pressure > 0.0);
    }
  const auto& last = traj.probes.back();
  CHECK(last.surface_temperature > last.core_temperature);
  CHECK(last.core_temperature > 293.15);
  CHECK(last.mass_loss > 0.0);
}

TEST_CASE("runs are bitwise reproducible") {
  auto c = benchmark_case();
  c.t_end = 200.0;
  const auto a = c.run(), b = c.run();
  REQUIRE(a.probes.size() == b.probes.size());
  for (std::size_t k = 0; k < a.probes.size(); ++k) {
    CHECK(a.probes[k].core_temperature == b.probes[k].core_temperature);
    CHECK(a.probes[k].surface_temperature == b.probes[k].surface_temperature);
    CHECK(a.probes[k].moisture == b.probes[k].moisture);
  }
  CHECK(a.stats.accepted_steps == b.stats.accepted_steps);
}

TEST_CASE("core temperature converges at second order to the conduction solution") {
  const auto m = oracle::conduction_material();
  const double phi = 0.75, sw = 0.5;
  const double k = 0.21 * (1 - phi) + 0.59 * sw * phi + 0.026 * (1 - sw) * phi;
  const double rhoc = 1528.0 * (1 - phi) * 1650.0 + 1000.0 * sw * phi * 4180.0;
  const oracle::RobinSlab exact(0.01, k, rhoc, 20.0, 450.15, 293.15);

  auto run = [&](std::size_t n, double dt) {
    Case c;
    c.material = m;
    c.boundary.mass_transfer = 0.0;
    c.cells = n;
    c.t_end = 300.0;
    c.solver.adaptive = false;
    c.solver.dt_init = dt;
    c.solver.dt_min = dt / 100.0;
    c.solver.output_interval = 10.0;
    c.solver.record_fields = false;
    return c.run();
  };
  std::vector<double> err;
  for (std::size_t n : {10, 20, 40, 80}) {
    // Richardson extrapolation in time removes the first-order time error
    // so the spatial order is visible.
    const auto a = run(n, 0.4), b = run(n, 0.2);
    double e = 0.0;
    for (std::size_t s = 1; s < a.probes.size(); ++s) {
      const double t = a.probes[s].time;
      const double T = 2.0 * b.probes[s].core_temperature - a.probes[s].core_temperature;
      e = std::max(e, std::abs(T - exact(0.01, t)));
    }
    err.push_back(e);
  }
  for (std::size_t i = 0; i + 1 < err.size(); ++i) {
    const double order = std::log2(err[i] / err[i + 1]);
    CAPTURE(i);
    CAPTURE(err[i]);
    CHECK(order >= 1.8);
  }
  CHECK(err.back() < 2e-3);
}

TEST_CASE("grid convergence study") {
  SUBCASE("equilibrium case has zero deviation") {
    Equilibrium eq;
    Case c;
    c.material = eq.m;
    c.boundary = eq.bc;
    c.initial.temperature = 350.0;
    c.initial.water_saturation = 0.5;
    c.initial.vapor_mol_per_m3 = eq.state.cells[0].vapor_conc / eq.m.vapor.molar_mass;
    c.t_end = 50.0;
    c.solver.output_interval = 10.0;
    const auto r = grid_convergence(c, {5, 10, 20});
    for (double v : r.mape_vs_finest) CHECK(v < 1e-7);
    CHECK(r.conclusive);
    CHECK(std::isnan(r.observed_order));
  }
  SUBCASE("benchmark shows decreasing differences") {
    auto c = benchmark_case();
    c.t_end = 300.0;
    c.solver.output_interval = 10.0;
    const auto r = grid_convergence(c, {10, 20, 40});
    REQUIRE(r.rms_difference.size() == 2);
    CHECK(r.rms_difference[1] < r.rms_difference[0]);
    CHECK(r.mape_vs_finest.back() == 0.0);
  }
  SUBCASE("resolutions are validated") {
    auto c = benchmark_case();
    CHECK_THROWS_AS(grid_convergence(c, {10, 20}), DomainError);
    CHECK_THROWS_AS(grid_convergence(c, {10, 20, 30}), DomainError);
  }
}

TEST_CASE("solver gives up with a SolverFailure carrying the time") {
  Case c = benchmark_case();
  c.solver.adaptive = false;
  c.solver.newton_max_iterations = 1;
  c.solver.dt_init = 5.0;
  c.solver.dt_min = 5.0;
  c.solver.dt_max = 5.0;
  try {
    c.run();
    FAIL("expected SolverFailure");
  } catch (const SolverFailure& e) {
    CHECK(e.time() >= 0.0);
    CHECK(e.residual() > 0.0);
  }
}

TEST_CASE("invalid configurations are rejected") {
  SolveConfig cfg;
  cfg.dt_min = 10.0;
  CHECK_THROWS_AS(cfg.validate(), DomainError);
  BoundarySpec bc;
  bc.heat_transfer = -1.0;
  CHECK_THROWS_AS(bc.validate(), DomainError);
  Case c = benchmark_case();
  c.t_end = 0.0;
  CHECK_THROWS_AS(c.run(), DomainError);
}
