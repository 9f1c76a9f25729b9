#include <cmath>
#include <limits>

#include "dtwin/errors.hpp"
#include "dtwin/fom.hpp"
#include "dtwin/metrics.hpp"

namespace dtwin::fom {

Trajectory Case::run() const {
  const auto g = grid();
  Solver s(g, material, boundary, solver);
  return s.simulate(uniform_state(g, material, initial), t_end);
}

ConvergenceReport grid_convergence(const Case& c, const std::vector<std::size_t>& resolutions) {
  if (resolutions.size() < 3) throw DomainError("grid convergence needs at least 3 resolutions");
  const double ratio = static_cast<double>(resolutions[1]) / static_cast<double>(resolutions[0]);
  if (!(ratio > 1.0)) throw DomainError("resolutions must increase");
  for (std::size_t k = 1; k < resolutions.size(); ++k) {
    const double rk = static_cast<double>(resolutions[k]) / static_cast<double>(resolutions[k - 1]);
    if (std::abs(rk - ratio) > 1e-9 * ratio)
      throw DomainError("resolutions must form a geometric progression");
  }

  ConvergenceReport rep;
  rep.resolutions = resolutions;
  SolveConfig cfg = c.solver;
  cfg.record_fields = false;
  for (std::size_t n : resolutions) {
    const auto grid = Grid1D::uniform(c.length, n);
    Solver solver(grid, c.material, c.boundary, cfg);
    const auto traj = solver.simulate(uniform_state(grid, c.material, c.initial), c.t_end);
    std::vector<double> core;
    core.reserve(traj.probes.size());
    for (const auto& p : traj.probes) core.push_back(p.core_temperature);
    if (rep.sample_times.empty())
      for (const auto& p : traj.probes) rep.sample_times.push_back(p.time);
    rep.core_temperature.push_back(std::move(core));
  }

  const auto& finest = rep.core_temperature.back();
  for (const auto& series : rep.core_temperature)
    rep.mape_vs_finest.push_back(metrics::mape(finest, series));
  for (std::size_t k = 0; k + 1 < rep.core_temperature.size(); ++k)
    rep.rms_difference.push_back(metrics::rmse(rep.core_temperature[k], rep.core_temperature[k + 1]));

  const auto& d = rep.rms_difference;
  bool all_zero = true;
  bool monotone = true;
  for (std::size_t k = 0; k < d.size(); ++k) {
    if (d[k] != 0.0) all_zero = false;
    if (k > 0 && !(d[k] < d[k - 1])) monotone = false;
  }
  rep.observed_order = std::numeric_limits<double>::quiet_NaN();
  if (all_zero) {
    rep.conclusive = true;
  } else if (monotone && d.back() > 0.0) {
    rep.observed_order = std::log(d[d.size() - 2] / d.back()) / std::log(ratio);
    rep.conclusive = true;
  }
  return rep;
}

}  // namespace dtwin::fom
