#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "discretization.hpp"
#include "dtwin/errors.hpp"
#include "dtwin/fom.hpp"

namespace dtwin::fom {

namespace {

constexpr std::size_t kVars = 4;  // T, p, c_v, c_w
using Block = Eigen::Matrix<double, 4, 4>;
using Vec4 = Eigen::Matrix<double, 4, 1>;

std::vector<double> pack(const FieldState& s) {
  std::vector<double> x(s.cells.size() * kVars);
  for (std::size_t i = 0; i < s.cells.size(); ++i) {
    x[kVars * i + 0] = s.cells[i].temperature;
    x[kVars * i + 1] = s.cells[i].pressure;
    x[kVars * i + 2] = s.cells[i].vapor_conc;
    x[kVars * i + 3] = s.cells[i].water_conc;
  }
  return x;
}

FieldState unpack(const std::vector<double>& x, double t) {
  FieldState s;
  s.cells.resize(x.size() / kVars);
  for (std::size_t i = 0; i < s.cells.size(); ++i)
    s.cells[i] = {x[kVars * i], x[kVars * i + 1], x[kVars * i + 2], x[kVars * i + 3]};
  s.time = t;
  return s;
}

LocalState local(const std::vector<double>& x, std::size_t i) {
  return {x[kVars * i], x[kVars * i + 1], x[kVars * i + 2], x[kVars * i + 3]};
}

/// Block-tridiagonal LU (Thomas) solve of J dx = rhs, in place on rhs.
bool solve_block_tridiagonal(const std::vector<Block>& lower, const std::vector<Block>& diag,
                             const std::vector<Block>& upper, std::vector<double>& rhs) {
  const std::size_t n = diag.size();
  std::vector<Block> c(n);
  std::vector<Vec4> d(n);
  for (std::size_t i = 0; i < n; ++i) {
    Block m = diag[i];
    Vec4 b = Eigen::Map<const Vec4>(&rhs[kVars * i]);
    if (i > 0) {
      m.noalias() -= lower[i] * c[i - 1];
      b.noalias() -= lower[i] * d[i - 1];
    }
    Eigen::PartialPivLU<Block> lu(m);
    if (!std::isfinite(lu.determinant()) || lu.determinant() == 0.0) return false;
    if (i + 1 < n) c[i] = lu.solve(upper[i]);
    d[i] = lu.solve(b);
  }
  for (std::size_t k = n; k-- > 0;) {
    if (k + 1 < n) d[k].noalias() -= c[k] * d[k + 1];
    Eigen::Map<Vec4> out(&rhs[kVars * k]);
    out = d[k];
  }
  for (double v : rhs)
    if (!std::isfinite(v)) return false;
  return true;
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return std::isfinite(m) ? m : std::numeric_limits<double>::infinity();
}

/// Linear extrapolation x + ratio (x - x_prev); concentrations are kept non-negative.
std::vector<double> extrapolate(const std::vector<double>& x, const std::vector<double>& x_prev, double ratio) {
  std::vector<double> out(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    out[k] = x[k] + ratio * (x[k] - x_prev[k]);
    if (k % kVars >= 2 && out[k] < 0.0) out[k] = 0.5 * x[k];
  }
  return out;
}

double l2(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::isfinite(s) ? std::sqrt(s) : std::numeric_limits<double>::infinity();
}

}  // namespace

Solver::Solver(Grid1D grid, FoodMaterial material, BoundarySpec bc, SolveConfig cfg)
    : grid_(std::move(grid)), material_(std::move(material)), bc_(std::move(bc)), cfg_(cfg) {
  material_.validate();
  bc_.validate();
  cfg_.validate();
  const double t_ref = 300.0;
  const double phi = material_.porosity;
  scale_gas_ = phi * bc_.ambient_pressure * material_.gas.molar_mass / (material_.gas_constant * t_ref);
  scale_water_ = phi * material_.water.density;
  const double rhoc = material_.solid.density * (1.0 - phi) * material_.solid.specific_heat +
                      phi * material_.water.density * material_.water.specific_heat;
  scale_energy_ = rhoc * t_ref;
}

void Solver::evaluate_residual(const std::vector<double>& prev, const std::vector<double>& x,
                               double t_new, double dt, std::vector<double>& r) const {
  const std::size_t n = grid_.size();
  const auto& w = grid_.widths();
  const auto& y = grid_.centers();
  const auto& faces = grid_.faces();
  const auto& m = material_;

  std::vector<detail::CellProps> c(n);
  for (std::size_t i = 0; i < n; ++i) c[i] = detail::cell_props(local(x, i), m);
  std::vector<detail::FaceFlux> f(n + 1);
  const auto surf = detail::surface_exchange(c[0], local(x, 0), y[0], bc_, t_new, m);
  f[0] = {surf.gas_in, surf.vapor_in, surf.water_in, surf.heat_in};
  for (std::size_t k = 1; k < n; ++k)
    f[k] = detail::face_flux(c[k - 1], c[k], faces[k] - y[k - 1], y[k] - faces[k], m);
  f[n] = {};

  const double cpg = m.gas.specific_heat;
  const double cpw = m.water.specific_heat;
  r.resize(n * kVars);
  for (std::size_t i = 0; i < n; ++i) {
    const double a = dt / w[i];
    const auto old = local(prev, i);
    const auto co = detail::cell_props(old, m);
    const double evap = c[i].evaporation;

    // Upwind advective enthalpy: only inflowing faces contribute.
    double adv = 0.0;
    const double gas_left = (i == 0) ? surf.darcy_gas_in : f[i].gas;
    const double t_left = (i == 0) ? surf.oven_temperature : c[i - 1].T;
    if (gas_left > 0.0) adv += gas_left * cpg * (c[i].T - t_left);
    if (i > 0 && f[i].water > 0.0) adv += f[i].water * cpw * (c[i].T - c[i - 1].T);
    if (i + 1 < n) {
      if (f[i + 1].gas < 0.0) adv += -f[i + 1].gas * cpg * (c[i].T - c[i + 1].T);
      if (f[i + 1].water < 0.0) adv += -f[i + 1].water * cpw * (c[i].T - c[i + 1].T);
    }

    double* ri = &r[kVars * i];
    ri[0] = (c[i].heat_capacity * (c[i].T - co.T) + a * (f[i + 1].heat - f[i].heat) + dt * adv / w[i] +
             dt * m.latent_heat * evap) /
            scale_energy_;
    ri[1] = (c[i].c_gas - co.c_gas + a * (f[i + 1].gas - f[i].gas) - dt * evap) / scale_gas_;
    ri[2] = (c[i].cv - co.cv + a * (f[i + 1].vapor - f[i].vapor) - dt * evap) / scale_gas_;
    ri[3] = (c[i].cw - co.cw + a * (f[i + 1].water - f[i].water) + dt * evap) / scale_water_;
  }
}

double Solver::boundary_outflow(const std::vector<double>& x, double t) const {
  const auto s0 = local(x, 0);
  const auto c0 = detail::cell_props(s0, material_);
  const auto e = detail::surface_exchange(c0, s0, grid_.centers()[0], bc_, t, material_);
  return -(e.vapor_in + e.water_in);
}

std::vector<double> Solver::residual(const FieldState& prev, const FieldState& next, double dt) const {
  std::vector<double> r;
  evaluate_residual(pack(prev), pack(next), next.time, dt, r);
  return r;
}

Solver::NewtonResult Solver::solve_implicit(const std::vector<double>& prev, std::vector<double>& x,
                                            double t_new, double dt) {
  const std::size_t n = grid_.size();
  const std::size_t dim = n * kVars;
  std::vector<double> r, rp, trial(dim), dx(dim);
  std::vector<Block> lower(n, Block::Zero()), diag(n, Block::Zero()), upper(n, Block::Zero());
  const double typical[kVars] = {1.0, 1.0, 1e-4, 1e-2};

  NewtonResult res;
  evaluate_residual(prev, x, t_new, dt, r);
  res.residual = max_abs(r);
  if (!std::isfinite(res.residual)) return res;

  for (int it = 0; it < cfg_.newton_max_iterations; ++it) {
    if (res.residual <= cfg_.newton_tolerance) {
      res.converged = true;
      return res;
    }
    ++res.iterations;
    ++stats_.newton_iterations;

    // Colored finite-difference Jacobian: cells i, i+3, ... never share a row.
    for (std::size_t color = 0; color < 3; ++color) {
      for (std::size_t v = 0; v < kVars; ++v) {
        std::vector<double> xp = x;
        std::vector<double> h(n, 0.0);
        for (std::size_t i = color; i < n; i += 3) {
          const double xi = x[kVars * i + v];
          h[i] = 1.5e-8 * std::max(std::abs(xi), typical[v]);
          xp[kVars * i + v] = xi + h[i];
          h[i] = xp[kVars * i + v] - xi;
        }
        evaluate_residual(prev, xp, t_new, dt, rp);
        for (std::size_t j = 0; j < n; ++j) {
          // The perturbed cell influencing row j.
          std::size_t src = j;
          if (j % 3 != color) src = (j > 0 && (j - 1) % 3 == color) ? j - 1 : j + 1;
          if (src >= n || src % 3 != color) continue;
          for (std::size_t e = 0; e < kVars; ++e) {
            const double d = (rp[kVars * j + e] - r[kVars * j + e]) / h[src];
            if (src == j) diag[j](e, v) = d;
            else if (src + 1 == j) lower[j](e, v) = d;
            else upper[j](e, v) = d;
          }
        }
      }
    }

    for (std::size_t k = 0; k < dim; ++k) dx[k] = -r[k];
    if (!solve_block_tridiagonal(lower, diag, upper, dx)) return res;

    // Keep T and p positive and concentrations from jumping below zero.
    double alpha = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t v = 0; v < kVars; ++v) {
        const double xi = x[kVars * i + v];
        const double d = dx[kVars * i + v];
        if (d < 0.0 && xi > 0.0 && xi + d < 0.0) alpha = std::min(alpha, 0.9 * xi / -d);
      }
    }

    const double merit = l2(r);
    bool accepted = false;
    for (int ls = 0; ls < 12; ++ls) {
      for (std::size_t k = 0; k < dim; ++k) trial[k] = x[k] + alpha * dx[k];
      evaluate_residual(prev, trial, t_new, dt, rp);
      const double m_trial = l2(rp);
      if (std::isfinite(m_trial) && m_trial < (1.0 - 1e-4 * alpha) * merit) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      // Roundoff floor: the full step is already negligible.
      if (res.residual <= 100.0 * cfg_.newton_tolerance) res.converged = true;
      return res;
    }
    x.swap(trial);
    r.swap(rp);
    res.residual = max_abs(r);
  }
  res.converged = res.residual <= cfg_.newton_tolerance;
  return res;
}

Solver::StepOutcome Solver::step(const FieldState& state, double dt) {
  if (state.cells.size() != grid_.size()) throw DomainError("field state does not match grid");
  if (!(dt > 0.0)) throw DomainError("time step must be > 0");

  struct Frame {
    std::vector<double> x;
    double t;
    double outflow;
  };
  // Recursive halving on Newton failure.
  auto advance = [&](auto&& self, const std::vector<double>& x0, double t0, double h) -> Frame {
    std::vector<double> x = x0;
    const double t1 = t0 + h;
    const auto nr = solve_implicit(x0, x, t1, h);
    if (nr.converged) {
      const double outflow = h * boundary_outflow(x, t1);
      return {std::move(x), t1, outflow};
    }
    ++stats_.newton_failures;
    if (0.5 * h < cfg_.dt_min)
      throw SolverFailure("Newton iteration failed at minimum time step", t0, nr.residual);
    auto a = self(self, x0, t0, 0.5 * h);
    auto b = self(self, a.x, a.t, t1 - a.t);
    b.outflow += a.outflow;
    return b;
  };
  auto fr = advance(advance, pack(state), state.time, dt);
  StepOutcome out;
  out.state = unpack(fr.x, state.time + dt);
  out.outflow = fr.outflow;
  out.dt_used = dt;
  return out;
}

Probe Solver::probe(const FieldState& state) const {
  Probe p;
  p.time = state.time;
  const auto& s0 = state.cells.front();
  const auto c0 = detail::cell_props(s0, material_);
  const auto e = detail::surface_exchange(c0, s0, grid_.centers()[0], bc_, state.time, material_);
  p.surface_temperature = e.surface_temperature;
  // T at y = L from a quadratic with zero slope at the insulated wall
  // through the last two cell centres.
  const std::size_t n = state.cells.size();
  const double yl = grid_.length();
  const double d1 = yl - grid_.centers()[n - 1];
  const double d2 = yl - grid_.centers()[n - 2];
  const double t1 = state.cells[n - 1].temperature;
  const double t2 = state.cells[n - 2].temperature;
  p.core_temperature = t1 - (t2 - t1) * d1 * d1 / (d2 * d2 - d1 * d1);
  p.moisture = total_moisture(state, grid_);
  p.surface_pressure = bc_.ambient_pressure;
  p.oven_temperature = e.oven_temperature;
  return p;
}

Trajectory Solver::simulate(const FieldState& init, double t_end) {
  if (!(t_end > init.time)) throw DomainError("t_end must exceed the initial time");
  if (init.cells.size() != grid_.size()) throw DomainError("field state does not match grid");
  for (const auto& c : init.cells) material::validate_state(c, material_);

  Trajectory traj;
  traj.initial_moisture = total_moisture(init, grid_);

  std::vector<double> x = pack(init);
  double t = init.time;
  double ledger = 0.0;
  double tmax = 0.0;
  for (const auto& c : init.cells) tmax = std::max(tmax, c.temperature);

  const double out_dt = cfg_.output_interval;
  std::size_t next_sample = 0;
  auto emit = [&](const std::vector<double>& xa, double ta, double la, const std::vector<double>& xb,
                  double tb, double lb) {
    for (;;) {
      double ts = init.time + out_dt * static_cast<double>(next_sample);
      if (ts > t_end) {
        // final sample at t_end when it is not on the output grid
        if (tb < t_end || traj.probes.empty() || traj.probes.back().time >= t_end) return;
        ts = t_end;
      }
      if (ts > tb) return;
      const double wgt = tb > ta ? (ts - ta) / (tb - ta) : 1.0;
      std::vector<double> xs(xa.size());
      for (std::size_t k = 0; k < xs.size(); ++k) xs[k] = xa[k] + wgt * (xb[k] - xa[k]);
      FieldState fs = unpack(xs, ts);
      Probe p = probe(fs);
      p.mass_loss = la + wgt * (lb - la);
      traj.probes.push_back(p);
      if (cfg_.record_fields) traj.fields.push_back(std::move(fs));
      if (ts == t_end) return;
      ++next_sample;
    }
  };
  emit(x, t, 0.0, x, t, 0.0);

  auto error_norm = [&](const std::vector<double>& a, const std::vector<double>& b) {
    const double tol[kVars] = {cfg_.temperature_tolerance, cfg_.pressure_tolerance, cfg_.vapor_tolerance,
                               cfg_.water_tolerance};
    double e = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) e = std::max(e, std::abs(a[k] - b[k]) / tol[k % kVars]);
    return e;
  };

  double dt = std::clamp(cfg_.dt_init, cfg_.dt_min, cfg_.dt_max);
  // Previous accepted state for the linear predictor of the Newton start.
  std::vector<double> x_prev = x;
  double h_prev = dt;
  while (t < t_end) {
    bool last = false;
    double h = dt;
    if (t + h >= t_end * (1.0 - 1e-14)) {
      h = t_end - t;
      last = true;
    }
    const double t_new = last ? t_end : t + h;

    std::vector<double> x_new;
    double outflow = 0.0;
    double next_dt = dt;
    if (cfg_.adaptive) {
      const double t_mid = t + 0.5 * h;
      std::vector<double> full = extrapolate(x, x_prev, h / h_prev);
      std::vector<double> half = extrapolate(x, x_prev, 0.5 * h / h_prev);
      const auto r_full = solve_implicit(x, full, t_new, h);
      auto r_half = solve_implicit(x, half, t_mid, 0.5 * h);
      bool ok = r_full.converged && r_half.converged;
      std::vector<double> second = extrapolate(half, x, 1.0);
      if (ok) ok = solve_implicit(half, second, t_new, t_new - t_mid).converged;
      if (!ok) {
        ++stats_.newton_failures;
        ++stats_.rejected_steps;
        if (0.5 * h < cfg_.dt_min)
          throw SolverFailure("Newton iteration failed at minimum time step", t,
                              std::max(r_full.residual, r_half.residual));
        dt = 0.5 * h;
        continue;
      }
      const double err = error_norm(full, second);
      const double factor = std::clamp(0.9 / std::sqrt(std::max(err, 1e-12)), 0.2, 2.0);
      if (err > 1.0 && h > cfg_.dt_min) {
        ++stats_.rejected_steps;
        dt = std::max(cfg_.dt_min, h * factor);
        continue;
      }
      outflow = 0.5 * h * boundary_outflow(half, t_mid) + (t_new - t_mid) * boundary_outflow(second, t_new);
      x_new = std::move(second);
      next_dt = std::min(cfg_.dt_max, std::max(cfg_.dt_min, h * factor));
      if (last) next_dt = dt;
    } else {
      auto o = step(unpack(x, t), h);
      x_new = pack(o.state);
      outflow = o.outflow;
    }

    for (std::size_t k = 0; k < x_new.size(); k += kVars) {
      if (!std::isfinite(x_new[k]) || !std::isfinite(x_new[k + 1]) || !std::isfinite(x_new[k + 2]) ||
          !std::isfinite(x_new[k + 3]))
        throw NumericalFailure("non-finite state after accepted step", k / kVars);
      tmax = std::max(tmax, x_new[k]);
    }
    ++stats_.accepted_steps;
    if (cfg_.adaptive) {
      x_prev = x;
      h_prev = t_new - t;
    }
    const double ledger_new = ledger + outflow;
    emit(x, t, ledger, x_new, t_new, ledger_new);
    x.swap(x_new);
    t = t_new;
    ledger = ledger_new;
    dt = next_dt;
  }

  const FieldState final_state = unpack(x, t);
  traj.final_moisture = total_moisture(final_state, grid_);
  traj.cumulative_outflow = ledger;
  traj.max_temperature = tmax;
  traj.stats = stats_;
  return traj;
}

FieldState step(const FieldState& state, double dt, const Grid1D& grid, const BoundarySpec& bc,
                const FoodMaterial& m, const SolveConfig& cfg) {
  if (!(dt >= cfg.dt_min && dt <= cfg.dt_max)) throw DomainError("time step outside [dt_min, dt_max]");
  Solver solver(grid, m, bc, cfg);
  return solver.step(state, dt).state;
}

Trajectory simulate(const FieldState& init, const Grid1D& grid, const BoundarySpec& bc,
                    const FoodMaterial& m, const SolveConfig& cfg, double t_end) {
  Solver solver(grid, m, bc, cfg);
  return solver.simulate(init, t_end);
}

}  // namespace dtwin::fom
