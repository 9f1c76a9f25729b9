#pragma once

// Full-order model: finite-volume, method-of-lines solver for coupled gas,
// vapor, liquid water and energy transport in a 1-D porous slab.
//
// Unknowns per cell are (T, p, c_v, c_w). The slab occupies y in [0, L];
// y = 0 is the exposed surface, y = L the insulated base where the core
// temperature is probed. Face fluxes are positive in +y (into the food).

#include <limits>
#include <optional>
#include <vector>

#include "dtwin/material.hpp"
#include "dtwin/signal.hpp"

namespace dtwin::fom {

using material::FoodMaterial;
using material::LocalState;

class Grid1D {
 public:
  static Grid1D uniform(double length, std::size_t n_cells);
  /// Geometric grading: each cell is `ratio` times wider than the one above it.
  static Grid1D graded(double length, std::size_t n_cells, double ratio);
  explicit Grid1D(std::vector<double> faces);

  std::size_t size() const noexcept { return centers_.size(); }
  double length() const noexcept { return faces_.back(); }
  const std::vector<double>& faces() const noexcept { return faces_; }
  const std::vector<double>& centers() const noexcept { return centers_; }
  const std::vector<double>& widths() const noexcept { return widths_; }

 private:
  std::vector<double> faces_;
  std::vector<double> centers_;
  std::vector<double> widths_;
};

struct FieldState {
  std::vector<LocalState> cells;
  double time = 0.0;
};

/// Constant value or sampled signal; holds end values outside the signal range.
struct Forcing {
  double constant = 0.0;
  std::optional<Signal> series;

  static Forcing fixed(double v) { return {v, std::nullopt}; }
  static Forcing of(Signal s) { return {0.0, std::move(s)}; }
  double at(double t) const noexcept { return series ? series->sample_clamped(t) : constant; }
  /// Largest value the forcing takes.
  double supremum() const noexcept;
};

struct BoundarySpec {
  double heat_transfer = 20.0;   // h_T, W/(m^2 K)
  double mass_transfer = 0.01;   // h_m, m/s
  double ambient_pressure = 101325.0;
  Forcing oven_temperature = Forcing::fixed(450.15);
  Forcing oven_vapor_density = Forcing::fixed(0.0);

  void validate() const;
};

struct SolveConfig {
  double dt_init = 0.1;
  double dt_min = 1e-3;
  double dt_max = 5.0;
  double newton_tolerance = 1e-8;  // max-norm of the scaled residual
  int newton_max_iterations = 12;
  double output_interval = 1.0;
  bool adaptive = true;  // step-doubling error control
  // Per-step local error targets for the step-doubling controller.
  double temperature_tolerance = 0.05;   // K
  double pressure_tolerance = 50.0;      // Pa
  double vapor_tolerance = 2e-3;         // kg/m^3
  double water_tolerance = 0.5;          // kg/m^3
  bool record_fields = true;

  void validate() const;
};

/// Face fluxes, indexed by face (0 = surface, n = base).
struct FaceFluxes {
  std::vector<double> gas;    // kg/(m^2 s)
  std::vector<double> vapor;  // kg/(m^2 s)
  std::vector<double> water;  // kg/(m^2 s)
  std::vector<double> heat;   // conduction, W/m^2
};

/// Interior face fluxes; faces 0 and n are left at zero.
/// Throws NumericalFailure on a non-finite flux.
FaceFluxes interior_fluxes(const FieldState& state, const Grid1D& grid, const FoodMaterial& m);

/// Exchange with the oven at y = 0. Mass fluxes are positive leaving the food.
struct BoundaryFluxes {
  double vapor = 0.0;           // j_v
  double water = 0.0;           // j_w
  double heat_in = 0.0;         // heat entering the food, W/m^2
  double surface_temperature = 0.0;
  double pressure = 0.0;        // Dirichlet value p_amb
};

/// `surface_conductance` couples the surface to the evaluated state's
/// temperature (2 k / dy for a cell centre); infinity means the state sits
/// on the surface and q = h_T (T_oven - T) - lambda j_w.
BoundaryFluxes boundary_fluxes(const LocalState& surface, const BoundarySpec& bc, double t,
                               const FoodMaterial& m,
                               double surface_conductance = std::numeric_limits<double>::infinity());

/// Integral of c_w + c_v over the slab (midpoint rule), kg/m^2.
double total_moisture(const FieldState& state, const Grid1D& grid);

struct Probe {
  double time = 0.0;
  double surface_temperature = 0.0;
  double core_temperature = 0.0;
  double moisture = 0.0;
  double mass_loss = 0.0;         // cumulative boundary outflow, kg/m^2
  double surface_pressure = 0.0;  // value imposed at y = 0
  double oven_temperature = 0.0;
};

struct SolverStats {
  std::size_t accepted_steps = 0;
  std::size_t rejected_steps = 0;
  std::size_t newton_iterations = 0;
  std::size_t newton_failures = 0;
};

struct Trajectory {
  std::vector<FieldState> fields;  // empty unless SolveConfig::record_fields
  std::vector<Probe> probes;
  double initial_moisture = 0.0;
  double final_moisture = 0.0;
  double cumulative_outflow = 0.0;  // flux ledger, kg/m^2
  double max_temperature = 0.0;     // over every cell and accepted step
  SolverStats stats;
};

/// Fully implicit solver for one case. Exclusive-use: not thread-safe.
class Solver {
 public:
  Solver(Grid1D grid, FoodMaterial material, BoundarySpec bc, SolveConfig cfg);

  struct StepOutcome {
    FieldState state;
    double outflow = 0.0;  // boundary moisture outflow over the step, kg/m^2
    double dt_used = 0.0;
  };

  /// One backward-Euler step of size dt; on Newton failure dt is halved and
  /// the sub-steps repeated until dt_min. Throws SolverFailure.
  StepOutcome step(const FieldState& state, double dt);

  /// Adaptive run to t_end, sampling at the configured output interval.
  Trajectory simulate(const FieldState& init, double t_end);

  const Grid1D& grid() const noexcept { return grid_; }
  const FoodMaterial& material() const noexcept { return material_; }
  const BoundarySpec& boundary() const noexcept { return bc_; }
  const SolveConfig& config() const noexcept { return cfg_; }
  const SolverStats& stats() const noexcept { return stats_; }

  /// Surface temperature, core temperature and imposed surface pressure of a state.
  Probe probe(const FieldState& state) const;

  /// Scaled backward-Euler residual of `next` given `prev` (diagnostics/tests).
  std::vector<double> residual(const FieldState& prev, const FieldState& next, double dt) const;

 private:
  struct NewtonResult {
    bool converged = false;
    double residual = 0.0;
    int iterations = 0;
  };
  NewtonResult solve_implicit(const std::vector<double>& prev, std::vector<double>& x, double t_new,
                              double dt);
  void evaluate_residual(const std::vector<double>& prev, const std::vector<double>& x,
                         double t_new, double dt, std::vector<double>& r) const;
  double boundary_outflow(const std::vector<double>& x, double t) const;

  Grid1D grid_;
  FoodMaterial material_;
  BoundarySpec bc_;
  SolveConfig cfg_;
  SolverStats stats_;
  double scale_energy_ = 1.0;
  double scale_gas_ = 1.0;
  double scale_water_ = 1.0;
};

/// Initial condition of a case. Vapor is given in mol/m^3 and converted
/// with the vapor molar mass; the state stores kg/m^3 only.
struct InitialCondition {
  double temperature = 293.15;
  double pressure = 101325.0;
  double water_saturation = 0.5;
  double vapor_mol_per_m3 = 0.17;
};

FieldState uniform_state(const Grid1D& grid, const FoodMaterial& m, const InitialCondition& init);

/// Free-function forms of Solver::step / Solver::simulate.
FieldState step(const FieldState& state, double dt, const Grid1D& grid, const BoundarySpec& bc,
                const FoodMaterial& m, const SolveConfig& cfg);
Trajectory simulate(const FieldState& init, const Grid1D& grid, const BoundarySpec& bc,
                    const FoodMaterial& m, const SolveConfig& cfg, double t_end);

/// A complete physical case on a uniform grid.
struct Case {
  FoodMaterial material;
  BoundarySpec boundary;
  SolveConfig solver;
  InitialCondition initial;
  double length = 0.01;
  std::size_t cells = 41;
  double t_end = 600.0;

  Grid1D grid() const { return Grid1D::uniform(length, cells); }
  Trajectory run() const;
};

struct ConvergenceReport {
  std::vector<std::size_t> resolutions;
  std::vector<double> sample_times;
  std::vector<std::vector<double>> core_temperature;  // per resolution
  std::vector<double> mape_vs_finest;                 // percent, per resolution
  std::vector<double> rms_difference;  // RMS of successive-resolution differences, K
  double observed_order = 0.0;         // NaN when inconclusive or exact
  bool conclusive = false;
};

/// Self-convergence study of the core-temperature probe on uniform grids
/// (Case::cells is ignored). Throws DomainError unless >= 3 resolutions in
/// geometric progression.
ConvergenceReport grid_convergence(const Case& c, const std::vector<std::size_t>& resolutions);

}  // namespace dtwin::fom
