#include <algorithm>
#include <cmath>
#include <sstream>

#include "discretization.hpp"
#include "dtwin/errors.hpp"
#include "dtwin/fom.hpp"

namespace dtwin::fom {

namespace detail {

CellProps cell_props(const LocalState& s, const FoodMaterial& m) noexcept {
  using namespace material;
  CellProps c;
  c.T = s.temperature;
  c.p = s.pressure;
  c.cv = s.vapor_conc;
  c.cw = s.water_conc;
  const double phi = m.porosity;
  const double cmax = m.max_water_concentration();
  c.sw = s.water_conc / cmax;
  c.sg = 1.0 - c.sw;
  const double sg_reg = std::clamp(c.sg, kSaturationEpsilon, 1.0 - kSaturationEpsilon);
  const double sw_reg = 1.0 - sg_reg;

  const double rt = m.gas_constant * c.T;
  c.rho_v = c.cv / (sg_reg * phi);
  const double pv = c.rho_v * rt / m.vapor.molar_mass;
  const double rho_a = (c.p - pv) * m.gas.molar_mass / rt;
  c.rho_g = c.rho_v + rho_a;
  c.omega_v = c.rho_g != 0.0 ? c.rho_v / c.rho_g : 0.0;
  c.c_gas = c.cv + c.sg * phi * rho_a;

  c.gas_mobility =
      m.gas_permeability * relative_permeability_gas(sw_reg, m.relative_permeability) / m.gas.viscosity;
  c.water_mobility = m.water_permeability *
                     relative_permeability_water(sw_reg, m.relative_permeability) / m.water.viscosity;
  c.vapor_diffusion = phi * sg_reg * std::max(c.rho_g, 0.0) * m.gas_diffusivity;
  c.capillary = m.capillary_diffusivity(c.cw, c.T, cmax);

  c.heat_capacity = m.solid.density * (1.0 - phi) * m.solid.specific_heat +
                    c.rho_g * c.sg * phi * m.gas.specific_heat +
                    m.water.density * c.sw * phi * m.water.specific_heat;
  c.conductivity = m.solid.conductivity * (1.0 - phi) + m.gas.conductivity * c.sg * phi +
                   m.water.conductivity * c.sw * phi;
  c.evaporation = evaporation_rate_unchecked(s, m);
  return c;
}

FaceFlux face_flux(const CellProps& a, const CellProps& b, double da, double db,
                   const FoodMaterial& m) noexcept {
  const double d = da + db;
  FaceFlux f;
  const double dp = (b.p - a.p) / d;

  // Darcy gas flow; densities taken from the upstream cell.
  const double u_gas = -harmonic(a.gas_mobility, b.gas_mobility, da, db) * dp;
  const CellProps& up = u_gas >= 0.0 ? a : b;
  f.gas = up.rho_g * u_gas;
  const double vapor_darcy = up.rho_v * u_gas;
  const double vapor_diff =
      -harmonic(a.vapor_diffusion, b.vapor_diffusion, da, db) * (b.omega_v - a.omega_v) / d;
  f.vapor = vapor_darcy + vapor_diff;

  const double u_water = -harmonic(a.water_mobility, b.water_mobility, da, db) * dp;
  f.water = m.water.density * u_water - harmonic(a.capillary, b.capillary, da, db) * (b.cw - a.cw) / d;

  f.heat = -harmonic(a.conductivity, b.conductivity, da, db) * (b.T - a.T) / d;
  return f;
}

SurfaceExchange surface_exchange(const CellProps& c, const LocalState& s, double half,
                                 const BoundarySpec& bc, double t, const FoodMaterial& m) noexcept {
  SurfaceExchange e;
  e.oven_temperature = bc.oven_temperature.at(t);
  const double rho_v_oven = bc.oven_vapor_density.at(t);

  // Dirichlet pressure at the face, half a cell above the centre.
  const double u = -c.gas_mobility * (c.p - bc.ambient_pressure) / half;
  double darcy_gas = 0.0;
  double darcy_vapor = 0.0;
  if (u >= 0.0) {
    const double rt = m.gas_constant * e.oven_temperature;
    const double pv = rho_v_oven * rt / m.vapor.molar_mass;
    const double rho_g_oven = rho_v_oven + (bc.ambient_pressure - pv) * m.gas.molar_mass / rt;
    darcy_gas = rho_g_oven * u;
    darcy_vapor = rho_v_oven * u;
  } else {
    darcy_gas = c.rho_g * u;
    darcy_vapor = c.rho_v * u;
  }

  const double conductance = c.conductivity / half;
  const auto b = boundary_fluxes(s, bc, t, m, conductance);
  e.gas_in = darcy_gas - b.vapor;
  e.vapor_in = darcy_vapor - b.vapor;
  e.water_in = -b.water;
  e.heat_in = b.heat_in;
  e.darcy_gas_in = darcy_gas;
  e.surface_temperature = b.surface_temperature;
  return e;
}

}  // namespace detail

double Forcing::supremum() const noexcept {
  if (!series) return constant;
  return *std::max_element(series->values().begin(), series->values().end());
}

void BoundarySpec::validate() const {
  std::ostringstream bad;
  if (!(heat_transfer >= 0.0)) bad << " h_T must be >= 0;";
  if (!(mass_transfer >= 0.0)) bad << " h_m must be >= 0;";
  if (!(ambient_pressure > 0.0)) bad << " p_amb must be > 0;";
  if (bad.tellp() != 0) throw DomainError("invalid boundary spec:" + bad.str());
}

void SolveConfig::validate() const {
  std::ostringstream bad;
  if (!(dt_min > 0.0 && dt_min <= dt_max)) bad << " need 0 < dt_min <= dt_max;";
  if (!(dt_init > 0.0)) bad << " dt_init must be > 0;";
  if (!(newton_tolerance > 0.0)) bad << " newton tolerance must be > 0;";
  if (newton_max_iterations < 1) bad << " newton max iterations must be >= 1;";
  if (!(output_interval > 0.0)) bad << " output interval must be > 0;";
  if (!(temperature_tolerance > 0.0 && pressure_tolerance > 0.0 && vapor_tolerance > 0.0 &&
        water_tolerance > 0.0))
    bad << " time-error tolerances must be > 0;";
  if (bad.tellp() != 0) throw DomainError("invalid solver config:" + bad.str());
}

FaceFluxes interior_fluxes(const FieldState& state, const Grid1D& grid, const FoodMaterial& m) {
  const std::size_t n = grid.size();
  if (state.cells.size() != n) throw DomainError("field state does not match grid");
  std::vector<detail::CellProps> props(n);
  for (std::size_t i = 0; i < n; ++i) props[i] = detail::cell_props(state.cells[i], m);

  FaceFluxes out;
  out.gas.assign(n + 1, 0.0);
  out.vapor.assign(n + 1, 0.0);
  out.water.assign(n + 1, 0.0);
  out.heat.assign(n + 1, 0.0);
  const auto& y = grid.centers();
  const auto& faces = grid.faces();
  for (std::size_t f = 1; f < n; ++f) {
    const auto flux = detail::face_flux(props[f - 1], props[f], faces[f] - y[f - 1], y[f] - faces[f], m);
    if (!std::isfinite(flux.gas) || !std::isfinite(flux.vapor) || !std::isfinite(flux.water) ||
        !std::isfinite(flux.heat))
      throw NumericalFailure("non-finite face flux", f - 1);
    out.gas[f] = flux.gas;
    out.vapor[f] = flux.vapor;
    out.water[f] = flux.water;
    out.heat[f] = flux.heat;
  }
  return out;
}

BoundaryFluxes boundary_fluxes(const LocalState& surface, const BoundarySpec& bc, double t,
                               const FoodMaterial& m, double surface_conductance) {
  BoundaryFluxes b;
  const double phi = m.porosity;
  const double cmax = m.max_water_concentration();
  const double sw = std::clamp(surface.water_conc / cmax, 0.0, 1.0);
  const double sg = 1.0 - sw;
  const double excess = material::vapor_density(surface, m) - bc.oven_vapor_density.at(t);
  b.vapor = bc.mass_transfer * phi * sg * excess;
  b.water = bc.mass_transfer * phi * sw * excess;
  b.pressure = bc.ambient_pressure;

  const double t_oven = bc.oven_temperature.at(t);
  const double latent = m.latent_heat * b.water;
  if (std::isinf(surface_conductance)) {
    b.surface_temperature = surface.temperature;
  } else {
    // Surface energy balance: h_T (T_oven - T_s) - latent = K (T_s - T).
    b.surface_temperature = (bc.heat_transfer * t_oven - latent + surface_conductance * surface.temperature) /
                            (bc.heat_transfer + surface_conductance);
  }
  b.heat_in = bc.heat_transfer * (t_oven - b.surface_temperature) - latent;
  return b;
}

double total_moisture(const FieldState& state, const Grid1D& grid) {
  if (state.cells.size() != grid.size()) throw DomainError("field state does not match grid");
  double sum = 0.0;
  const auto& w = grid.widths();
  for (std::size_t i = 0; i < grid.size(); ++i)
    sum += (state.cells[i].water_conc + state.cells[i].vapor_conc) * w[i];
  return sum;
}

FieldState uniform_state(const Grid1D& grid, const FoodMaterial& m, const InitialCondition& init) {
  if (!(init.water_saturation >= 0.0 && init.water_saturation <= 1.0))
    throw DomainError("initial water saturation must lie in [0, 1]");
  LocalState s;
  s.temperature = init.temperature;
  s.pressure = init.pressure;
  s.water_conc = init.water_saturation * m.max_water_concentration();
  s.vapor_conc = init.vapor_mol_per_m3 * m.vapor.molar_mass;
  material::validate_state(s, m);
  FieldState f;
  f.cells.assign(grid.size(), s);
  f.time = 0.0;
  return f;
}

}  // namespace dtwin::fom
