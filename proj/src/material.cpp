#include "dtwin/material.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dtwin/errors.hpp"

namespace dtwin::material {

namespace {

constexpr double kAnchorTemperature = 373.15;
constexpr double kAnchorPressure = 101325.0;

bool positive(double x) { return std::isfinite(x) && x > 0.0; }

}  // namespace

MoistureCurve MoistureCurve::constant(double value) {
  MoistureCurve c;
  c.kind_ = Kind::constant;
  c.value_ = value;
  return c;
}

MoistureCurve MoistureCurve::exponential(double value, double rate) {
  MoistureCurve c;
  c.kind_ = Kind::exponential;
  c.value_ = value;
  c.rate_ = rate;
  return c;
}

MoistureCurve MoistureCurve::saturating_exponential(double rate) {
  MoistureCurve c;
  c.kind_ = Kind::saturating_exponential;
  c.rate_ = rate;
  return c;
}

MoistureCurve MoistureCurve::table(std::vector<double> c_w, std::vector<double> values) {
  if (c_w.size() < 2 || c_w.size() != values.size())
    throw DomainError("curve table needs >= 2 breakpoints with matching values");
  for (std::size_t i = 1; i < c_w.size(); ++i)
    if (!(c_w[i] > c_w[i - 1]))
      throw DomainError("curve table breakpoints must be strictly increasing");
  for (double v : values)
    if (!std::isfinite(v) || v < 0.0) throw DomainError("curve table values must be finite and >= 0");
  MoistureCurve c;
  c.kind_ = Kind::table;
  c.x_ = std::move(c_w);
  c.y_ = std::move(values);
  return c;
}

double MoistureCurve::operator()(double c_w, double /*temperature*/, double c_w_max) const {
  const double s = std::clamp(c_w / c_w_max, 0.0, 1.0);
  switch (kind_) {
    case Kind::constant:
      return value_;
    case Kind::exponential:
      return value_ * std::exp(rate_ * s);
    case Kind::saturating_exponential:
      return 1.0 - std::exp(-rate_ * s);
    case Kind::table: {
      if (c_w <= x_.front()) return y_.front();
      if (c_w >= x_.back()) return y_.back();
      const auto it = std::upper_bound(x_.begin(), x_.end(), c_w);
      const std::size_t j = static_cast<std::size_t>(it - x_.begin());
      const double w = (c_w - x_[j - 1]) / (x_[j] - x_[j - 1]);
      return y_[j - 1] + w * (y_[j] - y_[j - 1]);
    }
  }
  return 0.0;
}

void FoodMaterial::validate() const {
  std::ostringstream bad;
  auto need = [&](bool ok, const char* what) {
    if (!ok) bad << "  " << what << '\n';
  };
  need(porosity > 0.0 && porosity < 1.0, "porosity must lie in (0, 1)");
  need(positive(solid.density) && positive(solid.specific_heat) && positive(solid.conductivity),
       "solid density, specific_heat and conductivity must be > 0");
  need(positive(water.density) && positive(water.viscosity) && positive(water.specific_heat) &&
           positive(water.conductivity),
       "water density, viscosity, specific_heat and conductivity must be > 0");
  need(positive(gas.viscosity) && positive(gas.specific_heat) && positive(gas.conductivity) &&
           positive(gas.molar_mass),
       "gas viscosity, specific_heat, conductivity and molar_mass must be > 0");
  need(positive(vapor.molar_mass), "vapor molar_mass must be > 0");
  need(std::isfinite(gas_permeability) && gas_permeability >= 0.0, "gas_permeability must be >= 0");
  need(std::isfinite(water_permeability) && water_permeability >= 0.0,
       "water_permeability must be >= 0");
  need(std::isfinite(gas_diffusivity) && gas_diffusivity >= 0.0, "gas_diffusivity must be >= 0");
  // Zero is admitted so that pure-conduction sub-cases can switch phase change off.
  need(std::isfinite(evaporation_constant) && evaporation_constant >= 0.0,
       "evaporation_constant must be >= 0");
  need(positive(latent_heat), "latent_heat must be > 0");
  need(positive(gas_constant), "gas_constant must be > 0");
  const auto& r = relative_permeability;
  need(r.irreducible_saturation >= 0.0 && r.irreducible_saturation < 1.0,
       "relative_permeability.irreducible_saturation must lie in [0, 1)");
  need(r.water_exponent > 0.0, "relative_permeability.water_exponent must be > 0");

  if (bad.tellp() == 0 && positive(water.density)) {
    const double cmax = max_water_concentration();
    for (double s : {0.0, 0.25, 0.5, 0.75, 1.0}) {
      const double aw = water_activity(s * cmax, 300.0, cmax);
      const double dw = capillary_diffusivity(s * cmax, 300.0, cmax);
      need(std::isfinite(aw) && aw >= 0.0 && aw <= 1.0, "water_activity must stay in [0, 1]");
      need(std::isfinite(dw) && dw >= 0.0, "capillary_diffusivity must be finite and >= 0");
    }
  }
  if (bad.tellp() != 0) throw DomainError("invalid food material:\n" + bad.str());
}

Saturations saturations_unchecked(double water_conc, const FoodMaterial& m) noexcept {
  const double sw = water_conc / m.max_water_concentration();
  return {sw, 1.0 - sw};
}

Saturations saturations(double water_conc, const FoodMaterial& m) {
  const double cmax = m.max_water_concentration();
  if (!(water_conc >= 0.0 && water_conc <= cmax)) {
    std::ostringstream os;
    os << "water concentration c_w=" << water_conc << " kg/m^3 outside [0, " << cmax << "]";
    throw DomainError(os.str());
  }
  return saturations_unchecked(water_conc, m);
}

double regularized_gas_saturation(double water_conc, const FoodMaterial& m) noexcept {
  const double sg = 1.0 - water_conc / m.max_water_concentration();
  return std::clamp(sg, kSaturationEpsilon, 1.0 - kSaturationEpsilon);
}

double gas_density(double pressure, double temperature, double molar_mass) {
  if (!(pressure > 0.0) || !(temperature > 0.0))
    throw DomainError("gas density requires p > 0 and T > 0");
  return pressure * molar_mass / (kGasConstant * temperature);
}

double saturation_pressure_unchecked(double temperature) noexcept {
  constexpr double slope = kSaturationCurveLatentHeat * kSaturationCurveMolarMass / kGasConstant;
  return kAnchorPressure * std::exp(-slope * (1.0 / temperature - 1.0 / kAnchorTemperature));
}

double saturation_pressure(double temperature) {
  if (!(temperature >= kSaturationTmin && temperature <= kSaturationTmax)) {
    std::ostringstream os;
    os << "saturation pressure undefined at T=" << temperature << " K (domain [" << kSaturationTmin
       << ", " << kSaturationTmax << "])";
    throw DomainError(os.str());
  }
  return saturation_pressure_unchecked(temperature);
}

double equilibrium_vapor_density_unchecked(double temperature, double water_conc,
                                           const FoodMaterial& m) noexcept {
  const double aw = m.water_activity(water_conc, temperature, m.max_water_concentration());
  return aw * saturation_pressure_unchecked(temperature) * m.vapor.molar_mass /
         (m.gas_constant * temperature);
}

double equilibrium_vapor_density(double temperature, double water_conc, const FoodMaterial& m) {
  saturation_pressure(temperature);  // domain check
  return equilibrium_vapor_density_unchecked(temperature, water_conc, m);
}

double evaporation_rate_unchecked(const LocalState& s, const FoodMaterial& m) noexcept {
  const double sg_true = 1.0 - s.water_conc / m.max_water_concentration();
  if (sg_true <= 0.0) return 0.0;
  // rho_v S_g phi == c_v, so the rate needs no division by the gas fraction.
  const double sg = regularized_gas_saturation(s.water_conc, m);
  const double rho_eq = equilibrium_vapor_density_unchecked(s.temperature, s.water_conc, m);
  return m.evaporation_constant * (rho_eq * sg * m.porosity - s.vapor_conc);
}

double evaporation_rate(const LocalState& s, const FoodMaterial& m) {
  validate_state(s, m);
  saturation_pressure(s.temperature);
  return evaporation_rate_unchecked(s, m);
}

double vapor_density(const LocalState& s, const FoodMaterial& m) noexcept {
  return s.vapor_conc / (regularized_gas_saturation(s.water_conc, m) * m.porosity);
}

GasMixture gas_mixture(const LocalState& s, const FoodMaterial& m) noexcept {
  GasMixture g;
  const double rt = m.gas_constant * s.temperature;
  g.vapor_density = vapor_density(s, m);
  const double pv = g.vapor_density * rt / m.vapor.molar_mass;
  g.air_density = (s.pressure - pv) * m.gas.molar_mass / rt;
  g.density = g.vapor_density + g.air_density;
  g.vapor_fraction = g.density != 0.0 ? g.vapor_density / g.density : 0.0;
  g.molar_mass = g.density * rt / s.pressure;
  return g;
}

EffectiveProperties effective_properties_unchecked(const LocalState& s,
                                                   const FoodMaterial& m) noexcept {
  const auto sat = saturations_unchecked(s.water_conc, m);
  const double phi = m.porosity;
  const double rho_g = gas_mixture(s, m).density;
  EffectiveProperties e;
  e.heat_capacity = m.solid.density * (1.0 - phi) * m.solid.specific_heat +
                    rho_g * sat.gas * phi * m.gas.specific_heat +
                    m.water.density * sat.water * phi * m.water.specific_heat;
  e.conductivity = m.solid.conductivity * (1.0 - phi) + m.gas.conductivity * sat.gas * phi +
                   m.water.conductivity * sat.water * phi;
  return e;
}

EffectiveProperties effective_properties(const LocalState& s, const FoodMaterial& m) {
  validate_state(s, m);
  return effective_properties_unchecked(s, m);
}

double relative_permeability_water(double water_saturation, const RelativePermeability& r) noexcept {
  const double se =
      std::max(0.0, (water_saturation - r.irreducible_saturation) / (1.0 - r.irreducible_saturation));
  return std::pow(std::min(se, 1.0), r.water_exponent);
}

double relative_permeability_gas(double water_saturation, const RelativePermeability& r) noexcept {
  return std::max(0.0, r.gas_intercept - r.gas_slope * water_saturation);
}

double pore_reynolds(double mass_flux, double permeability, double viscosity) noexcept {
  return std::abs(mass_flux) * std::sqrt(permeability) / viscosity;
}

void validate_state(const LocalState& s, const FoodMaterial& m) {
  std::ostringstream bad;
  if (!(s.temperature > 0.0)) bad << " T=" << s.temperature;
  if (!(s.pressure > 0.0)) bad << " p=" << s.pressure;
  if (!(s.vapor_conc >= 0.0)) bad << " c_v=" << s.vapor_conc;
  if (!(s.water_conc >= 0.0 && s.water_conc <= m.max_water_concentration()))
    bad << " c_w=" << s.water_conc;
  if (bad.tellp() != 0) throw DomainError("invalid local state:" + bad.str());
}

}  // namespace dtwin::material
