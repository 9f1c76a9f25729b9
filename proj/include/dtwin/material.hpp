#pragma once

// Thermophysical and constitutive relations of a hygroscopic porous food.
// Everything here is a pure function of its arguments.

#include <string>
#include <vector>

namespace dtwin::material {

inline constexpr double kGasConstant = 8.314462618;  // J/(mol K)

struct PhaseProperties {
  double density = 0.0;        // kg/m^3; unused for ideal-gas phases
  double viscosity = 0.0;      // Pa s
  double specific_heat = 0.0;  // J/(kg K)
  double conductivity = 0.0;   // W/(m K)
  double molar_mass = 0.0;     // kg/mol; required for ideal-gas phases
  bool ideal_gas = false;
};

/// A scalar curve f(c_w, T). Built-in forms are parameterised in water
/// saturation S_w = c_w / (phi rho_w); tables are breakpoints in c_w.
class MoistureCurve {
 public:
  enum class Kind {
    constant,                // value
    exponential,             // value * exp(rate * S_w)
    saturating_exponential,  // 1 - exp(-rate * S_w)
    table                    // piecewise linear in c_w, clamped at the ends
  };

  static MoistureCurve constant(double value);
  static MoistureCurve exponential(double value, double rate);
  static MoistureCurve saturating_exponential(double rate);
  static MoistureCurve table(std::vector<double> c_w, std::vector<double> values);

  double operator()(double c_w, double temperature, double c_w_max) const;

  Kind kind() const noexcept { return kind_; }
  double value() const noexcept { return value_; }
  double rate() const noexcept { return rate_; }
  const std::vector<double>& breakpoints() const noexcept { return x_; }
  const std::vector<double>& values() const noexcept { return y_; }

 private:
  Kind kind_ = Kind::constant;
  double value_ = 0.0;
  double rate_ = 0.0;
  std::vector<double> x_;
  std::vector<double> y_;
};

/// k_rw = max(0, (S_w - S_ir)/(1 - S_ir))^n, k_rg = max(0, a - b S_w).
struct RelativePermeability {
  double irreducible_saturation = 0.08;
  double water_exponent = 3.0;
  double gas_intercept = 1.01;
  double gas_slope = 1.01;
};

struct FoodMaterial {
  double porosity = 0.75;
  PhaseProperties solid;
  PhaseProperties water;
  PhaseProperties gas;  // air; viscosity/conductivity/c_p are used for the mixture
  PhaseProperties vapor;
  double gas_permeability = 0.0;    // intrinsic, m^2
  double water_permeability = 0.0;  // intrinsic, m^2
  RelativePermeability relative_permeability;
  MoistureCurve capillary_diffusivity = MoistureCurve::constant(1e-8);  // m^2/s
  double gas_diffusivity = 0.0;                                         // D_eff,g, m^2/s
  MoistureCurve water_activity = MoistureCurve::saturating_exponential(10.0);
  double evaporation_constant = 1000.0;  // 1/s
  double latent_heat = 2.26e6;           // J/kg
  double gas_constant = kGasConstant;

  /// Water concentration at full saturation, phi * rho_w.
  double max_water_concentration() const { return porosity * water.density; }

  /// Throws DomainError listing every violated invariant.
  void validate() const;
};

struct LocalState {
  double temperature = 0.0;    // K
  double pressure = 0.0;       // Pa
  double vapor_conc = 0.0;     // c_v, kg/m^3
  double water_conc = 0.0;     // c_w, kg/m^3
};

struct Saturations {
  double water = 0.0;
  double gas = 1.0;
};

/// Clamp band used inside flux and evaporation evaluation.
inline constexpr double kSaturationEpsilon = 1e-6;

Saturations saturations(double water_conc, const FoodMaterial& m);
/// Unchecked variant used by the discrete operators; values may leave [0,1].
Saturations saturations_unchecked(double water_conc, const FoodMaterial& m) noexcept;
/// Gas saturation clamped to [eps, 1 - eps].
double regularized_gas_saturation(double water_conc, const FoodMaterial& m) noexcept;

double gas_density(double pressure, double temperature, double molar_mass);

inline constexpr double kSaturationTmin = 273.15;
inline constexpr double kSaturationTmax = 500.0;
/// Slope latent heat of the saturation curve: mean of water's latent heat
/// between 273 K and 373 K.
inline constexpr double kSaturationCurveLatentHeat = 2.39e6;
inline constexpr double kSaturationCurveMolarMass = 0.018015;

/// Clausius-Clapeyron curve through (373.15 K, 101325 Pa).
double saturation_pressure(double temperature);
double saturation_pressure_unchecked(double temperature) noexcept;

double equilibrium_vapor_density(double temperature, double water_conc, const FoodMaterial& m);
double equilibrium_vapor_density_unchecked(double temperature, double water_conc,
                                           const FoodMaterial& m) noexcept;

/// Volumetric evaporation rate (kg m^-3 s^-1); negative means condensation.
double evaporation_rate(const LocalState& s, const FoodMaterial& m);
double evaporation_rate_unchecked(const LocalState& s, const FoodMaterial& m) noexcept;

/// Vapor partial density in the pore gas, c_v / (S_g phi) with regularized S_g.
double vapor_density(const LocalState& s, const FoodMaterial& m) noexcept;

/// Gas-mixture composition from Dalton's law. Air density is
/// (p - p_v) M_air / (R T), so 1/M_g is the mass-fraction harmonic mix.
struct GasMixture {
  double vapor_density = 0.0;  // rho_v
  double air_density = 0.0;    // rho_a
  double density = 0.0;        // rho_g
  double vapor_fraction = 0.0; // omega_v
  double molar_mass = 0.0;     // M_g
};
GasMixture gas_mixture(const LocalState& s, const FoodMaterial& m) noexcept;

struct EffectiveProperties {
  double heat_capacity = 0.0;  // (rho c_p)_eff, J/(m^3 K)
  double conductivity = 0.0;   // k_eff, W/(m K)
};
EffectiveProperties effective_properties(const LocalState& s, const FoodMaterial& m);
EffectiveProperties effective_properties_unchecked(const LocalState& s,
                                                   const FoodMaterial& m) noexcept;

double relative_permeability_water(double water_saturation, const RelativePermeability& r) noexcept;
double relative_permeability_gas(double water_saturation, const RelativePermeability& r) noexcept;

/// Pore Reynolds number rho |v| sqrt(k) / mu of a Darcy flux. Diagnostic only.
double pore_reynolds(double mass_flux, double permeability, double viscosity) noexcept;

/// Throws DomainError if the state violates LocalState invariants.
void validate_state(const LocalState& s, const FoodMaterial& m);

}  // namespace dtwin::material
