#pragma once

// Cell- and face-level building blocks shared by the public flux operators
// and the implicit residual.

#include <vector>

#include "dtwin/fom.hpp"

namespace dtwin::fom::detail {

struct CellProps {
  double T = 0.0;
  double p = 0.0;
  double cv = 0.0;
  double cw = 0.0;
  double sw = 0.0;           // unclamped
  double sg = 0.0;           // unclamped
  double rho_v = 0.0;
  double rho_g = 0.0;
  double omega_v = 0.0;
  double c_gas = 0.0;        // storage: c_v + S_g phi rho_a
  double gas_mobility = 0.0;    // k_g0 k_rg / mu_g
  double water_mobility = 0.0;  // k_w0 k_rw / mu_w
  double vapor_diffusion = 0.0; // phi S_g rho_g D_eff
  double capillary = 0.0;       // D_w
  double conductivity = 0.0;
  double heat_capacity = 0.0;
  double evaporation = 0.0;
};

CellProps cell_props(const LocalState& s, const FoodMaterial& m) noexcept;

struct FaceFlux {
  double gas = 0.0;
  double vapor = 0.0;
  double water = 0.0;
  double heat = 0.0;
};

/// Flux from cell `a` (at smaller y) to cell `b`; da, db are centre-to-face distances.
FaceFlux face_flux(const CellProps& a, const CellProps& b, double da, double db,
                   const FoodMaterial& m) noexcept;

/// Weighted harmonic mean of two cell coefficients across a face.
inline double harmonic(double ka, double kb, double da, double db) noexcept {
  if (ka <= 0.0 || kb <= 0.0) return 0.0;
  return (da + db) / (da / ka + db / kb);
}

/// Everything crossing y = 0 for a cell whose centre lies `half` below the surface.
struct SurfaceExchange {
  double gas_in = 0.0;     // +y, kg/(m^2 s)
  double vapor_in = 0.0;   // +y
  double water_in = 0.0;   // +y
  double heat_in = 0.0;    // W/m^2
  double darcy_gas_in = 0.0;  // Darcy part of gas_in, for enthalpy advection
  double surface_temperature = 0.0;
  double oven_temperature = 0.0;
};

SurfaceExchange surface_exchange(const CellProps& c, const LocalState& s, double half,
                                 const BoundarySpec& bc, double t, const FoodMaterial& m) noexcept;

}  // namespace dtwin::fom::detail
