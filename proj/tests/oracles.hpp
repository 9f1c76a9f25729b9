#pragma once

// Independent reference solutions used by the tests. None of these call
// into the code under test except for plain data types.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "dtwin/fom.hpp"
#include "dtwin/sysid.hpp"

namespace oracle {

/// Steam-table saturation pressures (Pa).
inline constexpr double kSteamP323 = 12352.0;   // 50 C
inline constexpr double kSteamP27316 = 611.657;  // triple point

/// Transient conduction in a slab of thickness L, insulated at y = L and
/// convectively heated at y = 0 (h, T_inf), from uniform T0.
class RobinSlab {
 public:
  RobinSlab(double length, double conductivity, double heat_capacity, double h, double t_inf, double t0,
            int terms = 80)
      : L_(length), alpha_(conductivity / heat_capacity), t_inf_(t_inf), t0_(t0) {
    const double bi = h * length / conductivity;
    for (int n = 0; n < terms; ++n) {
      // root of b tan b = Bi in (n pi, n pi + pi/2)
      double lo = n * M_PI + 1e-14, hi = n * M_PI + 0.5 * M_PI - 1e-14;
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (mid * std::tan(mid) > bi ? hi : lo) = mid;
      }
      const double b = 0.5 * (lo + hi);
      beta_.push_back(b);
      coef_.push_back(4.0 * std::sin(b) / (2.0 * b + std::sin(2.0 * b)));
    }
  }

  /// Temperature at depth y (0 = heated face).
  double operator()(double y, double t) const {
    const double xi = (L_ - y) / L_;
    double s = 0.0;
    for (std::size_t n = 0; n < beta_.size(); ++n)
      s += coef_[n] * std::cos(beta_[n] * xi) * std::exp(-beta_[n] * beta_[n] * alpha_ * t / (L_ * L_));
    return t_inf_ + (t0_ - t_inf_) * s;
  }

 private:
  double L_, alpha_, t_inf_, t0_;
  std::vector<double> beta_, coef_;
};

/// Material whose only active mechanism is heat conduction with constant
/// coefficients (no flow, no diffusion, no phase change, negligible gas
/// heat capacity).
inline dtwin::material::FoodMaterial conduction_material() {
  dtwin::material::FoodMaterial m;
  m.porosity = 0.75;
  m.solid = {1528.0, 0.0, 1650.0, 0.21, 0.0, false};
  m.water = {1000.0, 0.988e-3, 4180.0, 0.59, 0.0, false};
  m.gas = {0.0, 1.8e-5, 1e-9, 0.026, 0.028964, true};
  m.vapor = {0.0, 1.0e-5, 2062.0, 0.025, 0.018015, true};
  m.gas_permeability = 0.0;
  m.water_permeability = 0.0;
  m.gas_diffusivity = 0.0;
  m.evaporation_constant = 0.0;
  m.capillary_diffusivity = dtwin::material::MoistureCurve::constant(0.0);
  return m;
}

/// Material of the shipped benchmark.
inline dtwin::material::FoodMaterial benchmark_material() {
  dtwin::material::FoodMaterial m;
  m.porosity = 0.75;
  m.solid = {1528.0, 0.0, 1650.0, 0.21, 0.0, false};
  m.water = {1000.0, 0.988e-3, 4180.0, 0.59, 0.0, false};
  m.gas = {0.0, 1.8e-5, 1006.0, 0.026, 0.028964, true};
  m.vapor = {0.0, 1.0e-5, 2062.0, 0.025, 0.018015, true};
  m.gas_permeability = 1e-14;
  m.water_permeability = 1e-17;
  m.gas_diffusivity = 2.6e-6;
  return m;
}

/// Explicit-Euler integration of the porous-medium balances on a uniform
/// grid, written directly from the governing equations: gas, vapor and
/// water mass, and energy with upwind enthalpy advection. Pressure is
/// recovered from the gas inventory after each substep.
class ExplicitFom {
 public:
  struct Cell {
    double T, p, cv, cw;
  };

  ExplicitFom(const dtwin::material::FoodMaterial& m, double length, std::size_t n, double h_T, double h_m,
              double p_amb, double t_oven, double rho_oven)
      : m_(m), n_(n), dy_(length / static_cast<double>(n)), hT_(h_T), hm_(h_m), pamb_(p_amb),
        Toven_(t_oven), rho_oven_(rho_oven) {}

  std::vector<Cell> advance(std::vector<Cell> s, double t_end, double dt) const {
    const auto steps = static_cast<std::size_t>(std::llround(t_end / dt));
    for (std::size_t k = 0; k < steps; ++k) s = substep(s, dt);
    return s;
  }

 private:
  struct Derived {
    double sw, sg, rho_v, rho_a, rho_g, omega, c_gas, kg, kw, dv, dw, keff, rhoc, evap;
  };

  Derived derive(const Cell& c) const {
    const double phi = m_.porosity, R = m_.gas_constant;
    Derived d{};
    d.sw = c.cw / (phi * m_.water.density);
    d.sg = 1.0 - d.sw;
    const double sg = std::clamp(d.sg, 1e-6, 1.0 - 1e-6), sw = 1.0 - sg;
    d.rho_v = c.cv / (sg * phi);
    d.rho_a = (c.p - d.rho_v * R * c.T / m_.vapor.molar_mass) * m_.gas.molar_mass / (R * c.T);
    d.rho_g = d.rho_v + d.rho_a;
    d.omega = d.rho_v / d.rho_g;
    d.c_gas = c.cv + d.sg * phi * d.rho_a;
    const auto& rp = m_.relative_permeability;
    const double se = std::max(0.0, (sw - rp.irreducible_saturation) / (1.0 - rp.irreducible_saturation));
    d.kw = m_.water_permeability * std::pow(se, rp.water_exponent) / m_.water.viscosity;
    d.kg = m_.gas_permeability * std::max(0.0, rp.gas_intercept - rp.gas_slope * sw) / m_.gas.viscosity;
    d.dv = phi * sg * d.rho_g * m_.gas_diffusivity;
    d.dw = m_.capillary_diffusivity(c.cw, c.T, phi * m_.water.density);
    d.keff = m_.solid.conductivity * (1 - phi) + m_.gas.conductivity * d.sg * phi + m_.water.conductivity * d.sw * phi;
    d.rhoc = m_.solid.density * (1 - phi) * m_.solid.specific_heat + d.rho_g * d.sg * phi * m_.gas.specific_heat +
             m_.water.density * d.sw * phi * m_.water.specific_heat;
    // Clausius-Clapeyron through the normal boiling point.
    const double psat = 101325.0 * std::exp(-2.39e6 * 0.018015 / R * (1.0 / c.T - 1.0 / 373.15));
    const double aw = m_.water_activity(c.cw, c.T, phi * m_.water.density);
    d.evap = m_.evaporation_constant * (aw * psat * m_.vapor.molar_mass / (R * c.T) - d.rho_v) * sg * phi;
    return d;
  }

  static double hm(double a, double b) { return a > 0 && b > 0 ? 2 * a * b / (a + b) : 0.0; }

  std::vector<Cell> substep(const std::vector<Cell>& s, double dt) const {
    const double phi = m_.porosity, R = m_.gas_constant;
    std::vector<Derived> d(n_);
    for (std::size_t i = 0; i < n_; ++i) d[i] = derive(s[i]);
    // Face k between cells k-1 and k; positive toward larger y.
    std::vector<double> jg(n_ + 1, 0.0), jv(n_ + 1, 0.0), jw(n_ + 1, 0.0), q(n_ + 1, 0.0);
    for (std::size_t k = 1; k < n_; ++k) {
      const auto &a = d[k - 1], &b = d[k];
      const double u = -hm(a.kg, b.kg) * (s[k].p - s[k - 1].p) / dy_;
      const auto& up = u >= 0 ? a : b;
      jg[k] = up.rho_g * u;
      jv[k] = up.rho_v * u - hm(a.dv, b.dv) * (b.omega - a.omega) / dy_;
      jw[k] = -m_.water.density * hm(a.kw, b.kw) * (s[k].p - s[k - 1].p) / dy_ -
              hm(a.dw, b.dw) * (s[k].cw - s[k - 1].cw) / dy_;
      q[k] = -hm(a.keff, b.keff) * (s[k].T - s[k - 1].T) / dy_;
    }
    // Surface face: Darcy to p_amb over half a cell, convective exchange.
    const auto& c0 = d[0];
    const double half = 0.5 * dy_;
    const double u0 = -c0.kg * (s[0].p - pamb_) / half;
    double gas_darcy;
    if (u0 >= 0) {
      const double pv = rho_oven_ * R * Toven_ / m_.vapor.molar_mass;
      const double rho_g_oven = rho_oven_ + (pamb_ - pv) * m_.gas.molar_mass / (R * Toven_);
      gas_darcy = rho_g_oven * u0;
      jv[0] = rho_oven_ * u0;
    } else {
      gas_darcy = c0.rho_g * u0;
      jv[0] = c0.rho_v * u0;
    }
    const double sw0 = std::clamp(c0.sw, 0.0, 1.0);
    const double excess = c0.rho_v - rho_oven_;
    const double out_v = hm_ * phi * (1 - sw0) * excess;
    const double out_w = hm_ * phi * sw0 * excess;
    jg[0] = gas_darcy - out_v;
    jv[0] -= out_v;
    jw[0] = -out_w;
    const double cond = c0.keff / half;
    const double Ts = (hT_ * Toven_ - m_.latent_heat * out_w + cond * s[0].T) / (hT_ + cond);
    q[0] = hT_ * (Toven_ - Ts) - m_.latent_heat * out_w;

    std::vector<Cell> out = s;
    for (std::size_t i = 0; i < n_; ++i) {
      const double a = dt / dy_;
      double adv = 0.0;
      const double gl = i == 0 ? gas_darcy : jg[i];
      const double tl = i == 0 ? Toven_ : s[i - 1].T;
      if (gl > 0) adv += gl * m_.gas.specific_heat * (s[i].T - tl);
      if (i > 0 && jw[i] > 0) adv += jw[i] * m_.water.specific_heat * (s[i].T - s[i - 1].T);
      if (i + 1 < n_) {
        if (jg[i + 1] < 0) adv -= jg[i + 1] * m_.gas.specific_heat * (s[i].T - s[i + 1].T);
        if (jw[i + 1] < 0) adv -= jw[i + 1] * m_.water.specific_heat * (s[i].T - s[i + 1].T);
      }
      const double ev = d[i].evap;
      out[i].T = s[i].T + (-(a * (q[i + 1] - q[i])) - dt * adv / dy_ - dt * m_.latent_heat * ev) / d[i].rhoc;
      const double cg = d[i].c_gas - a * (jg[i + 1] - jg[i]) + dt * ev;
      out[i].cv = s[i].cv - a * (jv[i + 1] - jv[i]) + dt * ev;
      out[i].cw = s[i].cw - a * (jw[i + 1] - jw[i]) - dt * ev;
      // Recover p from the gas inventory at the new T, c_v, c_w.
      const double sg = 1.0 - out[i].cw / (phi * m_.water.density);
      const double sgr = std::clamp(sg, 1e-6, 1.0 - 1e-6);
      const double rho_v = out[i].cv / (sgr * phi);
      const double rho_a = (cg - out[i].cv) / (sg * phi);
      out[i].p = rho_v * R * out[i].T / m_.vapor.molar_mass + rho_a * R * out[i].T / m_.gas.molar_mass;
    }
    return out;
  }

  dtwin::material::FoodMaterial m_;
  std::size_t n_;
  double dy_, hT_, hm_, pamb_, Toven_, rho_oven_;
};

/// Piecewise-constant random input with holds of `hold` samples.
inline std::vector<double> random_steps(std::size_t n, std::size_t hold, double lo, double hi, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<double> u(n);
  double level = dist(rng);
  for (std::size_t k = 0; k < n; ++k) {
    if (k % hold == 0) level = dist(rng);
    u[k] = level;
  }
  return u;
}

/// y(k) = f(y(k-1), u(k-1)) from y(0) = y0.
template <class F>
std::vector<double> simulate_siso(const std::vector<double>& u, double y0, F f) {
  std::vector<double> y(u.size());
  y[0] = y0;
  for (std::size_t k = 1; k < u.size(); ++k) y[k] = f(y[k - 1], u[k - 1]);
  return y;
}

inline dtwin::sysid::IoCase make_case(const std::string& id, std::vector<double> u, std::vector<double> y,
                                      double dt = 1.0) {
  return {id, dtwin::Signal::uniform(0.0, dt, std::move(u)), dtwin::Signal::uniform(0.0, dt, std::move(y))};
}

}  // namespace oracle
