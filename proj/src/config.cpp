#include <algorithm>
#include <filesystem>
#include <json.hpp>
#include <set>

#include "dtwin/config.hpp"
#include "dtwin/errors.hpp"
#include "dtwin/io.hpp"

namespace dtwin::config {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

/// Walks a JSON object, records consumed keys and collects problems
/// instead of stopping at the first one.
class Reader {
 public:
  Reader(const json& obj, std::string path, std::vector<std::string>& errors)
      : obj_(obj), path_(std::move(path)), errors_(errors) {
    if (!obj_.is_object()) fail(path_.empty() ? "<root>" : path_, "must be an object");
  }

  ~Reader() {
    if (!obj_.is_object()) return;
    for (const auto& [k, v] : obj_.items())
      if (!seen_.count(k)) fail(key(k), "unknown key");
  }

  bool has(const std::string& k) {
    seen_.insert(k);
    return obj_.is_object() && obj_.contains(k);
  }

  void number(const std::string& k, double& out, bool required = false) {
    if (!has(k)) return missing(k, required);
    const auto& v = obj_.at(k);
    if (!v.is_number()) return fail(key(k), "must be a number");
    out = v.get<double>();
  }

  template <class Int>
  void integer(const std::string& k, Int& out, bool required = false) {
    if (!has(k)) return missing(k, required);
    const auto& v = obj_.at(k);
    if (!v.is_number_integer() && !v.is_number_unsigned()) return fail(key(k), "must be an integer");
    if constexpr (std::is_unsigned_v<Int>) {
      if (v.is_number_integer() && v.get<long long>() < 0) return fail(key(k), "must be >= 0");
    }
    out = v.get<Int>();
  }

  void boolean(const std::string& k, bool& out) {
    if (!has(k)) return;
    const auto& v = obj_.at(k);
    if (!v.is_boolean()) return fail(key(k), "must be true or false");
    out = v.get<bool>();
  }

  void string(const std::string& k, std::string& out, bool required = false) {
    if (!has(k)) return missing(k, required);
    const auto& v = obj_.at(k);
    if (!v.is_string()) return fail(key(k), "must be a string");
    out = v.get<std::string>();
  }

  /// Sub-object, or a null JSON when absent.
  const json& object(const std::string& k, bool required = false) {
    static const json none;
    if (!has(k)) {
      missing(k, required);
      return none;
    }
    return obj_.at(k);
  }

  std::string key(const std::string& k) const { return path_.empty() ? k : path_ + "." + k; }
  void fail(const std::string& where, const std::string& what) { errors_.push_back(where + ": " + what); }
  std::vector<std::string>& errors() { return errors_; }

 private:
  void missing(const std::string& k, bool required) {
    if (required) fail(key(k), "missing");
  }

  const json& obj_;
  std::string path_;
  std::vector<std::string>& errors_;
  std::set<std::string> seen_;
};

void raise(const std::string& origin, const std::vector<std::string>& errors) {
  if (errors.empty()) return;
  std::string msg = origin + ": " + std::to_string(errors.size()) + " configuration error(s)";
  for (const auto& e : errors) msg += "\n  " + e;
  throw ConfigError(msg);
}

json parse_json(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(origin + ": not valid JSON: " + e.what());
  }
}

std::string read_config_file(const std::string& path, const char* what) {
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) throw ConfigError(std::string(what) + " not found: " + path);
  try {
    return io::read_text(path);
  } catch (const IoError& e) {
    throw ConfigError(e.what());
  }
}

void read_phase(Reader& parent, const std::string& name, material::PhaseProperties& p, bool gas) {
  const auto& j = parent.object(name, true);
  if (j.is_null()) return;
  Reader r(j, parent.key(name), parent.errors());
  if (gas) {
    p.ideal_gas = true;
    r.number("molar_mass_kg_per_mol", p.molar_mass, true);
  } else {
    r.number("density_kg_per_m3", p.density, true);
  }
  if (name != "solid") r.number("dynamic_viscosity_Pa_s", p.viscosity, true);
  r.number("specific_heat_J_per_kgK", p.specific_heat, true);
  r.number("thermal_conductivity_W_per_mK", p.conductivity, true);
}

void read_curve(Reader& parent, const std::string& name, material::MoistureCurve& out) {
  const auto& j = parent.object(name);
  if (j.is_null()) return;
  Reader r(j, parent.key(name), parent.errors());
  if (r.has("table")) {
    const auto& t = r.object("table");
    Reader tr(t, r.key("table"), r.errors());
    std::vector<double> x, y;
    for (const char* k : {"c_w_kg_per_m3", "values"}) {
      if (!tr.has(k)) {
        tr.fail(tr.key(k), "missing");
        continue;
      }
      const auto& a = t.at(k);
      auto& dst = std::string(k) == "values" ? y : x;
      if (!a.is_array() || !std::all_of(a.begin(), a.end(), [](const json& e) { return e.is_number(); })) {
        tr.fail(tr.key(k), "must be an array of numbers");
        continue;
      }
      for (const auto& e : a) dst.push_back(e.get<double>());
    }
    if (tr.errors().empty()) {
      try {
        out = material::MoistureCurve::table(x, y);
      } catch (const DomainError& e) {
        tr.fail(r.key("table"), e.what());
      }
    }
    return;
  }
  std::string kind;
  double value = 0.0, rate = 0.0;
  r.string("builtin", kind, true);
  if (kind == "constant") {
    r.number("value", value, true);
    out = material::MoistureCurve::constant(value);
  } else if (kind == "exponential") {
    r.number("value", value, true);
    r.number("rate", rate, true);
    out = material::MoistureCurve::exponential(value, rate);
  } else if (kind == "saturating_exponential") {
    r.number("rate", rate, true);
    out = material::MoistureCurve::saturating_exponential(rate);
  } else if (!kind.empty()) {
    r.fail(r.key("builtin"), "unknown curve '" + kind + "' (constant, exponential, saturating_exponential)");
  }
}

fs::path resolve(const std::string& base_dir, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() || base_dir.empty() ? path : fs::path(base_dir) / path;
}

}  // namespace

material::FoodMaterial parse_material(const std::string& text, const std::string& origin) {
  const json j = parse_json(text, origin);
  std::vector<std::string> errors;
  material::FoodMaterial m;
  {
    Reader r(j, "", errors);
    r.number("porosity", m.porosity, true);
    read_phase(r, "solid", m.solid, false);
    read_phase(r, "water", m.water, false);
    read_phase(r, "gas", m.gas, true);
    read_phase(r, "vapor", m.vapor, true);
    r.number("gas_permeability_m2", m.gas_permeability, true);
    r.number("water_permeability_m2", m.water_permeability, true);
    const auto& rp = r.object("relative_permeability");
    if (!rp.is_null()) {
      Reader rr(rp, "relative_permeability", errors);
      rr.number("irreducible_saturation", m.relative_permeability.irreducible_saturation);
      rr.number("water_exponent", m.relative_permeability.water_exponent);
      rr.number("gas_intercept", m.relative_permeability.gas_intercept);
      rr.number("gas_slope", m.relative_permeability.gas_slope);
    }
    read_curve(r, "capillary_diffusivity_m2_per_s", m.capillary_diffusivity);
    r.number("gas_diffusivity_m2_per_s", m.gas_diffusivity, true);
    read_curve(r, "water_activity", m.water_activity);
    r.number("evaporation_constant_per_s", m.evaporation_constant, true);
    r.number("latent_heat_J_per_kg", m.latent_heat, true);
  }
  raise(origin, errors);
  try {
    m.validate();
  } catch (const DomainError& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  return m;
}

material::FoodMaterial load_material(const std::string& path) {
  return parse_material(read_config_file(path, "material file"), path);
}

PipelineConfig parse_config(const std::string& text, const std::string& origin, const std::string& base_dir) {
  const json j = parse_json(text, origin);
  std::vector<std::string> errors;
  PipelineConfig c;
  auto& fc = c.fom_case;
  auto& bc = fc.boundary;
  auto& sc = fc.solver;
  double oven_T = 450.15;
  std::string oven_csv;
  {
    Reader r(j, "", errors);
    r.string("material_file", c.material_path, true);
    r.number("t_end_s", fc.t_end);
    r.string("output_dir", c.output_dir);
    r.integer("seed", c.seed);

    if (const auto& g = r.object("grid"); !g.is_null()) {
      Reader gr(g, "grid", errors);
      gr.number("length_m", fc.length);
      gr.integer("cells", fc.cells);
    }
    if (const auto& i = r.object("initial"); !i.is_null()) {
      Reader ir(i, "initial", errors);
      ir.number("T_K", fc.initial.temperature);
      ir.number("p_Pa", fc.initial.pressure);
      ir.number("S_w", fc.initial.water_saturation);
      ir.number("c_v_mol_per_m3", fc.initial.vapor_mol_per_m3);
    }
    if (const auto& b = r.object("boundary"); !b.is_null()) {
      Reader br(b, "boundary", errors);
      br.number("h_T_W_per_m2K", bc.heat_transfer);
      br.number("h_m_m_per_s", bc.mass_transfer);
      br.number("p_amb_Pa", bc.ambient_pressure);
      br.number("T_oven_K", oven_T);
      br.string("T_oven_csv", oven_csv);
      br.number("rho_v_oven_kg_per_m3", c.oven_vapor_density);
      br.boolean("rho_v_oven_cap_at_saturation", c.cap_vapor_at_saturation);
      if (br.has("T_oven_K") && br.has("T_oven_csv"))
        br.fail("boundary", "give T_oven_K or T_oven_csv, not both");
    }
    if (const auto& s = r.object("solver"); !s.is_null()) {
      Reader sr(s, "solver", errors);
      sr.number("dt_init_s", sc.dt_init);
      sr.number("dt_min_s", sc.dt_min);
      sr.number("dt_max_s", sc.dt_max);
      sr.number("newton_tolerance", sc.newton_tolerance);
      sr.integer("newton_max_iterations", sc.newton_max_iterations);
      sr.number("output_interval_s", sc.output_interval);
      sr.boolean("adaptive", sc.adaptive);
      sr.number("T_tolerance_K", sc.temperature_tolerance);
      sr.number("p_tolerance_Pa", sc.pressure_tolerance);
      sr.number("c_v_tolerance_kg_per_m3", sc.vapor_tolerance);
      sr.number("c_w_tolerance_kg_per_m3", sc.water_tolerance);
      sr.boolean("record_fields", sc.record_fields);
    }
    if (const auto& a = r.object("aprbs"); !a.is_null()) {
      Reader ar(a, "aprbs", errors);
      ar.number("T_min_K", c.aprbs.level_min);
      ar.number("T_max_K", c.aprbs.level_max);
      ar.number("hold_s", c.aprbs.hold);
      ar.number("f_min_Hz", c.aprbs.frequency_min);
      ar.number("f_max_Hz", c.aprbs.frequency_max);
      ar.number("duration_s", c.aprbs.duration);
    }
    if (const auto& s = r.object("sysid"); !s.is_null()) {
      Reader sr(s, "sysid", errors);
      sr.integer("output_lags", c.fit.output_lags);
      sr.integer("input_lags", c.fit.input_lags);
      sr.integer("max_degree", c.fit.max_degree);
      sr.number("ridge", c.fit.ridge);
      sr.number("ridge_fallback", c.fit.ridge_fallback);
      sr.integer("selection_budget", c.fit.selection_budget);
      sr.number("min_improvement", c.fit.min_improvement);
      sr.integer("threads", c.fit.threads);
      sr.number("sample_interval_s", c.sample_interval);
    }
    if (const auto& p = r.object("pipeline"); !p.is_null()) {
      Reader pr(p, "pipeline", errors);
      pr.integer("n_train", c.n_train);
      pr.integer("n_eval", c.n_eval);
    }
  }

  auto check = [&](bool ok, const char* key, const char* what) {
    if (!ok) errors.push_back(std::string(key) + ": " + what);
  };
  check(fc.length > 0.0, "grid.length_m", "must be > 0");
  check(fc.cells >= 3, "grid.cells", "must be >= 3");
  check(fc.t_end > 0.0, "t_end_s", "must be > 0");
  check(fc.initial.temperature > 0.0, "initial.T_K", "must be > 0");
  check(fc.initial.pressure > 0.0, "initial.p_Pa", "must be > 0");
  check(fc.initial.water_saturation >= 0.0 && fc.initial.water_saturation <= 1.0, "initial.S_w",
        "must lie in [0, 1]");
  check(fc.initial.vapor_mol_per_m3 >= 0.0, "initial.c_v_mol_per_m3", "must be >= 0");
  check(bc.heat_transfer >= 0.0, "boundary.h_T_W_per_m2K", "must be >= 0");
  check(bc.mass_transfer >= 0.0, "boundary.h_m_m_per_s", "must be >= 0");
  check(bc.ambient_pressure > 0.0, "boundary.p_amb_Pa", "must be > 0");
  check(oven_T > 0.0, "boundary.T_oven_K", "must be > 0");
  check(c.oven_vapor_density >= 0.0, "boundary.rho_v_oven_kg_per_m3", "must be >= 0");
  check(sc.dt_min > 0.0 && sc.dt_min <= sc.dt_max, "solver.dt_min_s", "must satisfy 0 < dt_min <= dt_max");
  check(sc.dt_init > 0.0, "solver.dt_init_s", "must be > 0");
  check(sc.newton_tolerance > 0.0, "solver.newton_tolerance", "must be > 0");
  check(sc.newton_max_iterations >= 1, "solver.newton_max_iterations", "must be >= 1");
  check(sc.output_interval > 0.0, "solver.output_interval_s", "must be > 0");
  check(c.sample_interval > 0.0, "sysid.sample_interval_s", "must be > 0");
  check(c.fit.output_lags >= 1, "sysid.output_lags", "must be >= 1");
  check(c.fit.input_lags >= 1, "sysid.input_lags", "must be >= 1");
  check(c.fit.max_degree >= 1, "sysid.max_degree", "must be >= 1");
  check(c.fit.ridge >= 0.0, "sysid.ridge", "must be >= 0");
  check(c.fit.ridge_fallback >= 0.0, "sysid.ridge_fallback", "must be >= 0");
  check(c.fit.selection_budget >= 0, "sysid.selection_budget", "must be >= 0");
  check(c.n_train >= 0, "pipeline.n_train", "must be >= 0");
  check(c.n_eval >= 0, "pipeline.n_eval", "must be >= 0");
  try {
    c.aprbs.validate();
  } catch (const ConfigError& e) {
    errors.push_back(std::string("aprbs: ") + e.what());
  }

  if (!c.material_path.empty()) {
    c.material_path = resolve(base_dir, c.material_path).string();
    std::error_code ec;
    if (!fs::is_regular_file(c.material_path, ec)) errors.push_back("material_file: file not found: " + c.material_path);
  }
  if (!oven_csv.empty()) {
    c.oven_csv = resolve(base_dir, oven_csv).string();
    std::error_code ec;
    if (!fs::is_regular_file(*c.oven_csv, ec)) errors.push_back("boundary.T_oven_csv: file not found: " + *c.oven_csv);
  }
  raise(origin, errors);

  fc.material = load_material(c.material_path);
  bc.oven_temperature =
      c.oven_csv ? fom::Forcing::of(io::read_signal_csv(*c.oven_csv)) : fom::Forcing::fixed(oven_T);
  bc.oven_vapor_density = oven_vapor_forcing(c, bc.oven_temperature);
  return c;
}

PipelineConfig load_config(const std::string& path) {
  const std::string text = read_config_file(path, "config file");
  return parse_config(text, path, fs::path(path).parent_path().string());
}

fom::Forcing oven_vapor_forcing(const PipelineConfig& cfg, const fom::Forcing& oven_temperature) {
  const double set = cfg.oven_vapor_density;
  if (!cfg.cap_vapor_at_saturation) return fom::Forcing::fixed(set);
  const auto& m = cfg.fom_case.material;
  auto capped = [&](double t_oven) {
    const double sat = material::saturation_pressure_unchecked(t_oven) * m.vapor.molar_mass / (m.gas_constant * t_oven);
    return std::min(set, sat);
  };
  if (!oven_temperature.series) return fom::Forcing::fixed(capped(oven_temperature.constant));
  std::vector<double> v;
  v.reserve(oven_temperature.series->size());
  for (double t : oven_temperature.series->values()) v.push_back(capped(t));
  return fom::Forcing::of(Signal(oven_temperature.series->times(), std::move(v)));
}

fom::BoundarySpec boundary_with_oven(const PipelineConfig& cfg, const fom::Forcing& oven) {
  fom::BoundarySpec bc = cfg.fom_case.boundary;
  bc.oven_temperature = oven;
  bc.oven_vapor_density = oven_vapor_forcing(cfg, oven);
  return bc;
}

}  // namespace dtwin::config
