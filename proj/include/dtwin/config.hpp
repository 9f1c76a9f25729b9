#pragma once

// JSON configuration documents: the material file and the case/pipeline
// file. Physical keys carry their unit in the name (h_T_W_per_m2K).
// Every error found while loading is reported at once.

#include <cstdint>
#include <optional>
#include <string>

#include "dtwin/excite.hpp"
#include "dtwin/fom.hpp"
#include "dtwin/sysid.hpp"

namespace dtwin::config {

/// Parses a material document. `origin` names the source in messages.
/// Throws ConfigError listing every missing, mistyped, unknown or invalid key.
material::FoodMaterial parse_material(const std::string& text, const std::string& origin);
/// Throws ConfigError naming the path when the file is missing.
material::FoodMaterial load_material(const std::string& path);

struct PipelineConfig {
  std::string material_path;             // resolved against the config file's directory
  fom::Case fom_case;                    // oven temperature: constant or from `oven_csv`
  std::optional<std::string> oven_csv;   // t_s,value signal
  double oven_vapor_density = 0.1;       // kg/m^3 setpoint
  bool cap_vapor_at_saturation = true;   // rho_v,oven(t) = min(setpoint, rho_sat(T_oven(t)))
  excite::AprbsSpec aprbs;               // seed unused; cases derive sub-seeds
  sysid::FitConfig fit;
  double sample_interval = 10.0;         // s
  int n_train = 4;
  int n_eval = 5;
  std::string output_dir = "out";
  std::uint64_t seed = 42;
};

PipelineConfig parse_config(const std::string& text, const std::string& origin, const std::string& base_dir);
/// Loads the case document and the material it references.
PipelineConfig load_config(const std::string& path);

/// Oven vapor density forcing for a given oven temperature forcing.
fom::Forcing oven_vapor_forcing(const PipelineConfig& cfg, const fom::Forcing& oven_temperature);

/// Boundary of `cfg.fom_case` with the oven temperature replaced by `oven`
/// and the vapor forcing rebuilt to match.
fom::BoundarySpec boundary_with_oven(const PipelineConfig& cfg, const fom::Forcing& oven);

}  // namespace dtwin::config
