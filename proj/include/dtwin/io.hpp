#pragma once

// File plumbing: atomic writes and the CSV formats exchanged between
// subcommands.

#include <string>
#include <vector>

#include "dtwin/fom.hpp"
#include "dtwin/signal.hpp"

namespace dtwin::io {

/// Writes to a temporary sibling and renames it over `path`, so readers
/// never see a partial file. Creates missing parent directories.
/// Throws IoError.
void write_atomic(const std::string& path, const std::string& content);

/// Throws IoError naming the path when it cannot be read.
std::string read_text(const std::string& path);

/// Long format: t_s,y_m,T_K,p_Pa,c_v_kgm3,c_w_kgm3,S_w
std::string trajectory_csv(const fom::Trajectory& traj, const fom::Grid1D& grid, double c_w_max);
/// t_s,T_surf_K,T_core_K,moisture_kgm2,massloss_kgm2
std::string probes_csv(const fom::Trajectory& traj);
/// t_s,value
std::string signal_csv(const Signal& s);

/// Reads a `t_s,value` file. Throws IoError / ConfigError.
Signal read_signal_csv(const std::string& path);

struct ProbeSeries {
  std::vector<double> time;
  std::vector<double> surface_temperature;
  std::vector<double> core_temperature;
  std::vector<double> moisture;
  std::vector<double> mass_loss;
};
/// Reads a probes CSV. Throws IoError / ConfigError.
ProbeSeries read_probes_csv(const std::string& path);

/// Shortest round-trip decimal form of a double.
std::string format_double(double v);

}  // namespace dtwin::io
