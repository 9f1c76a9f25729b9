#pragma once

// ROM runtime: portable model files, timed prediction, scenario fan-out
// and speedup benchmarking against the full-order model.

#include <optional>
#include <string>
#include <vector>

#include "dtwin/fom.hpp"
#include "dtwin/sysid.hpp"

namespace dtwin::twin {

inline constexpr int kModelFormatVersion = 1;

/// Model file text:
///   dtrom <version>
///   <one-line JSON payload, floating values as C99 hex-float strings>
///   crc32 <8 hex digits of the payload line>
std::string serialize_model(const sysid::NarxModel& model);
/// Checks version, then checksum (a missing checksum line counts as a
/// mismatch), then parses. Throws ModelVersionError, ModelChecksumError or
/// ModelParseError.
sysid::NarxModel deserialize_model(const std::string& text);

/// Atomic write (temporary file + rename). Throws ModelFileError on I/O failure.
void export_model(const sysid::NarxModel& model, const std::string& path);
sysid::NarxModel import_model(const std::string& path);

struct Timed {
  Signal output;
  double wall_seconds = 0.0;
};

/// free_run with wall-clock instrumentation.
Timed predict(const sysid::NarxModel& model, const Signal& input, const std::vector<double>& warmup);

struct BenchReport {
  double horizon = 0.0;             // s of process time predicted
  double rom_wall = 0.0;            // s, median
  double fom_wall = 0.0;            // s, median; 0 when not measured
  double speedup_realtime = 0.0;    // horizon / rom_wall
  double speedup_vs_fom = 0.0;      // fom_wall / rom_wall
  double predictions_per_minute = 0.0;  // of a one-hour horizon
  int repetitions = 0;
  std::string method;
};

std::string bench_csv_header();
std::string to_csv_row(const BenchReport& r);
std::string to_text(const BenchReport& r);

struct FanoutResult {
  std::vector<std::optional<Signal>> outputs;  // by candidate index
  std::vector<std::string> errors;             // empty string when the candidate succeeded
  BenchReport report;
};

/// Independent free runs of every candidate, concurrently; a divergent
/// candidate is flagged in `errors` while the others are returned.
FanoutResult scenario_fanout(const sysid::NarxModel& model, const std::vector<Signal>& candidates,
                             const std::vector<double>& warmup, unsigned threads = 0);

/// Runs the FOM case and the ROM over [0, horizon] with the case's oven
/// temperature as input (median of `repetitions` timings each). The ROM
/// warm-starts from the FOM core temperature.
BenchReport bench_speedup(const sysid::NarxModel& model, const fom::Case& fom_case, double horizon,
                          int repetitions = 5);

/// Core-temperature output and oven-temperature input of a trajectory,
/// resampled at `interval` over [0, horizon].
sysid::IoCase io_from_trajectory(const fom::Trajectory& traj, const std::string& id, double interval,
                                 double horizon);

}  // namespace dtwin::twin
