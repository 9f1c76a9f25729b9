#pragma once

// Amplitude-modulated pseudo-random binary signals (APRBS) with smooth
// half-cosine transitions, used as oven-temperature excitation.

#include <cstdint>

#include "dtwin/signal.hpp"

namespace dtwin::excite {

struct AprbsSpec {
  double level_min = 280.0;        // K
  double level_max = 450.0;        // K
  double hold = 500.0;             // minimum hold time, s
  double frequency_min = 0.0017;   // Hz
  double frequency_max = 0.0017;   // Hz
  double duration = 12500.0;       // s
  std::uint64_t seed = 0;

  /// Throws ConfigError listing every violated constraint.
  void validate() const;
};

/// Holds of duration U[hold, 2 hold] at levels U[level_min, level_max],
/// joined by half-cosine transitions lasting 1/(2f), f ~ U[f_min, f_max].
/// A tail too short for another transition and a full hold extends the
/// current hold. Samples lie at k * sampling_dt, k = 0..floor(duration/dt).
///
/// Throws ConfigError when sampling_dt gives fewer than 8 samples per
/// half-period of frequency_max.
Signal generate_aprbs(const AprbsSpec& spec, double sampling_dt);

/// Linear interpolation of a signal; throws DomainError outside its range.
double sample(const Signal& signal, double t);

/// Deterministic per-index seed derived from a global seed (splitmix64 of
/// global + (index + 1) * 0x9E3779B97F4A7C15).
std::uint64_t sub_seed(std::uint64_t global, std::uint64_t index) noexcept;

}  // namespace dtwin::excite
