#include "dtwin/excite.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "dtwin/errors.hpp"

namespace dtwin::excite {

namespace {

// Uniform double in [0, 1) from the top 53 bits; independent of the
// standard library's distribution implementation.
double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double uniform(std::mt19937_64& rng, double lo, double hi) { return lo + (hi - lo) * unit(rng); }

struct Segment {
  double start;
  double end;
  double from;
  double to;  // equal to `from` for a hold
};

}  // namespace

void AprbsSpec::validate() const {
  std::ostringstream bad;
  if (!(level_min < level_max)) bad << " level_min must be < level_max;";
  if (!(hold >= 0.0)) bad << " hold must be >= 0;";
  if (!(frequency_min > 0.0 && frequency_min <= frequency_max))
    bad << " need 0 < frequency_min <= frequency_max;";
  if (!(duration > 0.0)) bad << " duration must be > 0;";
  if (bad.tellp() != 0) throw ConfigError("invalid APRBS spec:" + bad.str());
}

Signal generate_aprbs(const AprbsSpec& spec, double sampling_dt) {
  spec.validate();
  const double shortest = 0.5 / spec.frequency_max;
  if (!(sampling_dt > 0.0) || sampling_dt > shortest / 8.0)
    throw ConfigError("APRBS sampling interval " + std::to_string(sampling_dt) +
                      " s does not resolve a " + std::to_string(shortest) +
                      " s transition with 8 samples");

  std::mt19937_64 rng(spec.seed);
  std::vector<Segment> segs;
  double t = 0.0;
  double level = uniform(rng, spec.level_min, spec.level_max);
  while (t < spec.duration) {
    const double h = uniform(rng, spec.hold, 2.0 * spec.hold);
    const double f = uniform(rng, spec.frequency_min, spec.frequency_max);
    const double ramp = 0.5 / f;
    const double next = uniform(rng, spec.level_min, spec.level_max);
    // Holds end on the sampling grid and span at least h between their
    // first and last samples.
    const double first = std::ceil(t / sampling_dt - 1e-9) * sampling_dt;
    double end = first + std::ceil(h / sampling_dt - 1e-9) * sampling_dt;
    if (end + ramp + spec.hold >= spec.duration) end = spec.duration;
    segs.push_back({t, end, level, level});
    t = end;
    if (t >= spec.duration) break;
    segs.push_back({t, t + ramp, level, next});
    t += ramp;
    level = next;
  }

  const auto n = static_cast<std::size_t>(std::floor(spec.duration / sampling_dt + 1e-9)) + 1;
  std::vector<double> values(n);
  std::size_t s = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double tk = static_cast<double>(k) * sampling_dt;
    while (s + 1 < segs.size() && tk >= segs[s].end) ++s;
    const auto& g = segs[s];
    double v = g.from;
    if (g.to != g.from) {
      const double w = 0.5 * (1.0 - std::cos(std::numbers::pi * (tk - g.start) / (g.end - g.start)));
      v = g.from + (g.to - g.from) * w;
    }
    values[k] = std::clamp(v, spec.level_min, spec.level_max);
  }
  return Signal::uniform(0.0, sampling_dt, std::move(values));
}

double sample(const Signal& signal, double t) { return signal.sample(t); }

std::uint64_t sub_seed(std::uint64_t global, std::uint64_t index) noexcept {
  std::uint64_t z = global + (index + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace dtwin::excite
