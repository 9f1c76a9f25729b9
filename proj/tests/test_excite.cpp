#include <doctest.h>

#include <cmath>
#include <numbers>
#include <set>

#include "dtwin/errors.hpp"
#include "dtwin/excite.hpp"

using namespace dtwin;
using namespace dtwin::excite;

namespace {

struct Run {
  std::size_t first, last;  // sample indices of a maximal constant run
};

std::vector<Run> constant_runs(const Signal& s) {
  std::vector<Run> runs;
  const auto& v = s.values();
  std::size_t start = 0;
  for (std::size_t k = 1; k <= v.size(); ++k) {
    if (k == v.size() || v[k] != v[k - 1]) {
      if (k - 1 > start) runs.push_back({start, k - 1});
      start = k;
    }
  }
  return runs;
}

AprbsSpec spec_with(std::uint64_t seed, double duration = 10000.0) {
  AprbsSpec s;
  s.seed = seed;
  s.duration = duration;
  return s;
}

}  // namespace

TEST_CASE("same seed gives the same signal, different seeds differ") {
  const auto a = generate_aprbs(spec_with(42), 10.0);
  const auto b = generate_aprbs(spec_with(42), 10.0);
  const auto c = generate_aprbs(spec_with(43), 10.0);
  CHECK(a == b);
  CHECK_FALSE(a == c);
  CHECK(a.size() == 1001);
  CHECK(a.interval() == 10.0);
  CHECK(a.end() == doctest::Approx(10000.0));
}

TEST_CASE("signal properties over many seeds") {
  double sum = 0.0;
  std::size_t count = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto spec = spec_with(sub_seed(7, seed));
    const auto s = generate_aprbs(spec, 1.0);
    CAPTURE(seed);
    for (double v : s.values()) {
      REQUIRE(v >= spec.level_min);
      REQUIRE(v <= spec.level_max);
      sum += v;
      ++count;
    }

    // Every hold lasts at least the minimum hold time.
    const auto runs = constant_runs(s);
    REQUIRE(!runs.empty());
    CHECK(runs.size() <= 20);
    for (const auto& r : runs) CHECK(s.times()[r.last] - s.times()[r.first] >= spec.hold - 1e-9);
    CHECK(runs.front().first == 0);
    CHECK(runs.back().last == s.size() - 1);

    // Transitions last 1/(2f).
    const double ramp = 0.5 / spec.frequency_max;
    for (std::size_t i = 0; i + 1 < runs.size(); ++i) {
      const double gap = s.times()[runs[i + 1].first] - s.times()[runs[i].last];
      CHECK(gap >= ramp - 1e-9);
      CHECK(gap <= ramp + 1.0 + 1e-9);
    }

    // Slope of a half cosine never exceeds pi * amplitude * f.
    const double bound = std::numbers::pi * (spec.level_max - spec.level_min) * spec.frequency_max;
    for (std::size_t k = 1; k < s.size(); ++k)
      CHECK(std::abs(s.values()[k] - s.values()[k - 1]) / s.interval() <= bound * (1.0 + 1e-9));
  }
  const double mean = sum / static_cast<double>(count);
  CHECK(mean == doctest::Approx(365.0).epsilon(0.05));
}

TEST_CASE("transition duration example") {
  AprbsSpec spec = spec_with(3);
  CHECK(0.5 / spec.frequency_max == doctest::Approx(294.1).epsilon(1e-3));
  spec.frequency_min = 0.001;
  const auto s = generate_aprbs(spec, 2.0);
  const auto runs = constant_runs(s);
  for (std::size_t i = 0; i + 1 < runs.size(); ++i) {
    const double gap = s.times()[runs[i + 1].first] - s.times()[runs[i].last];
    CHECK(gap >= 294.1 - 1e-6);
    CHECK(gap <= 500.0 + 2.0);
  }
}

TEST_CASE("sampling must resolve the fastest transition") {
  const auto spec = spec_with(1);
  CHECK_NOTHROW(generate_aprbs(spec, 36.0));
  CHECK_THROWS_AS(generate_aprbs(spec, 40.0), ConfigError);
  CHECK_THROWS_AS(generate_aprbs(spec, 0.0), ConfigError);
}

TEST_CASE("invalid specs list every problem") {
  AprbsSpec spec;
  spec.level_min = 500.0;
  spec.duration = -1.0;
  try {
    generate_aprbs(spec, 10.0);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const std::string what = e.what();
    CHECK(what.find("level_min") != std::string::npos);
    CHECK(what.find("duration") != std::string::npos);
  }
}

TEST_CASE("sample interpolates and rejects out-of-range times") {
  const auto s = Signal::uniform(0.0, 10.0, {300.0, 400.0, 350.0});
  CHECK(sample(s, 0.0) == 300.0);
  CHECK(sample(s, 10.0) == 400.0);
  CHECK(sample(s, 5.0) == doctest::Approx(350.0));
  CHECK(sample(s, 15.0) == doctest::Approx(375.0));
  CHECK_THROWS_AS(sample(s, -1.0), DomainError);
  CHECK_THROWS_AS(sample(s, 20.5), DomainError);
  CHECK(s.sample_clamped(100.0) == 350.0);
}

TEST_CASE("sub seeds are deterministic and distinct") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 1000; ++i) seen.insert(sub_seed(42, i));
  CHECK(seen.size() == 1000);
  CHECK(sub_seed(42, 3) == sub_seed(42, 3));
  CHECK(sub_seed(42, 3) != sub_seed(43, 3));
}
