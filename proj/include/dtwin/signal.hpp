#pragma once

#include <cstddef>
#include <vector>

namespace dtwin {

/// Uniformly sampled time series; times[k] = start + k * dt.
class Signal {
 public:
  Signal() = default;
  /// Throws DomainError if times are not strictly increasing or values not finite.
  Signal(std::vector<double> times, std::vector<double> values);
  static Signal uniform(double start, double dt, std::vector<double> values);

  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }
  const std::vector<double>& times() const noexcept { return times_; }
  const std::vector<double>& values() const noexcept { return values_; }
  double interval() const noexcept { return interval_; }
  double start() const { return times_.front(); }
  double end() const { return times_.back(); }

  /// Linear interpolation; exact at stored samples. Throws DomainError outside [start, end].
  double sample(double t) const;
  /// As sample(), but holds the end values outside the range.
  double sample_clamped(double t) const noexcept;

  friend bool operator==(const Signal&, const Signal&) = default;

 private:
  std::vector<double> times_;
  std::vector<double> values_;
  double interval_ = 0.0;
};

}  // namespace dtwin
