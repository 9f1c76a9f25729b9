#include "dtwin/signal.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dtwin/errors.hpp"

namespace dtwin {

Signal::Signal(std::vector<double> times, std::vector<double> values)
    : times_(std::move(times)), values_(std::move(values)) {
  if (times_.size() != values_.size()) throw DomainError("signal times/values length mismatch");
  if (times_.empty()) throw DomainError("signal must hold at least one sample");
  for (std::size_t k = 0; k < values_.size(); ++k) {
    if (!std::isfinite(values_[k]) || !std::isfinite(times_[k]))
      throw DomainError("signal sample " + std::to_string(k) + " is not finite");
    if (k > 0 && !(times_[k] > times_[k - 1]))
      throw DomainError("signal times must be strictly increasing (sample " + std::to_string(k) + ")");
  }
  interval_ = times_.size() > 1 ? (times_.back() - times_.front()) / static_cast<double>(times_.size() - 1)
                                : 0.0;
}

Signal Signal::uniform(double start, double dt, std::vector<double> values) {
  if (!(dt > 0.0)) throw DomainError("signal sampling interval must be > 0");
  std::vector<double> t(values.size());
  for (std::size_t k = 0; k < t.size(); ++k) t[k] = start + dt * static_cast<double>(k);
  Signal s(std::move(t), std::move(values));
  s.interval_ = dt;
  return s;
}

double Signal::sample(double t) const {
  if (empty() || !(t >= times_.front() && t <= times_.back())) {
    std::ostringstream os;
    os << "signal sampled at t=" << t << " s outside [" << (empty() ? 0.0 : times_.front()) << ", "
       << (empty() ? 0.0 : times_.back()) << "]";
    throw DomainError(os.str());
  }
  return sample_clamped(t);
}

double Signal::sample_clamped(double t) const noexcept {
  if (t <= times_.front()) return values_.front();
  if (t >= times_.back()) return values_.back();
  const auto it = std::upper_bound(times_.begin(), times_.end(), t);
  const std::size_t j = static_cast<std::size_t>(it - times_.begin());
  const double t0 = times_[j - 1];
  if (t == t0) return values_[j - 1];
  const double w = (t - t0) / (times_[j] - t0);
  return values_[j - 1] + w * (values_[j] - values_[j - 1]);
}

}  // namespace dtwin
