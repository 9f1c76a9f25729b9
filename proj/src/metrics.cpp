#include "dtwin/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "dtwin/errors.hpp"

namespace dtwin::metrics {

namespace {

void check_lengths(std::span<const double> r, std::span<const double> f) {
  if (r.size() != f.size())
    throw DomainError("series length mismatch (" + std::to_string(r.size()) + " vs " +
                      std::to_string(f.size()) + ")");
  if (r.empty()) throw DomainError("error metrics need at least one sample");
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

double mape(std::span<const double> reference, std::span<const double> forecast) {
  check_lengths(reference, forecast);
  double sum = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    const double denom = 0.5 * std::abs(reference[i] + forecast[i]);
    if (denom == 0.0) throw DomainError("MAPE undefined: R+F = 0 at index " + std::to_string(i));
    sum += std::abs(reference[i] - forecast[i]) / denom;
  }
  return 100.0 * sum / static_cast<double>(reference.size());
}

double rmse(std::span<const double> reference, std::span<const double> forecast) {
  check_lengths(reference, forecast);
  double sum = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    const double e = reference[i] - forecast[i];
    sum += e * e;
  }
  return std::sqrt(sum / static_cast<double>(reference.size()));
}

double max_abs_error(std::span<const double> reference, std::span<const double> forecast) {
  check_lengths(reference, forecast);
  double m = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i) m = std::max(m, std::abs(reference[i] - forecast[i]));
  return m;
}

ErrorReport compare(std::span<const double> reference, std::span<const double> forecast) {
  ErrorReport r;
  r.mape = mape(reference, forecast);
  r.rmse = rmse(reference, forecast);
  r.max_abs_error = max_abs_error(reference, forecast);
  r.n_samples = reference.size();
  return r;
}

std::vector<double> resample(std::span<const double> times, std::span<const double> values,
                             std::span<const double> onto) {
  if (times.size() != values.size() || times.empty())
    throw DomainError("resample needs matching, non-empty times and values");
  std::vector<double> out;
  out.reserve(onto.size());
  for (double t : onto) {
    if (t <= times.front()) {
      out.push_back(values.front());
    } else if (t >= times.back()) {
      out.push_back(values.back());
    } else {
      const auto it = std::upper_bound(times.begin(), times.end(), t);
      const std::size_t j = static_cast<std::size_t>(it - times.begin());
      const double w = (t - times[j - 1]) / (times[j] - times[j - 1]);
      out.push_back(values[j - 1] + w * (values[j] - values[j - 1]));
    }
  }
  return out;
}

std::string csv_header() { return "mape_percent,rmse,max_abs_error,n_samples"; }

std::string to_csv_row(const ErrorReport& r) {
  return fmt(r.mape) + "," + fmt(r.rmse) + "," + fmt(r.max_abs_error) + "," + std::to_string(r.n_samples);
}

std::string to_text(const ErrorReport& r, const std::string& unit) {
  return "MAPE " + fmt(r.mape) + " %, RMSE " + fmt(r.rmse) + " " + unit + ", max |error| " +
         fmt(r.max_abs_error) + " " + unit + " over " + std::to_string(r.n_samples) + " samples";
}

}  // namespace dtwin::metrics
