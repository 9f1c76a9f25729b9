#pragma once

// Error measures between a reference series R and a forecast F.

#include <span>
#include <string>
#include <vector>

namespace dtwin::metrics {

struct ErrorReport {
  double mape = 0.0;           // percent
  double rmse = 0.0;           // unit of the series
  double max_abs_error = 0.0;  // unit of the series
  std::size_t n_samples = 0;
};

/// Symmetric MAPE, (100/N) sum |R-F| / (|R+F|/2). Throws DomainError on a
/// length mismatch, an empty series, or a sample where R+F = 0.
double mape(std::span<const double> reference, std::span<const double> forecast);

/// Root-mean-square error. Throws DomainError on a length mismatch or empty input.
double rmse(std::span<const double> reference, std::span<const double> forecast);

double max_abs_error(std::span<const double> reference, std::span<const double> forecast);

ErrorReport compare(std::span<const double> reference, std::span<const double> forecast);

/// Linear interpolation of (times, values) onto `onto`; clamps outside the range.
std::vector<double> resample(std::span<const double> times, std::span<const double> values,
                             std::span<const double> onto);

std::string csv_header();
std::string to_csv_row(const ErrorReport& r);
std::string to_text(const ErrorReport& r, const std::string& unit = "K");

}  // namespace dtwin::metrics
