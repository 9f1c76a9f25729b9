#pragma once

// Polynomial NARX identification for a single-input single-output process:
//
//   y(k) = sum_j theta_j * phi_j( y(k-1..k-n_a), u(k..k-n_b+1) )
//
// evaluated on normalised signals. Lagged variables are numbered
// 0..n_a-1 for y(k-1)..y(k-n_a), then n_a..n_a+n_b-1 for u(k)..u(k-n_b+1).

#include <cstdint>
#include <string>
#include <vector>

#include "dtwin/metrics.hpp"
#include "dtwin/signal.hpp"

namespace dtwin::sysid {

/// z = (x - center) / scale.
struct Normalization {
  double center = 0.0;
  double scale = 1.0;

  /// Mid-range centre and half-range scale (1 for a constant series).
  static Normalization from_range(const std::vector<double>& values);
  double apply(double x) const noexcept { return (x - center) / scale; }
  double invert(double z) const noexcept { return center + scale * z; }
  friend bool operator==(const Normalization&, const Normalization&) = default;
};

/// Monomial: exponent of every lagged variable. All zero is the constant term.
struct Term {
  std::vector<std::uint8_t> exponents;

  int degree() const noexcept;
  double evaluate(const double* vars) const noexcept;
  std::string label(int output_lags) const;
  friend bool operator==(const Term&, const Term&) = default;
};

/// Every monomial in n_vars variables with total degree <= max_degree,
/// ordered by degree, then with higher powers of earlier variables first.
std::vector<Term> monomial_basis(std::size_t n_vars, int max_degree);

struct ModelMetadata {
  std::vector<std::string> training_cases;
  std::string fit_timestamp;
  int format_version = 1;
  double ridge = 0.0;              // value actually used
  bool ridge_fallback = false;     // the requested ridge was singular
  double training_rmse = 0.0;      // one-step-ahead, output units
  std::vector<double> selection_trace;  // validation RMSE after each accepted stage
  std::vector<std::string> selected_terms;
  friend bool operator==(const ModelMetadata&, const ModelMetadata&) = default;
};

struct NarxModel {
  int output_lags = 1;  // n_a
  int input_lags = 1;   // n_b
  double sample_interval = 10.0;
  std::vector<Term> terms;
  std::vector<double> coefficients;
  Normalization input;
  Normalization output;
  ModelMetadata meta;

  std::size_t n_vars() const noexcept { return static_cast<std::size_t>(output_lags + input_lags); }
  /// First predictable sample index, max(n_a, n_b - 1).
  std::size_t max_lag() const noexcept;
  /// Throws DomainError on a structural inconsistency.
  void validate() const;
  friend bool operator==(const NarxModel&, const NarxModel&) = default;
};

/// Input/output pair sampled on the same uniform time base.
struct IoCase {
  std::string id;
  Signal input;
  Signal output;
};

struct TrainingSet {
  std::vector<IoCase> cases;

  /// Throws DomainError unless non-empty, co-sampled and sharing one interval.
  void validate() const;
  double sample_interval() const;
};

struct Regression {
  std::vector<std::vector<double>> rows;  // features per predictable sample
  std::vector<double> targets;            // normalised y(k)
};

/// One row per k >= max(n_a, n_b - 1). Throws DomainError if the series
/// is too short for a single row or the signals differ in length.
Regression build_regressors(const std::vector<double>& input, const std::vector<double>& output,
                            int output_lags, int input_lags, const std::vector<Term>& basis,
                            const Normalization& in_norm, const Normalization& out_norm);

struct FitConfig {
  int output_lags = 5;
  int input_lags = 5;
  int max_degree = 3;
  double ridge = 1e-8;           // on normalised features
  double ridge_fallback = 1e-8;  // used when `ridge` leaves the system singular
  int selection_budget = 12;     // nonlinear terms added at most
  double min_improvement = 0.01; // relative validation-RMSE gain to accept a term
  unsigned threads = 0;          // 0 = hardware concurrency
  std::string timestamp;         // recorded in metadata verbatim
};

/// Greedy forward selection from the linear term set; candidates scored by
/// leave-one-case-out free-run RMSE (in-sample when only one case exists).
/// Throws IdentificationError when no coefficients can be computed.
NarxModel fit(const TrainingSet& training, const FitConfig& config);

/// Degree-1 fit without selection.
NarxModel fit_linear(const TrainingSet& training, const FitConfig& config);

/// Ridge solution of min |X theta - y|^2 + ridge |theta|^2 for fixed terms.
std::vector<double> ridge_solve(const Regression& reg, double ridge);

/// Recursive prediction fed by its own outputs. The first max_lag() samples
/// are copied from `warmup`. Throws DivergenceError when a prediction is not
/// finite or leaves the band of 10 training output ranges around the centre.
Signal free_run(const NarxModel& model, const Signal& input, const std::vector<double>& warmup);

/// One-step-ahead predictions using measured lagged outputs.
std::vector<double> one_step(const NarxModel& model, const std::vector<double>& input,
                             const std::vector<double>& output);

struct Evaluation {
  std::vector<metrics::ErrorReport> cases;
  std::vector<Signal> predictions;
  metrics::ErrorReport worst;  // largest RMSE / MAPE / max error over cases
  double mean_rmse = 0.0;
};

/// Free run per case, warm-started from the measured output.
Evaluation evaluate(const NarxModel& model, const TrainingSet& cases);

/// Physical-unit form of a degree-1 model:
/// y(k) = offset + sum a_i y(k-i) + sum b_j u(k-j).
struct LinearForm {
  std::vector<double> a;  // i = 1..n_a
  std::vector<double> b;  // j = 0..n_b-1
  double offset = 0.0;
};
/// Throws DomainError if the model holds a term of degree > 1.
LinearForm linear_form(const NarxModel& model);

}  // namespace dtwin::sysid
