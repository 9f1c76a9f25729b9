#include <algorithm>
#include <cmath>

#include "dtwin/errors.hpp"
#include "dtwin/sysid.hpp"
#include "narx_kernel.hpp"

namespace dtwin::sysid {

std::size_t NarxModel::max_lag() const noexcept {
  return static_cast<std::size_t>(std::max(output_lags, input_lags - 1));
}

void NarxModel::validate() const {
  if (output_lags < 1 || input_lags < 1) throw DomainError("lag counts must be >= 1");
  if (!(sample_interval > 0.0)) throw DomainError("sample interval must be > 0");
  if (terms.size() != coefficients.size())
    throw DomainError("coefficient count " + std::to_string(coefficients.size()) + " != term count " +
                      std::to_string(terms.size()));
  for (const auto& t : terms)
    if (t.exponents.size() != n_vars()) throw DomainError("term references undeclared lags");
  if (!(input.scale > 0.0) || !(output.scale > 0.0)) throw DomainError("normalisation scale must be > 0");
  for (double c : coefficients)
    if (!std::isfinite(c)) throw DomainError("non-finite coefficient");
}

void TrainingSet::validate() const {
  if (cases.empty()) throw DomainError("training set is empty");
  const double dt = cases.front().input.interval();
  for (const auto& c : cases) {
    if (c.input.size() != c.output.size() || c.input.times() != c.output.times())
      throw DomainError("case '" + c.id + "': input and output are not co-sampled");
    if (c.input.size() < 2) throw DomainError("case '" + c.id + "' has fewer than 2 samples");
    if (std::abs(c.input.interval() - dt) > 1e-9 * dt)
      throw DomainError("case '" + c.id + "' has a different sampling interval");
  }
}

double TrainingSet::sample_interval() const {
  if (cases.empty()) throw DomainError("training set is empty");
  return cases.front().input.interval();
}

Signal free_run(const NarxModel& model, const Signal& input, const std::vector<double>& warmup) {
  model.validate();
  if (input.size() < 2) throw DomainError("free run needs at least 2 input samples");
  if (std::abs(input.interval() - model.sample_interval) > 1e-9 * model.sample_interval)
    throw DomainError("input interval " + std::to_string(input.interval()) + " s differs from model " +
                      std::to_string(model.sample_interval) + " s");
  const std::size_t k0 = std::min(model.max_lag(), input.size());
  if (warmup.size() < k0)
    throw DomainError("warmup needs " + std::to_string(k0) + " samples, got " + std::to_string(warmup.size()));

  const std::size_t n = input.size();
  std::vector<double> u(n), y(n);
  for (std::size_t k = 0; k < n; ++k) u[k] = model.input.apply(input.values()[k]);
  for (std::size_t k = 0; k < k0; ++k) y[k] = model.output.apply(warmup[k]);
  const auto terms = detail::compile(model.terms);
  const std::size_t bad = detail::run_normalized(terms, model.coefficients.data(),
                                                 static_cast<std::size_t>(model.output_lags),
                                                 static_cast<std::size_t>(model.input_lags), u.data(),
                                                 y.data(), n, k0);
  if (bad < n) throw DivergenceError("free-run prediction diverged", bad);
  for (std::size_t k = 0; k < k0; ++k) y[k] = warmup[k];
  for (std::size_t k = k0; k < n; ++k) y[k] = model.output.invert(y[k]);
  return Signal(input.times(), std::move(y));
}

std::vector<double> one_step(const NarxModel& model, const std::vector<double>& input,
                             const std::vector<double>& output) {
  model.validate();
  const auto reg = build_regressors(input, output, model.output_lags, model.input_lags, model.terms,
                                    model.input, model.output);
  std::vector<double> pred(reg.rows.size());
  for (std::size_t r = 0; r < reg.rows.size(); ++r) {
    double acc = 0.0;
    for (std::size_t t = 0; t < model.terms.size(); ++t) acc += model.coefficients[t] * reg.rows[r][t];
    pred[r] = model.output.invert(acc);
  }
  return pred;
}

Evaluation evaluate(const NarxModel& model, const TrainingSet& cases) {
  cases.validate();
  Evaluation ev;
  double sum = 0.0;
  for (const auto& c : cases.cases) {
    auto pred = free_run(model, c.input, c.output.values());
    auto rep = metrics::compare(c.output.values(), pred.values());
    ev.worst.rmse = std::max(ev.worst.rmse, rep.rmse);
    ev.worst.mape = std::max(ev.worst.mape, rep.mape);
    ev.worst.max_abs_error = std::max(ev.worst.max_abs_error, rep.max_abs_error);
    ev.worst.n_samples += rep.n_samples;
    sum += rep.rmse;
    ev.cases.push_back(rep);
    ev.predictions.push_back(std::move(pred));
  }
  ev.mean_rmse = sum / static_cast<double>(ev.cases.size());
  return ev;
}

LinearForm linear_form(const NarxModel& model) {
  model.validate();
  const auto n_a = static_cast<std::size_t>(model.output_lags);
  const auto n_b = static_cast<std::size_t>(model.input_lags);
  LinearForm f;
  f.a.assign(n_a, 0.0);
  f.b.assign(n_b, 0.0);
  double theta0 = 0.0;
  for (std::size_t t = 0; t < model.terms.size(); ++t) {
    const auto& e = model.terms[t].exponents;
    const int d = model.terms[t].degree();
    if (d > 1) throw DomainError("model is not linear");
    if (d == 0) {
      theta0 += model.coefficients[t];
      continue;
    }
    const auto i = static_cast<std::size_t>(std::find(e.begin(), e.end(), 1) - e.begin());
    if (i < n_a)
      f.a[i] += model.coefficients[t];
    else
      f.b[i - n_a] += model.coefficients[t] * model.output.scale / model.input.scale;
  }
  const double cy = model.output.center;
  const double cu = model.input.center;
  f.offset = cy + model.output.scale * theta0;
  for (double a : f.a) f.offset -= a * cy;
  for (double b : f.b) f.offset -= b * cu;
  return f;
}

}  // namespace dtwin::sysid
