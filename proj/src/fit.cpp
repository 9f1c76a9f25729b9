#include <Eigen/Dense>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include "dtwin/errors.hpp"
#include "dtwin/sysid.hpp"
#include "narx_kernel.hpp"

namespace dtwin::sysid {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kInf = std::numeric_limits<double>::infinity();

struct CaseData {
  std::vector<double> u;  // normalised
  std::vector<double> y;  // normalised
  MatrixXd gram;          // F^T F over the whole basis
  VectorXd rhs;           // F^T y
  std::size_t rows = 0;
};

struct Problem {
  std::vector<Term> basis;
  std::vector<CaseData> cases;
  std::size_t n_a = 0;
  std::size_t n_b = 0;
  std::size_t k0 = 0;
  double out_scale = 1.0;
  double ridge = 0.0;
  double ridge_fallback = 0.0;
};

struct Solution {
  std::vector<double> theta;
  bool fallback = false;
  bool ok = false;
};

/// Ridge solve on the Gram blocks of `subset`, summed over cases with use[c].
// LDLT treats zero pivots as a pseudo-inverse and its rcond() estimate
// does not see them, so test the pivots directly.
bool rank_deficient(const Eigen::LDLT<MatrixXd>& ldlt) {
  const auto d = ldlt.vectorD().cwiseAbs();
  return !(d.minCoeff() > 1e-13 * d.maxCoeff());
}

Solution solve_subset(const Problem& pb, const std::vector<std::size_t>& subset,
                      const std::vector<char>& use) {
  const auto s = static_cast<Eigen::Index>(subset.size());
  MatrixXd a = MatrixXd::Zero(s, s);
  VectorXd b = VectorXd::Zero(s);
  for (std::size_t c = 0; c < pb.cases.size(); ++c) {
    if (!use[c]) continue;
    const auto& g = pb.cases[c].gram;
    const auto& r = pb.cases[c].rhs;
    for (Eigen::Index i = 0; i < s; ++i) {
      b(i) += r(static_cast<Eigen::Index>(subset[i]));
      for (Eigen::Index j = 0; j < s; ++j)
        a(i, j) += g(static_cast<Eigen::Index>(subset[i]), static_cast<Eigen::Index>(subset[j]));
    }
  }
  auto attempt = [&](double ridge, Solution& out) {
    MatrixXd m = a;
    m.diagonal().array() += ridge;
    Eigen::LDLT<MatrixXd> ldlt(m);
    if (ldlt.info() != Eigen::Success) return false;
    if (ridge == 0.0 && rank_deficient(ldlt)) return false;
    VectorXd x = ldlt.solve(b);
    if (!x.allFinite()) return false;
    out.theta.assign(x.data(), x.data() + x.size());
    return true;
  };
  Solution sol;
  sol.ok = attempt(pb.ridge, sol);
  if (!sol.ok && pb.ridge == 0.0 && pb.ridge_fallback > 0.0) {
    sol.ok = attempt(pb.ridge_fallback, sol);
    sol.fallback = sol.ok;
  }
  return sol;
}

/// Free-run RMSE (output units) of `subset` with coefficients `theta` on case c.
double free_run_rmse(const Problem& pb, const std::vector<std::size_t>& subset,
                     const std::vector<double>& theta, std::size_t c) {
  std::vector<Term> terms;
  terms.reserve(subset.size());
  for (auto i : subset) terms.push_back(pb.basis[i]);
  const auto compiled = detail::compile(terms);
  const auto& cd = pb.cases[c];
  const std::size_t n = cd.y.size();
  std::vector<double> y(n);
  std::copy(cd.y.begin(), cd.y.begin() + static_cast<std::ptrdiff_t>(pb.k0), y.begin());
  if (detail::run_normalized(compiled, theta.data(), pb.n_a, pb.n_b, cd.u.data(), y.data(), n, pb.k0) < n)
    return kInf;
  double sum = 0.0;
  for (std::size_t k = 0; k < n; ++k) sum += (y[k] - cd.y[k]) * (y[k] - cd.y[k]);
  return pb.out_scale * std::sqrt(sum / static_cast<double>(n));
}

/// Leave-one-case-out free-run RMSE, averaged over folds; in-sample with one case.
double validation_score(const Problem& pb, const std::vector<std::size_t>& subset) {
  const std::size_t nc = pb.cases.size();
  if (nc == 1) {
    const auto sol = solve_subset(pb, subset, {1});
    return sol.ok ? free_run_rmse(pb, subset, sol.theta, 0) : kInf;
  }
  double total = 0.0;
  for (std::size_t held = 0; held < nc; ++held) {
    std::vector<char> use(nc, 1);
    use[held] = 0;
    const auto sol = solve_subset(pb, subset, use);
    if (!sol.ok) return kInf;
    const double r = free_run_rmse(pb, subset, sol.theta, held);
    if (!std::isfinite(r)) return kInf;
    total += r;
  }
  return total / static_cast<double>(nc);
}

Problem prepare(const TrainingSet& training, const FitConfig& cfg, Normalization& in_norm,
                Normalization& out_norm) {
  training.validate();
  if (cfg.output_lags < 1 || cfg.input_lags < 1) throw DomainError("lag counts must be >= 1");
  if (cfg.max_degree < 1) throw DomainError("basis degree must be >= 1");
  if (!(cfg.ridge >= 0.0) || !(cfg.ridge_fallback >= 0.0)) throw DomainError("ridge must be >= 0");

  std::vector<double> all_u, all_y;
  for (const auto& c : training.cases) {
    all_u.insert(all_u.end(), c.input.values().begin(), c.input.values().end());
    all_y.insert(all_y.end(), c.output.values().begin(), c.output.values().end());
  }
  in_norm = Normalization::from_range(all_u);
  out_norm = Normalization::from_range(all_y);

  Problem pb;
  pb.n_a = static_cast<std::size_t>(cfg.output_lags);
  pb.n_b = static_cast<std::size_t>(cfg.input_lags);
  pb.k0 = std::max(pb.n_a, pb.n_b - 1);
  pb.basis = monomial_basis(pb.n_a + pb.n_b, cfg.max_degree);
  pb.out_scale = out_norm.scale;
  pb.ridge = cfg.ridge;
  pb.ridge_fallback = cfg.ridge_fallback;
  const auto p = static_cast<Eigen::Index>(pb.basis.size());
  for (const auto& c : training.cases) {
    const auto reg = build_regressors(c.input.values(), c.output.values(), cfg.output_lags, cfg.input_lags,
                                      pb.basis, in_norm, out_norm);
    CaseData cd;
    cd.rows = reg.rows.size();
    MatrixXd f(static_cast<Eigen::Index>(cd.rows), p);
    VectorXd t(static_cast<Eigen::Index>(cd.rows));
    for (std::size_t r = 0; r < cd.rows; ++r) {
      for (Eigen::Index j = 0; j < p; ++j) f(static_cast<Eigen::Index>(r), j) = reg.rows[r][static_cast<std::size_t>(j)];
      t(static_cast<Eigen::Index>(r)) = reg.targets[r];
    }
    cd.gram = MatrixXd::Zero(p, p);
    cd.gram.selfadjointView<Eigen::Lower>().rankUpdate(f.transpose());
    cd.gram = cd.gram.selfadjointView<Eigen::Lower>();
    cd.rhs = f.transpose() * t;
    for (double v : c.input.values()) cd.u.push_back(in_norm.apply(v));
    for (double v : c.output.values()) cd.y.push_back(out_norm.apply(v));
    pb.cases.push_back(std::move(cd));
  }
  return pb;
}

/// Scores every candidate; parallel over candidates, results by index.
std::vector<double> score_candidates(const Problem& pb, const std::vector<std::size_t>& current,
                                     const std::vector<std::size_t>& candidates, unsigned threads) {
  std::vector<double> scores(candidates.size(), kInf);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    std::vector<std::size_t> subset = current;
    subset.push_back(0);
    for (std::size_t i = next++; i < candidates.size(); i = next++) {
      subset.back() = candidates[i];
      scores[i] = validation_score(pb, subset);
    }
  };
  unsigned nt = threads ? threads : std::max(1u, std::thread::hardware_concurrency());
  nt = static_cast<unsigned>(std::min<std::size_t>(nt, candidates.size()));
  if (nt <= 1) {
    worker();
    return scores;
  }
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < nt; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  return scores;
}

}  // namespace

std::vector<double> ridge_solve(const Regression& reg, double ridge) {
  if (reg.rows.empty()) throw DomainError("regression has no rows");
  if (!(ridge >= 0.0)) throw DomainError("ridge must be >= 0");
  const auto p = static_cast<Eigen::Index>(reg.rows.front().size());
  MatrixXd a = MatrixXd::Zero(p, p);
  VectorXd b = VectorXd::Zero(p);
  for (std::size_t r = 0; r < reg.rows.size(); ++r) {
    const Eigen::Map<const VectorXd> x(reg.rows[r].data(), p);
    a.noalias() += x * x.transpose();
    b.noalias() += x * reg.targets[r];
  }
  a.diagonal().array() += ridge;
  Eigen::LDLT<MatrixXd> ldlt(a);
  if (ldlt.info() != Eigen::Success || (ridge == 0.0 && rank_deficient(ldlt)))
    throw IdentificationError("normal equations are singular");
  VectorXd x = ldlt.solve(b);
  if (!x.allFinite()) throw IdentificationError("normal equations are singular");
  return {x.data(), x.data() + x.size()};
}

NarxModel fit(const TrainingSet& training, const FitConfig& cfg) {
  NarxModel model;
  Problem pb = prepare(training, cfg, model.input, model.output);

  std::vector<std::size_t> current, candidates;
  for (std::size_t i = 0; i < pb.basis.size(); ++i)
    (pb.basis[i].degree() <= 1 ? current : candidates).push_back(i);

  std::vector<double> trace{validation_score(pb, current)};
  for (int round = 0; round < cfg.selection_budget && !candidates.empty(); ++round) {
    const auto scores = score_candidates(pb, current, candidates, cfg.threads);
    std::size_t best = 0;
    for (std::size_t i = 1; i < scores.size(); ++i)
      if (scores[i] < scores[best]) best = i;
    const double now = trace.back();
    if (!std::isfinite(scores[best])) break;
    if (std::isfinite(now) && !(now - scores[best] >= cfg.min_improvement * now)) break;
    current.push_back(candidates[best]);
    candidates.erase(candidates.begin() + static_cast<std::ptrdiff_t>(best));
    trace.push_back(scores[best]);
  }

  const auto sol = solve_subset(pb, current, std::vector<char>(pb.cases.size(), 1));
  if (!sol.ok) throw IdentificationError("least-squares problem is singular; set a positive ridge");

  model.output_lags = cfg.output_lags;
  model.input_lags = cfg.input_lags;
  model.sample_interval = training.sample_interval();
  for (auto i : current) model.terms.push_back(pb.basis[i]);
  model.coefficients = sol.theta;
  for (const auto& c : training.cases) model.meta.training_cases.push_back(c.id);
  model.meta.fit_timestamp = cfg.timestamp;
  model.meta.ridge = sol.fallback ? cfg.ridge_fallback : cfg.ridge;
  model.meta.ridge_fallback = sol.fallback;
  model.meta.selection_trace = trace;
  for (const auto& t : model.terms) model.meta.selected_terms.push_back(t.label(model.output_lags));

  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& c : training.cases) {
    const auto pred = one_step(model, c.input.values(), c.output.values());
    const std::size_t k0 = c.output.size() - pred.size();
    for (std::size_t r = 0; r < pred.size(); ++r) {
      const double e = pred[r] - c.output.values()[k0 + r];
      sum += e * e;
    }
    count += pred.size();
  }
  model.meta.training_rmse = std::sqrt(sum / static_cast<double>(count));
  return model;
}

NarxModel fit_linear(const TrainingSet& training, const FitConfig& config) {
  FitConfig cfg = config;
  cfg.max_degree = 1;
  return fit(training, cfg);
}

}  // namespace dtwin::sysid
