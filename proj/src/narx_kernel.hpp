#pragma once

// Allocation-free recursive NARX evaluation on normalised data, shared by
// the public free_run and the term-selection loop.

#include <cmath>
#include <cstddef>
#include <vector>

#include "dtwin/sysid.hpp"

namespace dtwin::sysid::detail {

/// |z| beyond this (10 output ranges in normalised units) counts as divergence.
inline constexpr double kDivergenceBound = 20.0;

struct CompiledTerm {
  std::vector<std::size_t> vars;  // repeated per power
};

inline std::vector<CompiledTerm> compile(const std::vector<Term>& terms) {
  std::vector<CompiledTerm> out(terms.size());
  for (std::size_t t = 0; t < terms.size(); ++t)
    for (std::size_t i = 0; i < terms[t].exponents.size(); ++i)
      for (int p = 0; p < terms[t].exponents[i]; ++p) out[t].vars.push_back(i);
  return out;
}

/// Fills y[k0..n) recursively; y[0..k0) must hold the warmup. Returns the
/// index of the first divergent sample, or n when the run stays bounded.
inline std::size_t run_normalized(const std::vector<CompiledTerm>& terms, const double* coef,
                                  std::size_t n_a, std::size_t n_b, const double* u, double* y,
                                  std::size_t n, std::size_t k0) {
  std::vector<double> vars(n_a + n_b);
  for (std::size_t k = k0; k < n; ++k) {
    for (std::size_t i = 0; i < n_a; ++i) vars[i] = y[k - 1 - i];
    for (std::size_t j = 0; j < n_b; ++j) vars[n_a + j] = u[k - j];
    double acc = 0.0;
    for (std::size_t t = 0; t < terms.size(); ++t) {
      double v = coef[t];
      for (std::size_t i : terms[t].vars) v *= vars[i];
      acc += v;
    }
    if (!std::isfinite(acc) || std::abs(acc) > kDivergenceBound) return k;
    y[k] = acc;
  }
  return n;
}

}  // namespace dtwin::sysid::detail
