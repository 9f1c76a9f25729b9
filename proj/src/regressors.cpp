#include <algorithm>
#include <functional>

#include "dtwin/errors.hpp"
#include "dtwin/sysid.hpp"

namespace dtwin::sysid {

Normalization Normalization::from_range(const std::vector<double>& values) {
  if (values.empty()) throw DomainError("cannot normalise an empty series");
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  Normalization n;
  n.center = 0.5 * (*lo + *hi);
  n.scale = 0.5 * (*hi - *lo);
  if (!(n.scale > 0.0)) n.scale = 1.0;
  return n;
}

int Term::degree() const noexcept {
  int d = 0;
  for (auto e : exponents) d += e;
  return d;
}

double Term::evaluate(const double* vars) const noexcept {
  double v = 1.0;
  for (std::size_t i = 0; i < exponents.size(); ++i)
    for (int p = 0; p < exponents[i]; ++p) v *= vars[i];
  return v;
}

std::string Term::label(int output_lags) const {
  std::string s;
  for (std::size_t i = 0; i < exponents.size(); ++i) {
    if (exponents[i] == 0) continue;
    if (!s.empty()) s += '*';
    const int idx = static_cast<int>(i);
    if (idx < output_lags)
      s += "y(k-" + std::to_string(idx + 1) + ")";
    else if (idx == output_lags)
      s += "u(k)";
    else
      s += "u(k-" + std::to_string(idx - output_lags) + ")";
    if (exponents[i] > 1) s += "^" + std::to_string(exponents[i]);
  }
  return s.empty() ? "1" : s;
}

std::vector<Term> monomial_basis(std::size_t n_vars, int max_degree) {
  if (max_degree < 0) throw DomainError("basis degree must be >= 0");
  std::vector<Term> out;
  std::vector<std::uint8_t> e(n_vars, 0);
  std::function<void(std::size_t, int)> rec = [&](std::size_t i, int left) {
    if (i == n_vars) {
      if (left == 0) out.push_back({e});
      return;
    }
    for (int p = left; p >= 0; --p) {
      e[i] = static_cast<std::uint8_t>(p);
      rec(i + 1, left - p);
    }
    e[i] = 0;
  };
  for (int d = 0; d <= max_degree; ++d) rec(0, d);
  return out;
}

Regression build_regressors(const std::vector<double>& input, const std::vector<double>& output,
                            int output_lags, int input_lags, const std::vector<Term>& basis,
                            const Normalization& in_norm, const Normalization& out_norm) {
  if (output_lags < 1 || input_lags < 1) throw DomainError("lag counts must be >= 1");
  if (input.size() != output.size()) throw DomainError("input and output lengths differ");
  const auto n_a = static_cast<std::size_t>(output_lags);
  const auto n_b = static_cast<std::size_t>(input_lags);
  const std::size_t k0 = std::max(n_a, n_b - 1);
  if (output.size() <= k0)
    throw DomainError("series of length " + std::to_string(output.size()) + " is too short for lag " +
                      std::to_string(k0));
  for (const auto& t : basis)
    if (t.exponents.size() != n_a + n_b) throw DomainError("basis term does not match the lag structure");

  Regression reg;
  reg.rows.reserve(output.size() - k0);
  reg.targets.reserve(output.size() - k0);
  std::vector<double> vars(n_a + n_b);
  for (std::size_t k = k0; k < output.size(); ++k) {
    for (std::size_t i = 0; i < n_a; ++i) vars[i] = out_norm.apply(output[k - 1 - i]);
    for (std::size_t j = 0; j < n_b; ++j) vars[n_a + j] = in_norm.apply(input[k - j]);
    std::vector<double> row(basis.size());
    for (std::size_t t = 0; t < basis.size(); ++t) row[t] = basis[t].evaluate(vars.data());
    reg.rows.push_back(std::move(row));
    reg.targets.push_back(out_norm.apply(output[k]));
  }
  return reg;
}

}  // namespace dtwin::sysid
