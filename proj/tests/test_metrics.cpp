#include <doctest.h>

#include <cmath>
#include <random>

#include "dtwin/errors.hpp"
#include "dtwin/metrics.hpp"

using namespace dtwin;
using V = std::vector<double>;

TEST_CASE("mape examples") {
  CHECK(metrics::mape(V{3, 4, 5}, V{3, 4, 5}) == 0.0);
  CHECK(metrics::mape(V{100}, V{101}) == doctest::Approx(0.995025).epsilon(1e-5));
  CHECK(metrics::mape(V{1, 3}, V{2, 3}) == doctest::Approx(33.3333).epsilon(1e-5));
  CHECK_THROWS_AS(metrics::mape(V{1, 2}, V{1}), DomainError);
  CHECK_THROWS_WITH_AS(metrics::mape(V{1, -1}, V{1, 1}), doctest::Contains("1"), DomainError);
}

TEST_CASE("rmse examples") {
  CHECK(metrics::rmse(V{1, 2}, V{1, 2}) == 0.0);
  CHECK(metrics::rmse(V{0, 0}, V{3, 4}) == doctest::Approx(3.53553).epsilon(1e-5));
  CHECK(metrics::rmse(V{5}, V{3}) == 2.0);
  CHECK_THROWS_AS(metrics::rmse(V{}, V{}), DomainError);
  const auto r = metrics::compare(V{0, 0}, V{3, 4});
  CHECK(r.max_abs_error == 4.0);
  CHECK(r.n_samples == 2);
}

TEST_CASE("metric properties on random series") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> d(1.0, 500.0);
  for (int trial = 0; trial < 200; ++trial) {
    V a(1 + trial % 37), b(a.size());
    for (auto& x : a) x = d(rng);
    for (auto& x : b) x = d(rng);
    CHECK(metrics::mape(a, b) == doctest::Approx(metrics::mape(b, a)).epsilon(1e-12));
    CHECK(metrics::rmse(a, b) == doctest::Approx(metrics::rmse(b, a)).epsilon(1e-12));
    double mae = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) mae += std::abs(a[i] - b[i]);
    mae /= static_cast<double>(a.size());
    CHECK(metrics::rmse(a, b) >= mae * (1.0 - 1e-12));
    const double c = 0.37 + trial;
    V ac = a, bc = b;
    for (auto& x : ac) x *= c;
    for (auto& x : bc) x *= c;
    CHECK(metrics::rmse(ac, bc) == doctest::Approx(c * metrics::rmse(a, b)).epsilon(1e-10));
    CHECK(metrics::mape(ac, bc) == doctest::Approx(metrics::mape(a, b)).epsilon(1e-10));
  }
}

TEST_CASE("resampling is a separate linear-interpolation step") {
  const auto r = metrics::resample(V{0, 10, 20}, V{0, 100, 50}, V{0, 5, 15, 20});
  CHECK(r == V{0, 50, 75, 50});
}

TEST_CASE("report serialization") {
  const auto r = metrics::compare(V{100}, V{101});
  CHECK(metrics::csv_header() == "mape_percent,rmse,max_abs_error,n_samples");
  CHECK(metrics::to_csv_row(r).find(",1,1,1") != std::string::npos);
  CHECK(metrics::to_text(r).find("RMSE 1 K") != std::string::npos);
}
