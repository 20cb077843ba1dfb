#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <vector>

#include "orthofield/stats.hpp"

using namespace orthofield;

TEST_CASE("ks_statistic at the sorted-sample extremes") {
  auto std_normal = [](double x) { return normal_cdf(x); };

  SECTION("sample placed at target quantiles gives 1/(n+1)") {
    // Quantile function evaluated at i/(n+1) makes both one-sided gaps equal.
    const int n = 9;
    std::vector<double> xs;
    for (int i = 1; i <= n; ++i) {
      // crude normal quantile by bisection; test-local oracle
      double lo = -10, hi = 10, p = i / (n + 1.0);
      for (int it = 0; it < 100; ++it) {
        double mid = 0.5 * (lo + hi);
        (normal_cdf(mid) < p ? lo : hi) = mid;
      }
      xs.push_back(0.5 * (lo + hi));
    }
    CHECK_THAT(ks_statistic(xs, std_normal),
               Catch::Matchers::WithinAbs(1.0 / (n + 1.0), 1e-9));
  }

  SECTION("single sample at the median") {
    CHECK(ks_statistic({0.0}, std_normal) == 0.5);
  }

  SECTION("constant sample in the far left tail approaches 1") {
    CHECK(ks_statistic({-40.0, -40.0, -40.0}, std_normal) > 0.999999);
  }

  SECTION("empty sample is rejected") {
    CHECK_THROWS_AS(ks_statistic({}, std_normal), EmptySample);
  }
}

TEST_CASE("kolmogorov cdf and quantile match tabulated values") {
  // Classical two-sided critical values.
  CHECK_THAT(kolmogorov_quantile(0.95), Catch::Matchers::WithinAbs(1.3581, 2e-4));
  CHECK_THAT(kolmogorov_quantile(0.99), Catch::Matchers::WithinAbs(1.6276, 2e-4));
  CHECK_THAT(kolmogorov_cdf(1.0), Catch::Matchers::WithinAbs(0.7300003283226454, 1e-12));
  // value at the series switchover, against an independent evaluation
  CHECK_THAT(kolmogorov_cdf(1.18), Catch::Matchers::WithinAbs(0.8765461905702343, 1e-12));
  CHECK(kolmogorov_cdf(1.1799) < kolmogorov_cdf(1.1801));
}

TEST_CASE("compensated sum survives a classically bad ordering") {
  CompensatedSum s;
  s.add(1e16);
  for (int i = 0; i < 10000; ++i) s.add(1.0);
  s.add(-1e16);
  CHECK(s.value() == 10000.0);
}

TEST_CASE("mean_variance and covariance on a known sample") {
  std::vector<double> xs{1, 2, 3, 4, 5};
  auto mv = mean_variance(xs);
  CHECK(mv.mean == 3.0);
  CHECK(mv.variance == 2.5);
  std::vector<double> ys{2, 4, 6, 8, 10};
  CHECK(sample_covariance(xs, ys) == 5.0);
}

TEST_CASE("two-sample ks distance on disjoint samples is 1") {
  CHECK(ks_two_sample({1, 2, 3}, {10, 11}) == 1.0);
  CHECK(ks_two_sample({1, 2}, {1, 2}) == 0.0);
}
