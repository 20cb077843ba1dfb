#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "orthofield/model.hpp"
#include "support/oracles.hpp"

using namespace orthofield;
using orthofield::testing::ModelFuzzer;
using orthofield::testing::OracleEstimate;

namespace {

constexpr std::uint64_t kSeed = 0x0fe11a7769ULL;

FieldModel identity_stencil(int dim, double variance = 1.0) {
  return FieldModel::linear(
      CoefficientKernel::table(dim, {{MultiIndex::zero(dim), 1.0}}),
      InnovationSpec{Distribution::StandardNormal, variance, 0.0}, 1, 0.0);
}

FieldModel geometric_half(int dim, int radius = 20, double tol = 1e-9) {
  return FieldModel::linear(CoefficientKernel::geometric(std::vector<double>(dim, 0.5)),
                            InnovationSpec{}, radius, tol);
}

}  // namespace

TEST_CASE("identity stencil evaluates to the innovation itself") {
  auto model = identity_stencil(2);
  QuenchedScenario sc{kSeed, kSeed + 1, 2};
  ReplicationView view(sc, model.innovation(), 3);
  const MultiIndex k{4, 7};
  auto [value, tail] = eval_field(model, k, view);
  CHECK(value == view(k));
  CHECK(tail == 0.0);
}

TEST_CASE("geometric kernel truncation tail has the closed form") {
  const int radius = 20;
  auto model = geometric_half(2, radius, 1e-9);
  // Var(xi) * sum_{j outside box} 4^{-(j1+j2)}: per-axis split
  // (P+T)^2 - P^2 = 2PT + T^2 with the axis tail T in closed form.
  const double box_axis = (1.0 - std::pow(0.25, radius + 1)) / (1.0 - 0.25);
  const double tail_axis = std::pow(0.25, radius + 1) / (1.0 - 0.25);
  const double expected = 2.0 * box_axis * tail_axis + tail_axis * tail_axis;
  CHECK_THAT(model.tail_variance(), Catch::Matchers::WithinRel(expected, 1e-10));
  CHECK(model.tail_variance() < 1e-10);
  // brute-force cross check of the omitted mass over a generous box
  double brute = 0.0;
  for (int j1 = 0; j1 <= 200; ++j1)
    for (int j2 = 0; j2 <= 200; ++j2)
      if (j1 > radius || j2 > radius) brute += std::pow(0.25, j1 + j2);
  CHECK_THAT(model.tail_variance(), Catch::Matchers::WithinRel(brute, 1e-10));
}

TEST_CASE("insufficient truncation radius is rejected") {
  CHECK_THROWS_AS(FieldModel::linear(CoefficientKernel::geometric({0.5, 0.5}), InnovationSpec{},
                                     2, 1e-12),
                  TruncationInsufficient);
}

TEST_CASE("volterra single pair evaluates to the product of two innovations") {
  PairKernel pairs(2, {{MultiIndex{1, 0}, MultiIndex{0, 1}, 1.0}});
  auto model = FieldModel::volterra(pairs, InnovationSpec{});
  QuenchedScenario sc{kSeed, kSeed + 2, 2};
  ReplicationView view(sc, model.innovation(), 0);
  const MultiIndex k{3, 3};
  auto [value, tail] = eval_field(model, k, view);
  CHECK(value == view(MultiIndex{2, 3}) * view(MultiIndex{3, 2}));
  CHECK(tail == 0.0);
}

TEST_CASE("volterra kernels reject diagonal entries") {
  CHECK_THROWS_AS(PairKernel(2, {{MultiIndex{1, 1}, MultiIndex{1, 1}, 0.5}}), KernelInvalid);
}

TEST_CASE("conditional expectation masks: two-term kernel") {
  // a_{(0,0)} = 1, a_{(1,1)} = 2: E_{(0,0)}(X_{(1,1)}) keeps only the j=(1,1)
  // term, whose site is the origin.
  auto model = FieldModel::linear(
      CoefficientKernel::table(2, {{MultiIndex{0, 0}, 1.0}, {MultiIndex{1, 1}, 2.0}}),
      InnovationSpec{}, 2, 0.0);
  QuenchedScenario sc{kSeed, kSeed + 3, 2};
  ReplicationView view(sc, model.innovation(), 0);
  CHECK(conditional_expectation(model, MultiIndex{0, 0}, MultiIndex{1, 1}, view) ==
        2.0 * view(MultiIndex{0, 0}));
}

TEST_CASE("conditional expectation of a fresh window sum vanishes") {
  // X = xi: every summand of S_{n,m} has second coordinate >= 1, so
  // E_{(n,0)} kills all of them.
  auto model = identity_stencil(2);
  QuenchedScenario sc{kSeed, kSeed + 4, 2};
  ReplicationView view(sc, model.innovation(), 1);
  Window w({5, 4});
  CHECK(conditional_expectation_window(model, MultiIndex{5, 0}, w, view) == 0.0);
}

TEST_CASE("conditional expectation agrees with the resampling oracle") {
  auto model = geometric_half(2, 12, 1e-5);
  QuenchedScenario sc{kSeed, kSeed + 5, 2};
  ReplicationView base(sc, model.innovation(), 2);
  const MultiIndex level{0, 0};
  const MultiIndex site{2, 1};
  const double exact = conditional_expectation(model, level, site, base);
  OracleEstimate est = orthofield::testing::resampling_conditional(
      base, level, kSeed + 100, 100000,
      [&](const auto& view) { return model.eval_raw(site, view); });
  CHECK(std::abs(est.mean - exact) < 3.0 * est.std_error);
}

TEST_CASE("projection closed form for linear models") {
  auto model = geometric_half(2, 12, 1e-5);
  QuenchedScenario sc{kSeed, kSeed + 6, 2};
  ReplicationView view(sc, model.innovation(), 0);
  const MultiIndex u{0, 0}, v{2, 3};
  auto p = projection(model, u, v, view);
  CHECK(p.representation == ProjectionValue::Representation::ClosedForm);
  CHECK(p.value == model.kernel().coefficient(v - u) * view(u));
  CHECK_THAT(p.l2_norm, Catch::Matchers::WithinRel(std::pow(0.5, 5), 1e-12));
}

TEST_CASE("projection is zero when the target is not in the future cone") {
  auto linear = geometric_half(2, 12, 1e-5);
  PairKernel pairs(2, {{MultiIndex{1, 0}, MultiIndex{0, 1}, 1.0}});
  auto volt = FieldModel::volterra(pairs, InnovationSpec{});
  QuenchedScenario sc{kSeed, kSeed + 7, 2};
  for (const FieldModel* m : {&linear, &volt}) {
    ReplicationView view(sc, m->innovation(), 0);
    CHECK(projection(*m, MultiIndex{3, 3}, MultiIndex{2, 5}, view).value == 0.0);
  }
}

TEST_CASE("volterra projection mask sum agrees with the resampling oracle") {
  PairKernel pairs(2, {{MultiIndex{1, 0}, MultiIndex{0, 1}, 1.0}});
  auto model = FieldModel::volterra(pairs, InnovationSpec{});
  QuenchedScenario sc{kSeed, kSeed + 8, 2};
  ReplicationView base(sc, model.innovation(), 1);
  const MultiIndex u{1, 1}, v{2, 2};
  const double exact = projection(model, u, v, base).value;

  // Oracle: alternating sum of four resampled conditional expectations.
  const int d = 2;
  double mean = 0.0, se2 = 0.0;
  for (int corner = 0; corner < (1 << d); ++corner) {
    MultiIndex level = u;
    int pop = 0;
    for (int i = 0; i < d; ++i)
      if (corner & (1 << i)) {
        --level[i];
        ++pop;
      }
    OracleEstimate est = orthofield::testing::resampling_conditional(
        base, level, kSeed + 200 + corner, 100000,
        [&](const auto& view) { return model.eval_raw(v, view); });
    mean += (pop % 2 == 0) ? est.mean : -est.mean;
    se2 += est.std_error * est.std_error;
  }
  CHECK(std::abs(mean - exact) < 3.0 * std::sqrt(se2));
}

TEST_CASE("partial sum over a 2x2 identity-stencil window") {
  auto model = identity_stencil(2);
  QuenchedScenario sc{kSeed, kSeed + 9, 2};
  ReplicationView view(sc, model.innovation(), 4);
  auto [value, tail] = partial_sum(model, Window({2, 2}), view);
  CHECK(value == view(MultiIndex{1, 1}) + view(MultiIndex{1, 2}) + view(MultiIndex{2, 1}) +
                     view(MultiIndex{2, 2}));
  CHECK(tail == 0.0);
}

TEST_CASE("partial sum matches the naive double-sum oracle to 12 digits") {
  auto model = geometric_half(2, 14, 1e-6);
  QuenchedScenario sc{kSeed, kSeed + 10, 2};
  ReplicationView view(sc, model.innovation(), 0);
  Window w({8, 8});
  const double fast = partial_sum(model, w, view).value;
  const double naive =
      orthofield::testing::naive_linear_partial_sum(model.kernel(), 14, w, view);
  CHECK_THAT(fast, Catch::Matchers::WithinRel(naive, 1e-12));
}

TEST_CASE("remainder vanishes identically for the identity stencil") {
  auto model = identity_stencil(2);
  QuenchedScenario sc{kSeed, kSeed + 11, 2};
  ReplicationView view(sc, model.innovation(), 2);
  for (Window w : {Window({2, 2}), Window({3, 5}), Window({1, 4})})
    CHECK(remainder(model, w, view) == 0.0);
}

TEST_CASE("remainder matches the three-term resampling oracle") {
  auto model = FieldModel::linear(
      CoefficientKernel::table(2, {{MultiIndex{0, 0}, 1.0}, {MultiIndex{1, 1}, 1.0}}),
      InnovationSpec{}, 2, 0.0);
  QuenchedScenario sc{kSeed, kSeed + 12, 2};
  ReplicationView base(sc, model.innovation(), 0);
  Window w({2, 2});
  const double exact = remainder(model, w, base);

  double mean = 0.0, se2 = 0.0;
  const MultiIndex levels[3] = {MultiIndex{2, 0}, MultiIndex{0, 2}, MultiIndex{0, 0}};
  const double signs[3] = {1.0, 1.0, -1.0};
  for (int i = 0; i < 3; ++i) {
    OracleEstimate est = orthofield::testing::resampling_conditional(
        base, levels[i], kSeed + 300 + i, 200000, [&](const auto& view) {
          double s = 0.0;
          w.for_each([&](const MultiIndex& k) { s += model.eval_raw(k, view); });
          return s;
        });
    mean += signs[i] * est.mean;
    se2 += est.std_error * est.std_error;
  }
  CHECK(std::abs(mean - exact) < 3.0 * std::sqrt(se2));
}

TEST_CASE("orthogonal decomposition S = sum P_u(S) + R holds exactly") {
  ModelFuzzer fuzz(kSeed + 400);
  for (int trial = 0; trial < 25; ++trial) {
    const int dim = fuzz.pick_dim();
    auto model = FieldModel::linear(fuzz.random_table_kernel(dim), InnovationSpec{}, 4, 0.0);
    Window w(MultiIndex(dim, 2 + static_cast<int>(fuzz.stream().next_u64() % 3)));
    const SitePolynomial s = window_sum_polynomial(model, w);
    const SitePolynomial r = remainder_polynomial_of_sum(s, w);
    SitePolynomial lhs = s;
    lhs -= r;
    lhs -= s.max_in_box(MultiIndex::ones(dim), w.upper());
    for (const auto& [sites, c] : lhs.terms()) CHECK(std::abs(c) <= 1e-12);
  }
}

TEST_CASE("commuting filtration identity is bit-exact on masks") {
  ModelFuzzer fuzz(kSeed + 500);
  for (int trial = 0; trial < 25; ++trial) {
    const int dim = fuzz.pick_dim();
    auto model = FieldModel::linear(fuzz.random_table_kernel(dim), InnovationSpec{}, 4, 0.0);
    const SitePolynomial x = model.field_polynomial(fuzz.random_level(dim, 0, 2));
    const MultiIndex u = fuzz.random_level(dim), a = fuzz.random_level(dim);
    CHECK(x.conditioned(a).conditioned(u) == x.conditioned(coordinate_min(u, a)));
    CHECK(x.conditioned(u).conditioned(a) == x.conditioned(a).conditioned(u));
  }
}

TEST_CASE("regularity: projections onto the past reconstruct X exactly") {
  ModelFuzzer fuzz(kSeed + 600);
  for (int trial = 0; trial < 10; ++trial) {
    const int dim = fuzz.pick_dim();
    auto model = FieldModel::finite_support(fuzz.random_multilinear_spec(dim), InnovationSpec{});
    const SitePolynomial& x = model.base_polynomial();
    // sum over u <= 0 of P_u(X_0) = monomials with max in [-reach, 0] = X_0
    MultiIndex lo = MultiIndex::zero(dim) - model.reach();
    CHECK(x.max_in_box(lo, MultiIndex::zero(dim)) == x);
  }
}

TEST_CASE("sigma2 analytic closed forms") {
  SECTION("two-term table kernel summing to 1") {
    auto model = FieldModel::linear(
        CoefficientKernel::table(2, {{MultiIndex{0, 0}, 0.5}, {MultiIndex{1, 0}, 0.5}}),
        InnovationSpec{}, 2, 0.0);
    auto s = sigma2_analytic(model);
    REQUIRE(s.available);
    CHECK_THAT(s.value, Catch::Matchers::WithinRel(1.0, 1e-14));
  }
  SECTION("identity stencil with variance v") {
    auto model = identity_stencil(1, 2.5);
    auto s = sigma2_analytic(model);
    REQUIRE(s.available);
    CHECK(s.value == 2.5);
  }
  SECTION("geometric rho=1/2 per axis in d=2 gives 16") {
    auto model = geometric_half(2);
    auto s = sigma2_analytic(model);
    REQUIRE(s.available);
    CHECK_THAT(s.value, Catch::Matchers::WithinAbs(16.0, 1e-9));
  }
  SECTION("volterra is reported unavailable") {
    PairKernel pairs(2, {{MultiIndex{1, 0}, MultiIndex{0, 1}, 1.0}});
    auto model = FieldModel::volterra(pairs, InnovationSpec{});
    CHECK_FALSE(sigma2_analytic(model).available);
  }
}

TEST_CASE("black-box finite support conditional matches the multilinear mask") {
  // f(x0, x1) = x0 * x1 given both as a black box and as terms.
  FiniteSupportSpec as_fn;
  as_fn.stencil = {MultiIndex{0, 0}, MultiIndex{1, 1}};
  as_fn.fn = [](const std::vector<double>& x) { return x[0] * x[1]; };
  FiniteSupportSpec as_terms;
  as_terms.stencil = as_fn.stencil;
  as_terms.terms = {{{0, 1}, 1.0}};

  auto black = FieldModel::finite_support(as_fn, InnovationSpec{});
  auto exact = FieldModel::finite_support(as_terms, InnovationSpec{});
  QuenchedScenario sc{kSeed, kSeed + 13, 2};
  ReplicationView view(sc, InnovationSpec{}, 0);
  const MultiIndex site{1, 1};
  for (MultiIndex level : {MultiIndex{0, 0}, MultiIndex{1, 1}, MultiIndex{-1, 3}}) {
    CHECK_THAT(conditional_expectation(black, level, site, view),
               Catch::Matchers::WithinAbs(conditional_expectation(exact, level, site, view),
                                          1e-10));
  }
}

TEST_CASE("black-box quadrature conditional matches the resampling oracle") {
  // Genuinely non-multilinear f: x0 * x1^2.
  FiniteSupportSpec spec;
  spec.stencil = {MultiIndex{0, 0}, MultiIndex{1, 0}};
  spec.fn = [](const std::vector<double>& x) { return x[0] * x[1] * x[1] - x[0]; };
  auto model = FieldModel::finite_support(spec, InnovationSpec{});
  QuenchedScenario sc{kSeed, kSeed + 14, 2};
  ReplicationView base(sc, model.innovation(), 1);
  const MultiIndex level{1, 0}, site{2, 1};
  const double quad = conditional_expectation(model, level, site, base);
  OracleEstimate est = orthofield::testing::resampling_conditional(
      base, level, kSeed + 700, 200000,
      [&](const auto& view) { return model.eval_raw(site, view); });
  CHECK(std::abs(est.mean - quad) < 3.0 * est.std_error);
}

TEST_CASE("eval plan reproduces direct polynomial evaluation") {
  ModelFuzzer fuzz(kSeed + 800);
  auto model = FieldModel::volterra(fuzz.random_pair_kernel(2), InnovationSpec{});
  Window w({3, 3});
  const SitePolynomial s = window_sum_polynomial(model, w);
  const SitePolynomial r = remainder_polynomial_of_sum(s, w);
  EvalPlan plan({&s, &r});
  QuenchedScenario sc{kSeed, kSeed + 15, 2};
  std::vector<double> scratch, out;
  for (std::uint64_t rep = 0; rep < 5; ++rep) {
    ReplicationView view(sc, model.innovation(), rep);
    plan.evaluate(view, scratch, out);
    CHECK_THAT(out[0], Catch::Matchers::WithinRel(s.evaluate(view), 1e-13));
    CHECK_THAT(out[1], Catch::Matchers::WithinAbs(r.evaluate(view), 1e-13));
  }
}
