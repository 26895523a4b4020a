#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "exch/citest.hpp"
#include "exch/error.hpp"
#include "exch/rng.hpp"
#include "oracles.hpp"

namespace exch {
namespace {

std::vector<double> laplace_draws(Stream& s, std::size_t n) {
  std::vector<double> v(n);
  for (auto& x : v) x = s.laplace(0.0, 1.0);
  return v;
}

TEST(Pearson, MatchesLongDoubleReference) {
  Stream s(1);
  const auto x = laplace_draws(s, 500);
  auto y = laplace_draws(s, 500);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += 0.3 * x[i];
  EXPECT_NEAR(*pearson(x, y), testing::pearson_ref(x, y), 1e-12);
  const std::vector<double> flat(500, 2.0);
  EXPECT_FALSE(pearson(x, flat).has_value());
}

TEST(Midranks, AveragesTies) {
  const std::vector<double> v{3.0, 1.0, 3.0, 2.0, 3.0};
  EXPECT_EQ(midranks(v), (std::vector<double>{4.0, 1.0, 4.0, 2.0, 4.0}));
}

TEST(Marginal, IdenticalInputsRejectHard) {
  Stream s(2);
  const auto x = laplace_draws(s, 200);
  for (auto m : {TestMethod::FisherZ, TestMethod::SpearmanZ}) {
    const auto r = marginal_independence_test(x, x, {m});
    EXPECT_LT(r.p_value, 1e-12) << to_string(m);
  }
  const auto perm = marginal_independence_test(x, x, {TestMethod::ResidualPermutation, 99, 3});
  EXPECT_NEAR(perm.p_value, 1.0 / 100.0, 1e-15);
  EXPECT_EQ(perm.n_permutations, 99u);
}

TEST(Marginal, FisherAgreesWithPermutationOracle) {
  // Oracle: permutation distribution of |r| with 1e5 shuffles.
  Stream s(3);
  const auto x = laplace_draws(s, 1000);
  auto y = laplace_draws(s, 1000);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += 0.06 * x[i];
  const double observed = std::abs(testing::pearson_ref(x, y));
  std::mt19937_64 rng(17);
  auto shuffled = y;
  std::size_t exceed = 0;
  const std::size_t kShuffles = 100000;
  for (std::size_t b = 0; b < kShuffles; ++b) {
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    if (std::abs(testing::pearson_ref(x, shuffled)) >= observed) ++exceed;
  }
  const double oracle_p = static_cast<double>(exceed) / kShuffles;
  const auto r = marginal_independence_test(x, y);
  EXPECT_NEAR(r.p_value, oracle_p, 0.02);
  EXPECT_NEAR(r.statistic, std::sqrt(997.0) * std::atanh(testing::pearson_ref(x, y)), 1e-9);
}

TEST(Marginal, ConstantInputIsFlaggedNotFatal) {
  Stream s(4);
  const auto x = laplace_draws(s, 50);
  const std::vector<double> c(50, 1.5);
  for (auto m : {TestMethod::FisherZ, TestMethod::SpearmanZ, TestMethod::ResidualPermutation}) {
    const auto r = marginal_independence_test(x, c, {m, 50, 1});
    EXPECT_EQ(r.p_value, 1.0);
    EXPECT_EQ(r.degeneracy, Degeneracy::ZeroVariance);
  }
}

TEST(Marginal, SymmetricInArguments) {
  Stream s(5);
  const auto x = laplace_draws(s, 300);
  auto y = laplace_draws(s, 300);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += 0.1 * x[i] * x[i];
  for (auto m : {TestMethod::FisherZ, TestMethod::SpearmanZ, TestMethod::ResidualPermutation}) {
    const CITestOptions o{m, 100, 9};
    EXPECT_DOUBLE_EQ(marginal_independence_test(x, y, o).p_value, marginal_independence_test(y, x, o).p_value)
        << to_string(m);
  }
}

TEST(Marginal, SpearmanInvariantToMonotoneMaps) {
  Stream s(6);
  const auto x = laplace_draws(s, 400);
  auto y = laplace_draws(s, 400);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += 0.2 * x[i];
  std::vector<double> ex(x.size()), cube(y.size());
  std::transform(x.begin(), x.end(), ex.begin(), [](double v) { return std::exp(v); });
  std::transform(y.begin(), y.end(), cube.begin(), [](double v) { return v * v * v + v; });
  const CITestOptions o{TestMethod::SpearmanZ};
  EXPECT_NEAR(marginal_independence_test(x, y, o).p_value, marginal_independence_test(ex, cube, o).p_value, 1e-12);
}

TEST(Marginal, FisherNullPValuesAreUniform) {
  std::vector<double> p;
  for (std::uint64_t rep = 0; rep < 1000; ++rep) {
    Stream s(derive_seed(77, rep));
    const auto x = laplace_draws(s, 100);
    const auto y = laplace_draws(s, 100);
    p.push_back(marginal_independence_test(x, y).p_value);
  }
  EXPECT_LT(testing::one_sample_ks(p, testing::uniform01_cdf), 0.06);
}

TEST(Marginal, TooFewSamplesThrow) {
  const std::vector<double> x(5, 0.0);
  try {
    marginal_independence_test(x, x);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InsufficientSamples);
  }
  const std::vector<double> y(10, 0.0);
  EXPECT_THROW(marginal_independence_test(y, std::vector<double>(11, 0.0)), Error);
  EXPECT_THROW(conditional_independence_test(y, y, y, {TestMethod::ResidualPermutation}), Error);
}

struct ChainCase {
  std::vector<double> x, y, z;
};

/// x -> z -> y: x ⊥ y | z holds; x ⊥ z | y does not.
ChainCase chain(std::uint64_t seed, std::size_t n) {
  Stream s(seed);
  ChainCase c{laplace_draws(s, n), {}, {}};
  c.z.resize(n);
  c.y.resize(n);
  for (std::size_t i = 0; i < n; ++i) c.z[i] = c.x[i] + s.laplace(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) c.y[i] = c.z[i] + s.laplace(0.0, 1.0);
  return c;
}

TEST(Conditional, ChainMonteCarlo) {
  int accept_null = 0;
  int reject_alt = 0;
  for (std::uint64_t rep = 0; rep < 100; ++rep) {
    const auto c = chain(derive_seed(11, rep), 2000);
    if (conditional_independence_test(c.x, c.y, c.z).p_value > 0.01) ++accept_null;
    if (conditional_independence_test(c.x, c.z, c.y).p_value < 0.01) ++reject_alt;
  }
  EXPECT_GE(accept_null, 95);
  EXPECT_GE(reject_alt, 95);
}

TEST(Conditional, DependenceNotExplainedByZ) {
  Stream s(12);
  const auto x = laplace_draws(s, 500);
  const auto z = laplace_draws(s, 500);
  for (auto m : {TestMethod::FisherZ, TestMethod::SpearmanZ}) {
    EXPECT_LT(conditional_independence_test(x, x, z, {m}).p_value, 1e-10) << to_string(m);
  }
}

TEST(Conditional, ConstantConditioningReducesToMarginal) {
  Stream s(13);
  const auto x = laplace_draws(s, 100);
  auto y = laplace_draws(s, 100);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += 0.25 * x[i];
  const std::vector<double> z(100, 3.0);
  const double r = testing::pearson_ref(x, y);
  const auto res = conditional_independence_test(x, y, z);
  EXPECT_NEAR(res.statistic, std::sqrt(96.0) * std::atanh(r), 1e-9);
}

TEST(Conditional, ZExplainingXIsNumericallyDegenerate) {
  Stream s(14);
  const auto x = laplace_draws(s, 100);
  const auto y = laplace_draws(s, 100);
  const auto r = conditional_independence_test(x, y, x);
  EXPECT_EQ(r.degeneracy, Degeneracy::NumericalDegeneracy);
  EXPECT_EQ(r.p_value, 1.0);
}

TEST(Conditional, ResidualPermutationSeparatesNonlinearChain) {
  Stream s(15);
  const std::size_t n = 400;
  std::vector<double> x(n), z(n), y(n), w(n);
  for (std::size_t i = 0; i < n; ++i) {
    z[i] = s.uniform(-2.0, 2.0);
    x[i] = z[i] * z[i] + 0.3 * s.laplace(0.0, 1.0);
    y[i] = std::sin(2.0 * z[i]) + 0.3 * s.laplace(0.0, 1.0);
    w[i] = x[i] + 0.3 * s.laplace(0.0, 1.0);
  }
  const CITestOptions o{TestMethod::ResidualPermutation, 200, 4};
  EXPECT_GT(conditional_independence_test(x, y, z, o).p_value, 0.01);
  EXPECT_LT(conditional_independence_test(x, w, z, o).p_value, 0.01);
}

TEST(Knn, ResidualOfExactFunctionOfZIsSmall) {
  std::vector<double> z(400), x(400);
  for (std::size_t i = 0; i < z.size(); ++i) {
    z[i] = static_cast<double>(i) / 100.0;
    x[i] = 2.0 * z[i];
  }
  const auto res = knn_residuals(x, z, 2);
  // Interior points: the two neighbours are symmetric, so the residual is 0.
  for (std::size_t i = 1; i + 1 < z.size(); ++i) EXPECT_NEAR(res[i], 0.0, 1e-12);
}

TEST(DistanceCorrelation, KnownValues) {
  const std::vector<double> x{1, 2, 3, 4, 5};
  std::vector<double> lin(x.size());
  std::transform(x.begin(), x.end(), lin.begin(), [](double v) { return -3.0 * v + 1.0; });
  EXPECT_NEAR(distance_correlation(x, lin), 1.0, 1e-12);
  EXPECT_EQ(distance_correlation(x, std::vector<double>(5, 1.0)), 0.0);
}

}  // namespace
}  // namespace exch
