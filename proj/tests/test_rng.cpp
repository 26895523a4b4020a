#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "exch/rng.hpp"

namespace exch {
namespace {

TEST(Rng, QuantilesMatchClosedForms) {
  EXPECT_NEAR(normal_quantile(0.975, 0.0, 1.0), 1.959963984540054, 1e-12);
  EXPECT_NEAR(normal_quantile(0.5, 3.0, 2.0), 3.0, 1e-15);
  EXPECT_NEAR(laplace_quantile(0.25, 0.0, 1.0), std::log(0.5), 1e-15);
  EXPECT_NEAR(laplace_quantile(0.75, 1.0, 2.0), 1.0 - 2.0 * std::log(0.5), 1e-15);
  for (double u : {1e-9, 0.1, 0.3, 0.5, 0.77, 1.0 - 1e-9}) {
    EXPECT_NEAR(laplace_cdf(laplace_quantile(u, 0.4, 1.3), 0.4, 1.3), u, 1e-12);
    EXPECT_NEAR(normal_cdf(normal_quantile(u, 0.0, 1.0)), u, 1e-12);
  }
}

TEST(Rng, TwoSidedNormalTail) {
  EXPECT_DOUBLE_EQ(normal_two_sided_p(0.0), 1.0);
  EXPECT_NEAR(normal_two_sided_p(1.959963984540054), 0.05, 1e-12);
  EXPECT_EQ(normal_two_sided_p(INFINITY), 0.0);
}

TEST(Rng, DerivedSeedsAreDistinctAndStable) {
  static_assert(derive_seed(1, 2, 3, 4) == derive_seed(1, 2, 3, 4));
  std::set<std::uint64_t> seen;
  for (std::uint64_t a = 0; a < 50; ++a)
    for (std::uint64_t b = 0; b < 50; ++b) seen.insert(derive_seed(42, a, b));
  EXPECT_EQ(seen.size(), 2500u);
}

TEST(Rng, StreamDrawsStayInRange) {
  Stream s(9);
  for (int i = 0; i < 100000; ++i) {
    const double u = s.uniform01();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
    ASSERT_LT(s.below(7), 7u);
  }
  EXPECT_EQ(s.uniform(2.5, 2.5), 2.5);
}

}  // namespace
}  // namespace exch
