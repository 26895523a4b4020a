#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace exch {

enum class TestMethod { FisherZ, SpearmanZ, ResidualPermutation };

std::string_view to_string(TestMethod m) noexcept;
/// Accepts the CLI spellings "fisher-z", "spearman-z", "residual-perm".
std::optional<TestMethod> parse_test_method(std::string_view name) noexcept;

/// Inputs for which the test is not informative. The result then reports
/// p_value = 1 (independence) instead of failing.
enum class Degeneracy {
  None,
  ZeroVariance,         ///< x or y is constant
  NumericalDegeneracy,  ///< conditioning variable explains x or y almost perfectly
};

std::string_view to_string(Degeneracy d) noexcept;

struct CITestOptions {
  TestMethod method = TestMethod::FisherZ;
  std::size_t permutations = 200;
  std::uint64_t seed = 0;
};

struct CITestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  TestMethod method = TestMethod::FisherZ;
  std::size_t n = 0;
  std::size_t n_permutations = 0;
  Degeneracy degeneracy = Degeneracy::None;
};

/// Minimum sample sizes accepted by each method.
std::size_t min_marginal_samples(TestMethod m) noexcept;
std::size_t min_conditional_samples(TestMethod m) noexcept;

/// Tests x ⊥ y.
///
/// FisherZ: statistic = sqrt(n-3) * atanh(r) on the Pearson correlation,
/// two-sided normal p. SpearmanZ: the same on mid-ranks. ResidualPermutation:
/// distance correlation with an add-one permutation p-value over
/// `options.permutations` shuffles.
CITestResult marginal_independence_test(std::span<const double> x, std::span<const double> y,
                                        const CITestOptions& options = {});

/// Tests x ⊥ y | z for a single conditioning variable.
///
/// Parametric methods use the first-order partial correlation with
/// statistic sqrt(n-4) * atanh(r_xy.z). ResidualPermutation regresses x and y
/// on z by leave-one-out k-nearest-neighbour averaging (k = ceil(sqrt(n)), ties
/// to the lower index) and runs the distance-correlation permutation test on
/// the residuals.
CITestResult conditional_independence_test(std::span<const double> x, std::span<const double> y,
                                           std::span<const double> z,
                                           const CITestOptions& options = {});

// Building blocks, exposed for reuse and testing.

/// Pearson correlation; nullopt when either input has zero variance.
std::optional<double> pearson(std::span<const double> x, std::span<const double> y);

/// Mid-ranks (1-based, ties averaged).
std::vector<double> midranks(std::span<const double> v);

/// Plain (biased, V-statistic) distance correlation. Zero for constant input.
double distance_correlation(std::span<const double> x, std::span<const double> y);

/// x minus its leave-one-out kNN regression on z.
std::vector<double> knn_residuals(std::span<const double> x, std::span<const double> z,
                                  std::size_t k);

}  // namespace exch
