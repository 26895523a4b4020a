#include "exch/citest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <utility>

#include "exch/error.hpp"
#include "exch/rng.hpp"

namespace exch {

namespace {

constexpr double kDegenerateTolerance = 1e-12;

bool is_constant(std::span<const double> v) {
  if (v.empty()) return true;
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return *lo == *hi;
}

void check_inputs(std::initializer_list<std::span<const double>> columns, std::size_t min_n,
                  std::string_view what) {
  const std::size_t n = columns.begin()->size();
  for (auto c : columns) {
    if (c.size() != n) throw Error(ErrorCode::ShapeMismatch, std::string(what) + ": input lengths differ");
  }
  if (n < min_n)
    throw Error(ErrorCode::InsufficientSamples, std::string(what) + ": need at least " +
                                                    std::to_string(min_n) + " samples, got " +
                                                    std::to_string(n));
  for (auto c : columns)
    for (double v : c)
      if (!std::isfinite(v)) throw Error(ErrorCode::InvalidInput, std::string(what) + ": non-finite value");
}

/// sqrt(dof) * atanh(r), saturating to +-inf at |r| >= 1.
double fisher_statistic(double r, std::size_t dof) {
  if (r >= 1.0) return std::numeric_limits<double>::infinity();
  if (r <= -1.0) return -std::numeric_limits<double>::infinity();
  return std::sqrt(static_cast<double>(dof)) * std::atanh(r);
}

CITestResult degenerate(TestMethod method, std::size_t n, Degeneracy why) {
  CITestResult r;
  r.method = method;
  r.n = n;
  r.p_value = 1.0;
  r.statistic = 0.0;
  r.degeneracy = why;
  return r;
}

/// Double-centred pairwise distance matrix, row-major n x n.
std::vector<double> centred_distances(std::span<const double> v) {
  const std::size_t n = v.size();
  std::vector<double> d(n * n);
  std::vector<double> row_mean(n, 0.0);
  double grand = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double dij = std::abs(v[i] - v[j]);
      d[i * n + j] = dij;
      row_mean[i] += dij;
    }
    grand += row_mean[i];
    row_mean[i] /= static_cast<double>(n);
  }
  grand /= static_cast<double>(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) d[i * n + j] += grand - row_mean[i] - row_mean[j];
  return d;
}

double mean_product(const std::vector<double>& a, const std::vector<double>& b,
                    std::span<const std::size_t> perm) {
  const std::size_t n = perm.size();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double* arow = &a[i * n];
    const double* brow = &b[perm[i] * n];
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) acc += arow[j] * brow[perm[j]];
    total += acc;
  }
  return total / static_cast<double>(n * n);
}

CITestResult distance_permutation_test(std::span<const double> x, std::span<const double> y,
                                       const CITestOptions& options) {
  const std::size_t n = x.size();
  if (is_constant(x) || is_constant(y))
    return degenerate(TestMethod::ResidualPermutation, n, Degeneracy::ZeroVariance);

  // Canonical argument order makes test(x, y) and test(y, x) share one
  // permutation stream and therefore return identical p-values.
  if (std::lexicographical_compare(y.begin(), y.end(), x.begin(), x.end())) std::swap(x, y);

  const auto a = centred_distances(x);
  const auto b = centred_distances(y);
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});

  const double dcov = mean_product(a, b, perm);
  const double dvar_x = mean_product(a, a, perm);
  const double dvar_y = mean_product(b, b, perm);

  Stream stream(derive_seed(options.seed, 0x70e4u));
  std::size_t exceed = 0;
  const double threshold = dcov - 1e-12 * std::abs(dcov);
  for (std::size_t rep = 0; rep < options.permutations; ++rep) {
    for (std::size_t i = n - 1; i > 0; --i) std::swap(perm[i], perm[stream.below(i + 1)]);
    if (mean_product(a, b, perm) >= threshold) ++exceed;
  }

  CITestResult r;
  r.method = TestMethod::ResidualPermutation;
  r.n = n;
  r.n_permutations = options.permutations;
  r.statistic = std::sqrt(std::max(0.0, dcov) / std::sqrt(dvar_x * dvar_y));
  r.p_value = static_cast<double>(exceed + 1) / static_cast<double>(options.permutations + 1);
  return r;
}

}  // namespace

std::string_view to_string(TestMethod m) noexcept {
  switch (m) {
    case TestMethod::FisherZ: return "fisher-z";
    case TestMethod::SpearmanZ: return "spearman-z";
    case TestMethod::ResidualPermutation: return "residual-perm";
  }
  return "unknown";
}

std::optional<TestMethod> parse_test_method(std::string_view name) noexcept {
  for (auto m : {TestMethod::FisherZ, TestMethod::SpearmanZ, TestMethod::ResidualPermutation})
    if (to_string(m) == name) return m;
  return std::nullopt;
}

std::string_view to_string(Degeneracy d) noexcept {
  switch (d) {
    case Degeneracy::None: return "none";
    case Degeneracy::ZeroVariance: return "zero_variance";
    case Degeneracy::NumericalDegeneracy: return "numerical_degeneracy";
  }
  return "unknown";
}

std::size_t min_marginal_samples(TestMethod m) noexcept {
  return m == TestMethod::ResidualPermutation ? 20 : 8;
}

std::size_t min_conditional_samples(TestMethod m) noexcept {
  return m == TestMethod::ResidualPermutation ? 30 : 10;
}

std::optional<double> pearson(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n == 0 || y.size() != n || is_constant(x) || is_constant(y)) return std::nullopt;
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<double> midranks(std::span<const double> v) {
  const std::size_t n = v.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = rank;
    i = j + 1;
  }
  return ranks;
}

double distance_correlation(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error(ErrorCode::ShapeMismatch, "distance_correlation: lengths differ");
  if (x.empty() || is_constant(x) || is_constant(y)) return 0.0;
  const auto a = centred_distances(x);
  const auto b = centred_distances(y);
  std::vector<std::size_t> id(x.size());
  std::iota(id.begin(), id.end(), std::size_t{0});
  const double dcov = mean_product(a, b, id);
  return std::sqrt(std::max(0.0, dcov) / std::sqrt(mean_product(a, a, id) * mean_product(b, b, id)));
}

std::vector<double> knn_residuals(std::span<const double> x, std::span<const double> z,
                                  std::size_t k) {
  const std::size_t n = x.size();
  if (z.size() != n) throw Error(ErrorCode::ShapeMismatch, "knn_residuals: lengths differ");
  if (n < 2 || k == 0) throw Error(ErrorCode::InsufficientSamples, "knn_residuals: need n >= 2, k >= 1");
  k = std::min(k, n - 1);

  std::vector<std::pair<double, std::size_t>> cand;
  cand.reserve(n - 1);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    cand.clear();
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) cand.emplace_back(std::abs(z[i] - z[j]), j);
    std::nth_element(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(k - 1), cand.end());
    // nth_element leaves the k smallest (by distance, then index) in front.
    double fit = 0.0;
    for (std::size_t t = 0; t < k; ++t) fit += x[cand[t].second];
    out[i] = x[i] - fit / static_cast<double>(k);
  }
  return out;
}

CITestResult marginal_independence_test(std::span<const double> x, std::span<const double> y,
                                        const CITestOptions& options) {
  check_inputs({x, y}, min_marginal_samples(options.method), "marginal_independence_test");
  const std::size_t n = x.size();

  if (options.method == TestMethod::ResidualPermutation)
    return distance_permutation_test(x, y, options);

  std::optional<double> r;
  if (options.method == TestMethod::SpearmanZ) {
    const auto rx = midranks(x);
    const auto ry = midranks(y);
    r = pearson(rx, ry);
  } else {
    r = pearson(x, y);
  }
  if (!r) return degenerate(options.method, n, Degeneracy::ZeroVariance);

  CITestResult out;
  out.method = options.method;
  out.n = n;
  out.statistic = fisher_statistic(*r, n - 3);
  out.p_value = normal_two_sided_p(out.statistic);
  return out;
}

CITestResult conditional_independence_test(std::span<const double> x, std::span<const double> y,
                                           std::span<const double> z,
                                           const CITestOptions& options) {
  check_inputs({x, y, z}, min_conditional_samples(options.method), "conditional_independence_test");
  const std::size_t n = x.size();

  if (is_constant(x) || is_constant(y)) return degenerate(options.method, n, Degeneracy::ZeroVariance);

  if (options.method == TestMethod::ResidualPermutation) {
    const auto k = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n))));
    const auto rx = knn_residuals(x, z, k);
    const auto ry = knn_residuals(y, z, k);
    return distance_permutation_test(rx, ry, options);
  }

  std::vector<double> rank_x;
  std::vector<double> rank_y;
  std::vector<double> rank_z;
  if (options.method == TestMethod::SpearmanZ) {
    rank_x = midranks(x);
    rank_y = midranks(y);
    rank_z = midranks(z);
    x = rank_x;
    y = rank_y;
    z = rank_z;
  }

  const double rxy = pearson(x, y).value_or(0.0);
  // A constant conditioning variable carries no information.
  const double rxz = pearson(x, z).value_or(0.0);
  const double ryz = pearson(y, z).value_or(0.0);
  const double dx = 1.0 - rxz * rxz;
  const double dy = 1.0 - ryz * ryz;
  if (dx < kDegenerateTolerance || dy < kDegenerateTolerance)
    return degenerate(options.method, n, Degeneracy::NumericalDegeneracy);

  const double r = std::clamp((rxy - rxz * ryz) / std::sqrt(dx * dy), -1.0, 1.0);
  CITestResult out;
  out.method = options.method;
  out.n = n;
  out.statistic = fisher_statistic(r, n - 4);
  out.p_value = normal_two_sided_p(out.statistic);
  return out;
}

}  // namespace exch
