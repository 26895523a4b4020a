#include "exch/duality.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "exch/error.hpp"
#include "exch/rng.hpp"

namespace exch {

namespace {

constexpr std::uint64_t kCausePathKey = 0xC0;
constexpr std::uint64_t kMechanismPathKey = 0xD0;
constexpr std::uint64_t kTestKey = 0xE0;
constexpr std::size_t kMaxCachedPool = 3000;

double phi(double t) { return t + std::tanh(t); }

/// Solves t + tanh(t) = y. The root lies in [y - 1, y + 1] and phi' >= 1, so
/// bracketed Newton converges in a handful of steps.
double phi_inverse(double y) {
  double lo = y - 1.0;
  double hi = y + 1.0;
  double t = 0.5 * y;
  for (int it = 0; it < 100; ++it) {
    const double th = std::tanh(t);
    const double f = t + th - y;
    if (f == 0.0) return t;
    if (f > 0.0) hi = t; else lo = t;
    double next = t - f / (2.0 - th * th);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - t) <= 1e-16 * std::max(1.0, std::abs(t))) return next;
    t = next;
  }
  return t;
}

Eigen::MatrixXd uniform_table(std::uint64_t seed, std::size_t n, std::size_t d) {
  Stream s(seed);
  Eigen::MatrixXd u(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < u.rows(); ++i)
    for (Eigen::Index j = 0; j < u.cols(); ++j) u(i, j) = s.uniform01();
  return u;
}

void check_u(const DualityConfig& config, std::size_t u) {
  if (u >= config.per_u.size())
    throw Error(ErrorCode::InvalidConfig, "u index " + std::to_string(u) + " out of range for " +
                                              std::to_string(config.per_u.size()) + " targets");
}

ElementwiseTransport transport_for(const DualityConfig& config, std::size_t u) {
  if (config.force_identity_transport) return ElementwiseTransport::identity(config.base.dimension());
  return build_elementwise_transport(config.base, config.per_u[u]);
}

double euclidean(const Eigen::MatrixXd& pool, Eigen::Index i, Eigen::Index j) {
  return (pool.row(i) - pool.row(j)).norm();
}

/// Energy statistic for the split where label[i] says whether pooled row i
/// belongs to the first sample.
double energy_for_split(const Eigen::MatrixXd& pool, const std::vector<double>& cache,
                        const std::vector<char>& first, std::size_t n, std::size_t m) {
  const auto total = static_cast<std::size_t>(pool.rows());
  double aa = 0.0;
  double bb = 0.0;
  double ab = 0.0;
  for (std::size_t i = 0; i < total; ++i) {
    for (std::size_t j = i + 1; j < total; ++j) {
      const double dij = cache.empty()
                             ? euclidean(pool, static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))
                             : cache[i * total + j];
      if (first[i] && first[j]) aa += dij;
      else if (!first[i] && !first[j]) bb += dij;
      else ab += dij;
    }
  }
  const auto dn = static_cast<double>(n);
  const auto dm = static_cast<double>(m);
  // Ordered-pair means over all n^2 / m^2 pairs (V-statistic), so >= 0.
  return 2.0 * ab / (dn * dm) - 2.0 * aa / (dn * dn) - 2.0 * bb / (dm * dm);
}

TwoSampleResult energy_test(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                            std::size_t permutations, std::uint64_t seed) {
  const auto n = static_cast<std::size_t>(a.rows());
  const auto m = static_cast<std::size_t>(b.rows());
  const std::size_t total = n + m;
  Eigen::MatrixXd pool(static_cast<Eigen::Index>(total), a.cols());
  pool << a, b;

  std::vector<double> cache;
  if (total <= kMaxCachedPool) {
    cache.assign(total * total, 0.0);
    for (std::size_t i = 0; i < total; ++i)
      for (std::size_t j = i + 1; j < total; ++j)
        cache[i * total + j] = euclidean(pool, static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }

  std::vector<char> first(total, 0);
  std::fill(first.begin(), first.begin() + static_cast<std::ptrdiff_t>(n), 1);
  const double observed = energy_for_split(pool, cache, first, n, m);

  Stream stream(seed);
  const double threshold = observed - 1e-12 * (std::abs(observed) + 1.0);
  std::size_t exceed = 0;
  for (std::size_t rep = 0; rep < permutations; ++rep) {
    for (std::size_t i = total - 1; i > 0; --i) std::swap(first[i], first[stream.below(i + 1)]);
    if (energy_for_split(pool, cache, first, n, m) >= threshold) ++exceed;
  }
  return {observed, static_cast<double>(exceed + 1) / static_cast<double>(permutations + 1)};
}

}  // namespace

double SourceFamily::quantile(std::size_t i, double u) const {
  return family == DensityFamily::Gaussian ? normal_quantile(u, location[i], scale[i])
                                           : laplace_quantile(u, location[i], scale[i]);
}

double SourceFamily::cdf(std::size_t i, double v) const {
  return family == DensityFamily::Gaussian ? normal_cdf((v - location[i]) / scale[i])
                                           : laplace_cdf(v, location[i], scale[i]);
}

void validate(const SourceFamily& f) {
  if (f.location.empty()) throw Error(ErrorCode::DimensionMismatch, "source dimension must be at least 1");
  if (f.scale.size() != f.location.size())
    throw Error(ErrorCode::DimensionMismatch, "location and scale lengths differ");
  for (double s : f.scale)
    if (!(s > 0.0) || !std::isfinite(s)) throw Error(ErrorCode::InvalidConfig, "scales must be positive");
  for (double l : f.location)
    if (!std::isfinite(l)) throw Error(ErrorCode::InvalidConfig, "locations must be finite");
}

std::string_view to_string(MixingKind k) noexcept {
  return k == MixingKind::Identity ? "identity" : "triangular_affine_plus_tanh";
}

std::optional<MixingKind> parse_mixing_kind(std::string_view name) noexcept {
  if (name == "identity") return MixingKind::Identity;
  if (name == "triangular_affine_plus_tanh") return MixingKind::TriangularAffinePlusTanh;
  return std::nullopt;
}

MixingFunction::MixingFunction(const MixingSpec& spec) : spec_(spec) {
  if (spec.d == 0) throw Error(ErrorCode::InvalidConfig, "mixing dimension must be at least 1");
  const auto d = static_cast<Eigen::Index>(spec.d);
  lower_ = Eigen::MatrixXd::Identity(d, d);
  offset_ = Eigen::VectorXd::Zero(d);
  if (spec.kind == MixingKind::TriangularAffinePlusTanh) {
    Stream s(derive_seed(spec.seed, 0xF0));
    for (Eigen::Index i = 0; i < d; ++i)
      for (Eigen::Index j = 0; j < i; ++j) lower_(i, j) = s.uniform(-1.0, 1.0);
    for (Eigen::Index i = 0; i < d; ++i) offset_(i) = s.uniform(-1.0, 1.0);
  }
}

Eigen::VectorXd MixingFunction::apply(const Eigen::VectorXd& s) const {
  if (s.size() != lower_.rows()) throw Error(ErrorCode::DimensionMismatch, "mixing input dimension");
  if (spec_.kind == MixingKind::Identity) return s;
  return lower_ * s.unaryExpr(&phi) + offset_;
}

Eigen::VectorXd MixingFunction::invert(const Eigen::VectorXd& o) const {
  if (o.size() != lower_.rows()) throw Error(ErrorCode::DimensionMismatch, "mixing input dimension");
  if (spec_.kind == MixingKind::Identity) return o;
  const Eigen::VectorXd y =
      lower_.triangularView<Eigen::UnitLower>().solve(o - offset_);
  return y.unaryExpr(&phi_inverse);
}

Eigen::MatrixXd MixingFunction::apply_rows(const Eigen::MatrixXd& table) const {
  Eigen::MatrixXd out(table.rows(), table.cols());
  for (Eigen::Index i = 0; i < table.rows(); ++i) out.row(i) = apply(table.row(i).transpose()).transpose();
  return out;
}

Eigen::MatrixXd MixingFunction::invert_rows(const Eigen::MatrixXd& table) const {
  Eigen::MatrixXd out(table.rows(), table.cols());
  for (Eigen::Index i = 0; i < table.rows(); ++i) out.row(i) = invert(table.row(i).transpose()).transpose();
  return out;
}

Eigen::VectorXd ElementwiseTransport::apply(const Eigen::VectorXd& s) const {
  Eigen::VectorXd out(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i) out(i) = apply(static_cast<std::size_t>(i), s(i));
  return out;
}

ElementwiseTransport ElementwiseTransport::identity(std::size_t d) {
  return {std::vector<double>(d, 0.0), std::vector<double>(d, 1.0)};
}

ElementwiseTransport build_elementwise_transport(const SourceFamily& base, const SourceFamily& target) {
  validate(base);
  validate(target);
  if (base.family != target.family)
    throw Error(ErrorCode::FamilyMismatch, "transport needs base and target of the same family");
  if (base.dimension() != target.dimension())
    throw Error(ErrorCode::DimensionMismatch, "base has dimension " + std::to_string(base.dimension()) +
                                                  ", target " + std::to_string(target.dimension()));
  ElementwiseTransport g;
  const std::size_t d = base.dimension();
  g.shift.resize(d);
  g.slope.resize(d);
  for (std::size_t i = 0; i < d; ++i) {
    // F_t^-1(F_b(s)) = mu_t + (scale_t / scale_b) (s - mu_b) within a location-scale family.
    g.slope[i] = target.scale[i] / base.scale[i];
    g.shift[i] = target.location[i] - g.slope[i] * base.location[i];
  }
  return g;
}

std::string_view to_string(TwoSampleMethod m) noexcept {
  return m == TwoSampleMethod::KSPerCoordinate ? "ks_per_coordinate" : "energy_permutation";
}

std::optional<TwoSampleMethod> parse_two_sample_method(std::string_view name) noexcept {
  if (name == "ks_per_coordinate") return TwoSampleMethod::KSPerCoordinate;
  if (name == "energy_permutation") return TwoSampleMethod::EnergyPermutation;
  return std::nullopt;
}

void validate(const DualityConfig& config) {
  validate(config.base);
  if (config.mixing.d != config.base.dimension())
    throw Error(ErrorCode::DimensionMismatch, "mixing dimension " + std::to_string(config.mixing.d) +
                                                  " differs from source dimension " +
                                                  std::to_string(config.base.dimension()));
  if (config.per_u.empty()) throw Error(ErrorCode::InvalidConfig, "per_u must list at least one target");
  for (std::size_t u = 0; u < config.per_u.size(); ++u) {
    validate(config.per_u[u]);
    if (config.per_u[u].dimension() != config.base.dimension())
      throw Error(ErrorCode::DimensionMismatch, "per_u[" + std::to_string(u) + "] dimension differs from base");
    if (config.per_u[u].family != config.base.family)
      throw Error(ErrorCode::FamilyMismatch, "per_u[" + std::to_string(u) + "] family differs from base");
  }
  if (!(config.level > 0.0 && config.level < 1.0))
    throw Error(ErrorCode::InvalidConfig, "level must lie in (0, 1)");
}

Eigen::MatrixXd cause_path_from_uniforms(const DualityConfig& config, std::size_t u,
                                         const Eigen::MatrixXd& uniforms) {
  validate(config);
  check_u(config, u);
  const SourceFamily& target = config.per_u[u];
  if (static_cast<std::size_t>(uniforms.cols()) != target.dimension())
    throw Error(ErrorCode::DimensionMismatch, "uniform table width differs from source dimension");
  Eigen::MatrixXd s(uniforms.rows(), uniforms.cols());
  for (Eigen::Index i = 0; i < s.rows(); ++i)
    for (Eigen::Index j = 0; j < s.cols(); ++j)
      s(i, j) = target.quantile(static_cast<std::size_t>(j), uniforms(i, j));
  return MixingFunction(config.mixing).apply_rows(s);
}

Eigen::MatrixXd mechanism_path_from_uniforms(const DualityConfig& config, std::size_t u,
                                             const Eigen::MatrixXd& uniforms) {
  validate(config);
  check_u(config, u);
  if (static_cast<std::size_t>(uniforms.cols()) != config.base.dimension())
    throw Error(ErrorCode::DimensionMismatch, "uniform table width differs from source dimension");
  const ElementwiseTransport g = transport_for(config, u);
  Eigen::MatrixXd s(uniforms.rows(), uniforms.cols());
  for (Eigen::Index i = 0; i < s.rows(); ++i)
    for (Eigen::Index j = 0; j < s.cols(); ++j) {
      const auto coord = static_cast<std::size_t>(j);
      s(i, j) = g.apply(coord, config.base.quantile(coord, uniforms(i, j)));
    }
  return MixingFunction(config.mixing).apply_rows(s);
}

Eigen::MatrixXd generate_cause_variability_samples(const DualityConfig& config, std::size_t u) {
  return cause_path_from_uniforms(
      config, u, uniform_table(derive_seed(config.seed, u, kCausePathKey), config.n_samples,
                               config.base.dimension()));
}

Eigen::MatrixXd generate_mechanism_variability_samples(const DualityConfig& config, std::size_t u) {
  return mechanism_path_from_uniforms(
      config, u, uniform_table(derive_seed(config.seed, u, kMechanismPathKey), config.n_samples,
                               config.base.dimension()));
}

double kolmogorov_tail(double lambda) {
  if (lambda < 0.2) return 1.0;
  double sum = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += sign * term;
    if (term < 1e-17) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

double ks_statistic(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const auto n = static_cast<double>(a.size());
  const auto m = static_cast<double>(b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / n - static_cast<double>(j) / m));
  }
  return d;
}

TwoSampleResult two_sample_test(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                                TwoSampleMethod method, std::size_t permutations, std::uint64_t seed) {
  if (a.rows() == 0 || b.rows() == 0)
    throw Error(ErrorCode::InsufficientSamples, "two_sample_test needs non-empty tables");
  if (a.cols() != b.cols() || a.cols() == 0)
    throw Error(ErrorCode::DimensionMismatch, "two_sample_test tables differ in dimension");

  if (method == TwoSampleMethod::EnergyPermutation) return energy_test(a, b, permutations, seed);

  if (a.rows() < 50 || b.rows() < 50)
    throw Error(ErrorCode::InsufficientSamples, "asymptotic KS needs at least 50 rows per table");
  const auto n = static_cast<double>(a.rows());
  const auto m = static_cast<double>(b.rows());
  const double root_ne = std::sqrt(n * m / (n + m));
  TwoSampleResult r;
  double min_p = 1.0;
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    std::vector<double> ca(a.col(j).data(), a.col(j).data() + a.rows());
    std::vector<double> cb(b.col(j).data(), b.col(j).data() + b.rows());
    const double dstat = ks_statistic(std::move(ca), std::move(cb));
    r.statistic = std::max(r.statistic, dstat);
    // Stephens' finite-sample correction of the limiting distribution.
    min_p = std::min(min_p, kolmogorov_tail((root_ne + 0.12 + 0.11 / root_ne) * dstat));
  }
  r.p_value = std::min(1.0, min_p * static_cast<double>(a.cols()));
  return r;
}

DualityReport verify_duality(const DualityConfig& config) {
  validate(config);
  const MixingFunction f(config.mixing);
  DualityReport report;
  report.level = config.level;
  report.overall_pass = true;
  for (std::size_t u = 0; u < config.per_u.size(); ++u) {
    const Eigen::MatrixXd cause = generate_cause_variability_samples(config, u);
    const Eigen::MatrixXd mechanism = generate_mechanism_variability_samples(config, u);
    const std::uint64_t test_seed = derive_seed(config.seed, u, kTestKey);

    const auto observed = two_sample_test(cause, mechanism, config.test, config.permutations, test_seed);
    const auto source = two_sample_test(f.invert_rows(cause), f.invert_rows(mechanism), config.test,
                                        config.permutations, test_seed);
    DualityUResult r;
    r.u = u;
    r.statistic = observed.statistic;
    r.p_observed = observed.p_value;
    r.p_source = source.p_value;
    r.p_value = std::min(1.0, 2.0 * std::min(observed.p_value, source.p_value));
    r.pass = r.p_value >= config.level;
    report.overall_pass = report.overall_pass && r.pass;
    report.per_u_results.push_back(r);
  }
  return report;
}

}  // namespace exch
