#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "exch/variability.hpp"

namespace exch {

/// Product of independent location-scale marginals of one family.
struct SourceFamily {
  DensityFamily family = DensityFamily::Gaussian;
  std::vector<double> location;
  std::vector<double> scale;

  std::size_t dimension() const noexcept { return location.size(); }
  /// Quantile of coordinate i at u in (0, 1).
  double quantile(std::size_t i, double u) const;
  double cdf(std::size_t i, double v) const;
};

/// Throws DimensionMismatch / InvalidConfig on inconsistent shapes or
/// non-positive scales.
void validate(const SourceFamily& family);

enum class MixingKind { Identity, TriangularAffinePlusTanh };

std::string_view to_string(MixingKind k) noexcept;
std::optional<MixingKind> parse_mixing_kind(std::string_view name) noexcept;

struct MixingSpec {
  MixingKind kind = MixingKind::Identity;
  std::size_t d = 1;
  std::uint64_t seed = 0;
};

/// Deterministic diffeomorphism f: R^d -> R^d.
///
/// TriangularAffinePlusTanh computes o = L * phi(s) + c with
/// phi(t) = t + tanh(t) applied elementwise (phi' in [1, 2]), L unit lower
/// triangular with strictly-lower entries ~ U[-1, 1] and c ~ U[-1, 1]^d, both
/// drawn from `seed`.
class MixingFunction {
 public:
  explicit MixingFunction(const MixingSpec& spec);

  Eigen::VectorXd apply(const Eigen::VectorXd& s) const;
  Eigen::VectorXd invert(const Eigen::VectorXd& o) const;

  /// Row-wise application to an n x d table.
  Eigen::MatrixXd apply_rows(const Eigen::MatrixXd& table) const;
  Eigen::MatrixXd invert_rows(const Eigen::MatrixXd& table) const;

  const MixingSpec& spec() const noexcept { return spec_; }
  const Eigen::MatrixXd& linear_part() const noexcept { return lower_; }
  const Eigen::VectorXd& offset() const noexcept { return offset_; }

 private:
  MixingSpec spec_;
  Eigen::MatrixXd lower_;
  Eigen::VectorXd offset_;
};

/// Coordinatewise increasing map g with g_i(s) = shift_i + slope_i * s, the
/// inverse-CDF transport F_target^-1 ∘ F_base for location-scale families.
struct ElementwiseTransport {
  std::vector<double> shift;
  std::vector<double> slope;

  double apply(std::size_t i, double s) const { return shift[i] + slope[i] * s; }
  Eigen::VectorXd apply(const Eigen::VectorXd& s) const;
  std::size_t dimension() const noexcept { return slope.size(); }

  static ElementwiseTransport identity(std::size_t d);
};

/// Throws FamilyMismatch or DimensionMismatch.
ElementwiseTransport build_elementwise_transport(const SourceFamily& base, const SourceFamily& target);

enum class TwoSampleMethod { KSPerCoordinate, EnergyPermutation };

std::string_view to_string(TwoSampleMethod m) noexcept;
std::optional<TwoSampleMethod> parse_two_sample_method(std::string_view name) noexcept;

struct DualityConfig {
  MixingSpec mixing;
  SourceFamily base;
  std::vector<SourceFamily> per_u;
  std::size_t n_samples = 5000;
  std::uint64_t seed = 0;
  TwoSampleMethod test = TwoSampleMethod::KSPerCoordinate;
  std::size_t permutations = 200;
  double level = 0.01;
  /// Diagnostic mode: replace every transport by the identity, so the
  /// mechanism path no longer reproduces p(s|u).
  bool force_identity_transport = false;
};

void validate(const DualityConfig& config);

/// s ~ per_u[u] coordinatewise, o = f(s). Rows are samples.
Eigen::MatrixXd generate_cause_variability_samples(const DualityConfig& config, std::size_t u);

/// s ~ base coordinatewise, o = f(g_u(s)) on a stream independent of the
/// cause path.
Eigen::MatrixXd generate_mechanism_variability_samples(const DualityConfig& config, std::size_t u);

/// Both pipelines driven by a shared n x d table of uniforms in (0, 1).
/// With matching uniforms the two outputs agree up to rounding.
Eigen::MatrixXd cause_path_from_uniforms(const DualityConfig& config, std::size_t u,
                                         const Eigen::MatrixXd& uniforms);
Eigen::MatrixXd mechanism_path_from_uniforms(const DualityConfig& config, std::size_t u,
                                             const Eigen::MatrixXd& uniforms);

struct TwoSampleResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// Asymptotic two-sided Kolmogorov-Smirnov tail Q_KS(lambda).
double kolmogorov_tail(double lambda);

/// Two-sample KS statistic sup |F_a - F_b| for one coordinate.
double ks_statistic(std::vector<double> a, std::vector<double> b);

/// Per-coordinate KS with Bonferroni (min p * d, capped at 1; statistic is the
/// largest D), or the V-statistic energy distance with an add-one permutation
/// p-value over `permutations` relabelings.
TwoSampleResult two_sample_test(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                                TwoSampleMethod method, std::size_t permutations = 200,
                                std::uint64_t seed = 0);

struct DualityUResult {
  std::size_t u = 0;
  double statistic = 0.0;     ///< observation-space statistic
  double p_observed = 1.0;    ///< observation-space p
  double p_source = 1.0;      ///< p after pulling both tables back through f^-1
  double p_value = 1.0;       ///< Bonferroni over the two spaces
  bool pass = false;
};

struct DualityReport {
  std::vector<DualityUResult> per_u_results;
  bool overall_pass = false;
  double level = 0.01;
};

DualityReport verify_duality(const DualityConfig& config);

}  // namespace exch
