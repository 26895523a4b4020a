#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace exch {

/// Rows are theta^j - theta^baseline for every non-baseline environment j,
/// in original environment order; columns run over (source, statistic)
/// row-major, so D = d_sources * k_order.
struct ModulationMatrix {
  Eigen::MatrixXd entries;
  std::size_t baseline_index = 0;
  std::size_t d_sources = 0;
  std::size_t k_order = 1;

  std::size_t columns() const noexcept { return d_sources * k_order; }
};

struct VariabilityReport {
  std::size_t rank = 0;
  bool full_column_rank = false;
  double condition_number = 0.0;  ///< +inf when every singular value is below tolerance
  std::vector<double> singular_values;
  double tolerance = 1e-10;
  std::vector<std::string> flags;
};

inline constexpr double kDefaultRankTolerance = 1e-10;

/// TCL-style modulation matrix from an E x d parameter table.
ModulationMatrix build_modulation_matrix(const Eigen::MatrixXd& thetas, std::size_t baseline_index = 0);

/// GCL-style matrix: each environment holds a d x k block that is flattened
/// row-major before the baseline subtraction.
ModulationMatrix build_gcl_modulation_matrix(const std::vector<Eigen::MatrixXd>& thetas,
                                             std::size_t baseline_index = 0);

/// Rank is the number of singular values above tolerance * sigma_max.
VariabilityReport check_sufficient_variability(const ModulationMatrix& modulation,
                                               double tolerance = kDefaultRankTolerance);

/// Per column: true when max_e |theta_k^e - theta_k^0| <= tolerance.
std::vector<bool> detect_delta_prior(const Eigen::MatrixXd& param_samples, double tolerance);

// --- interventional discrepancy ------------------------------------------

enum class DensityFamily { Gaussian, Laplace };

std::string_view to_string(DensityFamily f) noexcept;
std::optional<DensityFamily> parse_density_family(std::string_view name) noexcept;

/// One-dimensional closed-form density. `scale` is the standard deviation for
/// Gaussian and the diversity b for Laplace.
struct Density {
  DensityFamily family = DensityFamily::Gaussian;
  double location = 0.0;
  double scale = 1.0;

  double log_pdf(double z) const;
  double pdf(double z) const;
};

struct DiscrepancyQuery {
  Density p;
  Density p_tilde;
  double lo = -5.0;
  double hi = 5.0;
  std::size_t grid_points = 10001;
  double derivative_step = 1e-4;
  double zero_tolerance = 1e-6;
};

/// Query with the default grid: locations +- 5 sigma_max for Gaussian pairs,
/// +- 8 b_max when either side is Laplace.
DiscrepancyQuery default_discrepancy_query(const Density& p, const Density& p_tilde);

struct DiscrepancyResult {
  double fraction_zero = 0.0;
  bool holds_ae = false;
};

inline constexpr double kAlmostEverywhereThreshold = 0.01;

/// Share of grid points where the central-difference derivative of
/// log(p_tilde / p) is within zero_tolerance of 0; the condition holds almost
/// everywhere when that share is at most 1%.
DiscrepancyResult interventional_discrepancy_fraction(const DiscrepancyQuery& query);

}  // namespace exch
