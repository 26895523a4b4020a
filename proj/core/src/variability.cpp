#include "exch/variability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "exch/error.hpp"

namespace exch {

namespace {

ModulationMatrix difference_rows(const Eigen::MatrixXd& flat, std::size_t baseline, std::size_t d,
                                 std::size_t k) {
  const auto e_count = static_cast<std::size_t>(flat.rows());
  ModulationMatrix m;
  m.baseline_index = baseline;
  m.d_sources = d;
  m.k_order = k;
  m.entries.resize(static_cast<Eigen::Index>(e_count - 1), flat.cols());
  Eigen::Index out = 0;
  for (std::size_t e = 0; e < e_count; ++e) {
    if (e == baseline) continue;
    m.entries.row(out++) = flat.row(static_cast<Eigen::Index>(e)) -
                           flat.row(static_cast<Eigen::Index>(baseline));
  }
  return m;
}

void check_baseline(std::size_t e_count, std::size_t baseline) {
  if (e_count < 2) throw Error(ErrorCode::ShapeMismatch, "need at least 2 environments");
  if (baseline >= e_count)
    throw Error(ErrorCode::ShapeMismatch, "baseline_index " + std::to_string(baseline) +
                                              " out of range for " + std::to_string(e_count) +
                                              " environments");
}

}  // namespace

ModulationMatrix build_modulation_matrix(const Eigen::MatrixXd& thetas, std::size_t baseline_index) {
  check_baseline(static_cast<std::size_t>(thetas.rows()), baseline_index);
  if (thetas.cols() == 0) throw Error(ErrorCode::ShapeMismatch, "parameter dimension must be positive");
  return difference_rows(thetas, baseline_index, static_cast<std::size_t>(thetas.cols()), 1);
}

ModulationMatrix build_gcl_modulation_matrix(const std::vector<Eigen::MatrixXd>& thetas,
                                             std::size_t baseline_index) {
  check_baseline(thetas.size(), baseline_index);
  const Eigen::Index d = thetas.front().rows();
  const Eigen::Index k = thetas.front().cols();
  if (d == 0 || k == 0) throw Error(ErrorCode::ShapeMismatch, "parameter blocks must be non-empty");
  Eigen::MatrixXd flat(static_cast<Eigen::Index>(thetas.size()), d * k);
  for (std::size_t e = 0; e < thetas.size(); ++e) {
    const auto& block = thetas[e];
    if (block.rows() != d || block.cols() != k)
      throw Error(ErrorCode::ShapeMismatch, "environment " + std::to_string(e) + " has a " +
                                                std::to_string(block.rows()) + "x" +
                                                std::to_string(block.cols()) + " block, expected " +
                                                std::to_string(d) + "x" + std::to_string(k));
    for (Eigen::Index i = 0; i < d; ++i)
      for (Eigen::Index j = 0; j < k; ++j) flat(static_cast<Eigen::Index>(e), i * k + j) = block(i, j);
  }
  return difference_rows(flat, baseline_index, static_cast<std::size_t>(d), static_cast<std::size_t>(k));
}

VariabilityReport check_sufficient_variability(const ModulationMatrix& modulation, double tolerance) {
  if (!(tolerance > 0.0 && tolerance < 1.0))
    throw Error(ErrorCode::InvalidConfig, "tolerance must lie in (0, 1)");
  const auto& l = modulation.entries;
  if (l.rows() < 1 || l.cols() < 1)
    throw Error(ErrorCode::ShapeMismatch, "modulation matrix must have at least one row and column");
  if (static_cast<std::size_t>(l.cols()) != modulation.columns())
    throw Error(ErrorCode::ShapeMismatch, "column count does not match d_sources * k_order");

  VariabilityReport report;
  report.tolerance = tolerance;

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(l);
  const auto& sv = svd.singularValues();
  report.singular_values.assign(sv.data(), sv.data() + sv.size());

  const double sigma_max = report.singular_values.empty() ? 0.0 : report.singular_values.front();
  double sigma_min_kept = 0.0;
  if (sigma_max > 0.0) {
    for (double s : report.singular_values) {
      if (s > tolerance * sigma_max) {
        ++report.rank;
        sigma_min_kept = s;
      }
    }
  }
  const auto columns = static_cast<std::size_t>(l.cols());
  report.full_column_rank = report.rank == columns;
  report.condition_number =
      report.rank == 0 ? std::numeric_limits<double>::infinity() : sigma_max / sigma_min_kept;

  if (static_cast<std::size_t>(l.rows()) < columns)
    report.flags.push_back("infeasible: " + std::to_string(l.rows()) + " difference rows for " +
                           std::to_string(columns) + " columns; full column rank needs at least " +
                           std::to_string(columns + 1) + " environments");
  return report;
}

std::vector<bool> detect_delta_prior(const Eigen::MatrixXd& param_samples, double tolerance) {
  if (param_samples.rows() < 2) throw Error(ErrorCode::ShapeMismatch, "need at least 2 environments");
  std::vector<bool> flagged(static_cast<std::size_t>(param_samples.cols()));
  for (Eigen::Index k = 0; k < param_samples.cols(); ++k) {
    const double spread = (param_samples.col(k).array() - param_samples(0, k)).abs().maxCoeff();
    flagged[static_cast<std::size_t>(k)] = spread <= tolerance;
  }
  return flagged;
}

std::string_view to_string(DensityFamily f) noexcept {
  return f == DensityFamily::Gaussian ? "gaussian" : "laplace";
}

std::optional<DensityFamily> parse_density_family(std::string_view name) noexcept {
  if (name == "gaussian") return DensityFamily::Gaussian;
  if (name == "laplace") return DensityFamily::Laplace;
  return std::nullopt;
}

double Density::log_pdf(double z) const {
  const double t = (z - location) / scale;
  if (family == DensityFamily::Gaussian)
    return -0.5 * t * t - std::log(scale) - 0.5 * std::log(2.0 * std::numbers::pi);
  return -std::abs(t) - std::log(2.0 * scale);
}

double Density::pdf(double z) const { return std::exp(log_pdf(z)); }

DiscrepancyQuery default_discrepancy_query(const Density& p, const Density& p_tilde) {
  DiscrepancyQuery q;
  q.p = p;
  q.p_tilde = p_tilde;
  const bool laplace = p.family == DensityFamily::Laplace || p_tilde.family == DensityFamily::Laplace;
  const double reach = (laplace ? 8.0 : 5.0) * std::max(p.scale, p_tilde.scale);
  q.lo = std::min(p.location, p_tilde.location) - reach;
  q.hi = std::max(p.location, p_tilde.location) + reach;
  return q;
}

DiscrepancyResult interventional_discrepancy_fraction(const DiscrepancyQuery& q) {
  if (!(q.lo < q.hi)) throw Error(ErrorCode::InvalidConfig, "interval requires lo < hi");
  if (q.grid_points < 101) throw Error(ErrorCode::InvalidConfig, "grid_points must be at least 101");
  if (!(q.p.scale > 0.0) || !(q.p_tilde.scale > 0.0))
    throw Error(ErrorCode::InvalidConfig, "density scales must be positive");
  if (!(q.derivative_step > 0.0) || !(q.zero_tolerance > 0.0))
    throw Error(ErrorCode::InvalidConfig, "derivative_step and zero_tolerance must be positive");

  auto log_ratio = [&](double z) { return q.p_tilde.log_pdf(z) - q.p.log_pdf(z); };

  const double h = q.derivative_step;
  const double spacing = (q.hi - q.lo) / static_cast<double>(q.grid_points - 1);
  std::size_t zeros = 0;
  for (std::size_t i = 0; i < q.grid_points; ++i) {
    const double z = q.lo + spacing * static_cast<double>(i);
    for (double probe : {z - h, z + h}) {
      if (!(q.p.pdf(probe) > 0.0) || !(q.p_tilde.pdf(probe) > 0.0))
        throw Error(ErrorCode::NonPositiveDensity,
                    "density underflows to 0 at z = " + std::to_string(probe));
    }
    const double derivative = (log_ratio(z + h) - log_ratio(z - h)) / (2.0 * h);
    if (std::abs(derivative) <= q.zero_tolerance) ++zeros;
  }

  DiscrepancyResult r;
  r.fraction_zero = static_cast<double>(zeros) / static_cast<double>(q.grid_points);
  r.holds_ae = r.fraction_zero <= kAlmostEverywhereThreshold;
  return r;
}

}  // namespace exch
