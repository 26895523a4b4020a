#include "exch/rng.hpp"

#include <boost/math/special_functions/erf.hpp>

#include <cmath>

#include "exch/error.hpp"

namespace exch {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::InvalidInput: return "InvalidInput";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::FamilyMismatch: return "FamilyMismatch";
    case ErrorCode::InsufficientSamples: return "InsufficientSamples";
    case ErrorCode::InsufficientEnvironments: return "InsufficientEnvironments";
    case ErrorCode::DegenerateDensity: return "DegenerateDensity";
    case ErrorCode::NonPositiveDensity: return "NonPositiveDensity";
    case ErrorCode::Parse: return "Parse";
  }
  return "Unknown";
}

std::uint64_t Stream::below(std::uint64_t n) {
  std::uint64_t x = engine_();
  __uint128_t m = static_cast<__uint128_t>(x) * n;
  auto low = static_cast<std::uint64_t>(m);
  if (low < n) {
    const std::uint64_t threshold = (0 - n) % n;
    while (low < threshold) {
      x = engine_();
      m = static_cast<__uint128_t>(x) * n;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

double Stream::laplace(double location, double scale) {
  return laplace_quantile(uniform01(), location, scale);
}

double Stream::normal(double location, double scale) {
  return normal_quantile(uniform01(), location, scale);
}

double laplace_quantile(double u, double location, double scale) {
  if (u < 0.5) return location + scale * std::log(2.0 * u);
  return location - scale * std::log(2.0 * (1.0 - u));
}

double normal_quantile(double u, double location, double scale) {
  return location - scale * std::sqrt(2.0) * boost::math::erfc_inv(2.0 * u);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double normal_two_sided_p(double z) {
  if (std::isnan(z)) return 1.0;
  return std::erfc(std::abs(z) / std::sqrt(2.0));
}

double laplace_cdf(double x, double location, double scale) {
  const double t = (x - location) / scale;
  return t < 0.0 ? 0.5 * std::exp(t) : 1.0 - 0.5 * std::exp(-t);
}

}  // namespace exch
