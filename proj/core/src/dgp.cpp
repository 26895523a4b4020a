#include "exch/dgp.hpp"

#include <cmath>
#include <string>

#include "exch/error.hpp"
#include "exch/rng.hpp"

namespace exch {

namespace {

constexpr std::uint64_t kCoefSignRole = 6;

bool theta_pinned(VariabilityRegime r) {
  return r == VariabilityRegime::MechanismVariability || r == VariabilityRegime::IID;
}

bool psi_pinned(VariabilityRegime r) {
  return r == VariabilityRegime::CauseVariability || r == VariabilityRegime::IID;
}

double draw_theta(Stream& s) { return s.uniform(-1.0, 1.0); }

DeFinettiParams draw_psi(const DGPConfig& config, CausalStructure structure, Stream& s,
                         double dataset_sign) {
  DeFinettiParams p;
  p.psi_loc = s.uniform(-1.0, 1.0);
  const double magnitude = s.uniform(config.coef_magnitude_range[0], config.coef_magnitude_range[1]);
  double sign = dataset_sign;
  if (config.coef_sign == CoefSign::PerDraw) sign = s.bernoulli(0.5) ? 1.0 : -1.0;
  p.psi_coef = structure == CausalStructure::Independent ? 0.0 : sign * magnitude;
  p.psi_nonlinear = s.bernoulli(config.nonlinear_probability);
  return p;
}

double laplace_log_pdf(double v, double location, double scale) {
  return -std::log(2.0 * scale) - std::abs(v - location) / scale;
}

}  // namespace

std::string_view to_string(CausalStructure s) noexcept {
  switch (s) {
    case CausalStructure::XtoY: return "x_to_y";
    case CausalStructure::YtoX: return "y_to_x";
    case CausalStructure::Independent: return "independent";
  }
  return "unknown";
}

std::string_view to_string(VariabilityRegime r) noexcept {
  switch (r) {
    case VariabilityRegime::FullExchangeable: return "full_exchangeable";
    case VariabilityRegime::CauseVariability: return "cause_variability";
    case VariabilityRegime::MechanismVariability: return "mechanism_variability";
    case VariabilityRegime::IID: return "iid";
  }
  return "unknown";
}

std::string_view to_string(CoefSign s) noexcept {
  switch (s) {
    case CoefSign::PerDataset: return "per_dataset";
    case CoefSign::PerDraw: return "per_draw";
    case CoefSign::Positive: return "positive";
  }
  return "unknown";
}

std::optional<CausalStructure> parse_structure(std::string_view name) noexcept {
  for (auto s : {CausalStructure::XtoY, CausalStructure::YtoX, CausalStructure::Independent})
    if (to_string(s) == name) return s;
  return std::nullopt;
}

std::optional<VariabilityRegime> parse_regime(std::string_view name) noexcept {
  for (auto r : {VariabilityRegime::FullExchangeable, VariabilityRegime::CauseVariability,
                 VariabilityRegime::MechanismVariability, VariabilityRegime::IID})
    if (to_string(r) == name) return r;
  return std::nullopt;
}

std::optional<CoefSign> parse_coef_sign(std::string_view name) noexcept {
  for (auto s : {CoefSign::PerDataset, CoefSign::PerDraw, CoefSign::Positive})
    if (to_string(s) == name) return s;
  return std::nullopt;
}

void validate(const DGPConfig& config) {
  if (config.n_environments == 0)
    throw Error(ErrorCode::InvalidConfig, "n_environments must be positive");
  if (config.samples_per_env == 0)
    throw Error(ErrorCode::InvalidConfig, "samples_per_env must be positive");
  if (!(config.noise_scale > 0.0) || !std::isfinite(config.noise_scale))
    throw Error(ErrorCode::InvalidConfig, "noise_scale must be positive and finite");
  const auto [lo, hi] = config.coef_magnitude_range;
  if (!(lo > 0.0) || !(hi >= lo) || !std::isfinite(hi))
    throw Error(ErrorCode::InvalidConfig,
                "coef_magnitude_range must satisfy 0 < low <= high < inf");
  if (!(config.nonlinear_probability >= 0.0 && config.nonlinear_probability <= 1.0))
    throw Error(ErrorCode::InvalidConfig, "nonlinear_probability must lie in [0, 1]");
}

std::uint64_t role_seed(std::uint64_t seed, std::uint64_t env, StreamRole role,
                        std::uint64_t salt) noexcept {
  return derive_seed(seed, env, static_cast<std::uint64_t>(role), salt);
}

CausalStructure resolve_structure(const DGPConfig& config, std::uint64_t seed) {
  if (config.structure) return *config.structure;
  Stream s(role_seed(seed, kDatasetLevel, StreamRole::Structure));
  switch (s.below(3)) {
    case 0: return CausalStructure::XtoY;
    case 1: return CausalStructure::YtoX;
    default: return CausalStructure::Independent;
  }
}

std::vector<DeFinettiParams> sample_definetti_params(const DGPConfig& config,
                                                     CausalStructure structure,
                                                     std::uint64_t seed,
                                                     const StreamSalt& salt) {
  validate(config);
  const std::size_t n_env = config.n_environments;

  double dataset_sign = 1.0;
  if (config.coef_sign == CoefSign::PerDataset) {
    Stream s(derive_seed(seed, kDatasetLevel, kCoefSignRole, salt.psi));
    dataset_sign = s.bernoulli(0.5) ? 1.0 : -1.0;
  }

  std::optional<double> pinned_theta;
  if (theta_pinned(config.regime)) {
    Stream s(role_seed(seed, kDatasetLevel, StreamRole::Theta, salt.theta));
    pinned_theta = draw_theta(s);
  }
  std::optional<DeFinettiParams> pinned_psi;
  if (psi_pinned(config.regime)) {
    Stream s(role_seed(seed, kDatasetLevel, StreamRole::Psi, salt.psi));
    pinned_psi = draw_psi(config, structure, s, dataset_sign);
  }

  std::vector<DeFinettiParams> out(n_env);
  for (std::size_t e = 0; e < n_env; ++e) {
    DeFinettiParams p;
    if (pinned_psi) {
      p = *pinned_psi;
    } else {
      Stream s(role_seed(seed, e, StreamRole::Psi, salt.psi));
      p = draw_psi(config, structure, s, dataset_sign);
    }
    if (pinned_theta) {
      p.theta = *pinned_theta;
    } else {
      Stream s(role_seed(seed, e, StreamRole::Theta, salt.theta));
      p.theta = draw_theta(s);
    }
    out[e] = p;
  }
  return out;
}

MultiEnvDataset simulate_dataset(const DGPConfig& config, std::uint64_t seed,
                                 const StreamSalt& salt) {
  validate(config);
  MultiEnvDataset ds;
  ds.truth = resolve_structure(config, seed);
  ds.regime = config.regime;
  ds.seed = seed;
  ds.noise_scale = config.noise_scale;
  ds.collapse_noise = config.collapse_noise;
  ds.params = sample_definetti_params(config, ds.truth, seed, salt);

  const bool collapse_cause = config.collapse_noise && theta_pinned(config.regime);
  const bool collapse_effect = config.collapse_noise && psi_pinned(config.regime);
  const double b = config.noise_scale;

  ds.environments.resize(config.n_environments);
  for (std::size_t e = 0; e < config.n_environments; ++e) {
    const DeFinettiParams& p = ds.params[e];
    Stream cause_noise(role_seed(seed, e, StreamRole::CauseNoise, salt.cause_noise));
    Stream effect_noise(role_seed(seed, e, StreamRole::EffectNoise, salt.effect_noise));
    const double nonlinear_shift = p.psi_nonlinear ? p.psi_coef * p.theta * p.theta : 0.0;

    auto& rows = ds.environments[e].samples;
    rows.resize(config.samples_per_env);
    for (auto& row : rows) {
      const double s_cause = collapse_cause ? p.theta : cause_noise.laplace(p.theta, b);
      const double s_effect = collapse_effect ? p.psi_loc : effect_noise.laplace(p.psi_loc, b);
      const double cause = s_cause;
      const double effect = p.psi_coef * s_cause + s_effect + nonlinear_shift;
      if (ds.truth == CausalStructure::YtoX) {
        row = {effect, cause};
      } else {
        row = {cause, effect};
      }
    }
  }
  return ds;
}

double joint_log_density(const MultiEnvDataset& dataset) {
  if (dataset.collapse_noise)
    throw Error(ErrorCode::DegenerateDensity,
                "collapsed noise components are point masses without a density");
  if (!(dataset.noise_scale > 0.0))
    throw Error(ErrorCode::DegenerateDensity, "noise_scale must be positive");
  if (dataset.params.size() != dataset.environments.size())
    throw Error(ErrorCode::ShapeMismatch, "one parameter set per environment is required");

  const double b = dataset.noise_scale;
  double total = 0.0;
  for (std::size_t e = 0; e < dataset.environments.size(); ++e) {
    const DeFinettiParams& p = dataset.params[e];
    const double nonlinear_shift = p.psi_nonlinear ? p.psi_coef * p.theta * p.theta : 0.0;
    for (const Sample& row : dataset.environments[e].samples) {
      const bool y_causes = dataset.truth == CausalStructure::YtoX;
      const double cause = y_causes ? row.y : row.x;
      const double effect = y_causes ? row.x : row.y;
      const double s_effect = effect - p.psi_coef * cause - nonlinear_shift;
      total += laplace_log_pdf(cause, p.theta, b) + laplace_log_pdf(s_effect, p.psi_loc, b);
    }
  }
  return total;
}

}  // namespace exch
