#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace exch {

enum class CausalStructure { XtoY, YtoX, Independent };

enum class VariabilityRegime { FullExchangeable, CauseVariability, MechanismVariability, IID };

/// How the sign of the cause->effect coefficient is drawn.
enum class CoefSign {
  PerDataset,  ///< one random sign for the whole dataset, magnitudes vary with psi
  PerDraw,     ///< fresh random sign with every psi draw
  Positive,    ///< always +1
};

std::string_view to_string(CausalStructure s) noexcept;
std::string_view to_string(VariabilityRegime r) noexcept;
std::string_view to_string(CoefSign s) noexcept;
std::optional<CausalStructure> parse_structure(std::string_view name) noexcept;
std::optional<VariabilityRegime> parse_regime(std::string_view name) noexcept;
std::optional<CoefSign> parse_coef_sign(std::string_view name) noexcept;

/// Maps a structure to the one obtained by exchanging the x and y labels.
constexpr CausalStructure swap_labels(CausalStructure s) noexcept {
  switch (s) {
    case CausalStructure::XtoY: return CausalStructure::YtoX;
    case CausalStructure::YtoX: return CausalStructure::XtoY;
    case CausalStructure::Independent: return CausalStructure::Independent;
  }
  return s;
}

/// Per-environment realization of the cause parameter theta and the mechanism
/// bundle psi = (psi_loc, psi_coef, psi_nonlinear).
struct DeFinettiParams {
  double theta = 0.0;
  double psi_loc = 0.0;
  double psi_coef = 0.0;
  bool psi_nonlinear = false;

  friend bool operator==(const DeFinettiParams&, const DeFinettiParams&) = default;
};

struct Sample {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Sample&, const Sample&) = default;
};

struct EnvironmentData {
  std::vector<Sample> samples;

  friend bool operator==(const EnvironmentData&, const EnvironmentData&) = default;
};

struct MultiEnvDataset {
  std::vector<EnvironmentData> environments;
  CausalStructure truth = CausalStructure::Independent;
  VariabilityRegime regime = VariabilityRegime::FullExchangeable;
  std::vector<DeFinettiParams> params;
  std::uint64_t seed = 0;
  double noise_scale = 1.0;
  bool collapse_noise = false;

  std::size_t n_environments() const noexcept { return environments.size(); }

  friend bool operator==(const MultiEnvDataset&, const MultiEnvDataset&) = default;
};

struct DGPConfig {
  std::size_t n_environments = 100;
  std::size_t samples_per_env = 2;
  VariabilityRegime regime = VariabilityRegime::FullExchangeable;
  /// nullopt draws the structure uniformly from the dataset seed.
  std::optional<CausalStructure> structure;
  double noise_scale = 1.0;
  /// Replace the delta-side Laplace noise by its location parameter.
  bool collapse_noise = false;
  std::array<double, 2> coef_magnitude_range{0.5, 2.0};
  CoefSign coef_sign = CoefSign::PerDataset;
  double nonlinear_probability = 0.5;
};

/// Throws Error(InvalidConfig) describing the first violated constraint.
void validate(const DGPConfig& config);

/// Role codes used to derive independent sub-streams from the dataset seed.
enum class StreamRole : std::uint64_t {
  Structure = 1,
  Theta = 2,
  Psi = 3,
  CauseNoise = 4,
  EffectNoise = 5,
};

/// Additive perturbation of a role's stream keys. Only meant for checking that
/// the streams are separated; production callers leave it zeroed.
struct StreamSalt {
  std::uint64_t theta = 0;
  std::uint64_t psi = 0;
  std::uint64_t cause_noise = 0;
  std::uint64_t effect_noise = 0;
};

/// Environment index reserved for draws that happen once per dataset
/// (pinned parameters, coefficient sign, random structure).
inline constexpr std::uint64_t kDatasetLevel = ~std::uint64_t{0};

std::uint64_t role_seed(std::uint64_t seed, std::uint64_t env, StreamRole role,
                        std::uint64_t salt = 0) noexcept;

/// Draws one parameter set per environment according to the regime: pinned
/// sides are drawn once from the dataset-level stream and copied.
std::vector<DeFinettiParams> sample_definetti_params(const DGPConfig& config,
                                                     CausalStructure structure,
                                                     std::uint64_t seed,
                                                     const StreamSalt& salt = {});

/// Structure used for `config` and `seed` (the fixed one, or the random draw).
CausalStructure resolve_structure(const DGPConfig& config, std::uint64_t seed);

MultiEnvDataset simulate_dataset(const DGPConfig& config, std::uint64_t seed,
                                 const StreamSalt& salt = {});

/// Exact log-density of every observation given the recorded parameters.
/// The coupling is unit-triangular, so the noise is recovered by
/// substitution and the Jacobian is 1.
double joint_log_density(const MultiEnvDataset& dataset);

}  // namespace exch
