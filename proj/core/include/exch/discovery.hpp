#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "exch/citest.hpp"
#include "exch/dgp.hpp"
#include "exch/rng.hpp"

namespace exch {

/// First two samples of one environment: (X^1, Y^1, X^2, Y^2).
struct PairedRow {
  double x1 = 0.0;
  double y1 = 0.0;
  double x2 = 0.0;
  double y2 = 0.0;
};

struct PairedTable {
  std::vector<PairedRow> rows;

  std::vector<double> x1() const;
  std::vector<double> y1() const;
  std::vector<double> x2() const;
  std::vector<double> y2() const;
};

/// How the three p-values are turned into a structure.
enum class DecisionRule {
  /// Independent when X^1 ⊥ Y^1 is not rejected at alpha; otherwise the
  /// direction whose conditional test has the higher p-value.
  GatedHighestP,
  /// Plain argmax over all three p-values; alpha is only reported.
  HighestP,
};

std::string_view to_string(DecisionRule r) noexcept;
std::optional<DecisionRule> parse_decision_rule(std::string_view name) noexcept;

inline constexpr std::size_t kMinDiscoveryEnvironments = 20;

struct DiscoveryOptions {
  CITestOptions test;
  double alpha = 0.05;
  DecisionRule rule = DecisionRule::GatedHighestP;
};

struct DiscoveryDecision {
  CausalStructure structure = CausalStructure::Independent;
  double p_x_to_y = 1.0;       ///< Y^1 ⊥ X^2 | X^1
  double p_y_to_x = 1.0;       ///< X^1 ⊥ Y^2 | Y^1
  double p_independent = 1.0;  ///< X^1 ⊥ Y^1
  double alpha = 0.05;
  DecisionRule rule = DecisionRule::GatedHighestP;
  std::vector<std::string> flags;
};

/// One row per environment from the first two stored samples. Throws
/// InsufficientSamples naming the first environment with fewer than two.
PairedTable build_cross_sample_pairs(const MultiEnvDataset& dataset);

/// Picks among {X->Y, Y->X, X⊥Y} from the three cross-sample CI tests.
/// Ties go to XtoY, then YtoX, then Independent.
DiscoveryDecision discover_structure(const PairedTable& table, const DiscoveryOptions& options = {});
DiscoveryDecision discover_structure(const MultiEnvDataset& dataset,
                                     const DiscoveryOptions& options = {});

/// Uniform draw over the three structures.
CausalStructure random_baseline(Stream& rng);

}  // namespace exch
