#include "exch/discovery.hpp"

#include <string>

#include "exch/error.hpp"

namespace exch {

namespace {

std::vector<double> column(const PairedTable& t, double PairedRow::*field) {
  std::vector<double> out;
  out.reserve(t.rows.size());
  for (const auto& r : t.rows) out.push_back(r.*field);
  return out;
}

void note_degeneracy(std::vector<std::string>& flags, std::string_view test, const CITestResult& r) {
  if (r.degeneracy != Degeneracy::None)
    flags.push_back(std::string(test) + ":" + std::string(to_string(r.degeneracy)));
}

}  // namespace

std::vector<double> PairedTable::x1() const { return column(*this, &PairedRow::x1); }
std::vector<double> PairedTable::y1() const { return column(*this, &PairedRow::y1); }
std::vector<double> PairedTable::x2() const { return column(*this, &PairedRow::x2); }
std::vector<double> PairedTable::y2() const { return column(*this, &PairedRow::y2); }

std::string_view to_string(DecisionRule r) noexcept {
  switch (r) {
    case DecisionRule::GatedHighestP: return "gated_highest_p";
    case DecisionRule::HighestP: return "highest_p";
  }
  return "unknown";
}

std::optional<DecisionRule> parse_decision_rule(std::string_view name) noexcept {
  for (auto r : {DecisionRule::GatedHighestP, DecisionRule::HighestP})
    if (to_string(r) == name) return r;
  return std::nullopt;
}

PairedTable build_cross_sample_pairs(const MultiEnvDataset& dataset) {
  PairedTable table;
  table.rows.reserve(dataset.environments.size());
  for (std::size_t e = 0; e < dataset.environments.size(); ++e) {
    const auto& s = dataset.environments[e].samples;
    if (s.size() < 2)
      throw Error(ErrorCode::InsufficientSamples,
                  "environment " + std::to_string(e) + " has " + std::to_string(s.size()) +
                      " sample(s); cross-sample pairing needs 2");
    table.rows.push_back({s[0].x, s[0].y, s[1].x, s[1].y});
  }
  return table;
}

DiscoveryDecision discover_structure(const PairedTable& table, const DiscoveryOptions& options) {
  if (!(options.alpha > 0.0 && options.alpha < 1.0))
    throw Error(ErrorCode::InvalidConfig, "alpha must lie in (0, 1)");
  if (table.rows.size() < kMinDiscoveryEnvironments)
    throw Error(ErrorCode::InsufficientEnvironments,
                "need at least " + std::to_string(kMinDiscoveryEnvironments) + " environments, got " +
                    std::to_string(table.rows.size()));

  const auto x1 = table.x1();
  const auto y1 = table.y1();
  const auto x2 = table.x2();
  const auto y2 = table.y2();

  // Each test gets its own permutation stream; the X->Y and Y->X tests are
  // mirror images, so they share a key to keep label symmetry exact.
  CITestOptions directional = options.test;
  directional.seed = derive_seed(options.test.seed, 1);
  CITestOptions marginal = options.test;
  marginal.seed = derive_seed(options.test.seed, 2);

  const auto t_xy = conditional_independence_test(y1, x2, x1, directional);
  const auto t_yx = conditional_independence_test(x1, y2, y1, directional);
  const auto t_ind = marginal_independence_test(x1, y1, marginal);

  DiscoveryDecision d;
  d.p_x_to_y = t_xy.p_value;
  d.p_y_to_x = t_yx.p_value;
  d.p_independent = t_ind.p_value;
  d.alpha = options.alpha;
  d.rule = options.rule;
  note_degeneracy(d.flags, "x_to_y", t_xy);
  note_degeneracy(d.flags, "y_to_x", t_yx);
  note_degeneracy(d.flags, "independent", t_ind);

  const CausalStructure directional_choice =
      d.p_x_to_y >= d.p_y_to_x ? CausalStructure::XtoY : CausalStructure::YtoX;
  const double best_directional = std::max(d.p_x_to_y, d.p_y_to_x);

  if (options.rule == DecisionRule::GatedHighestP) {
    d.structure = d.p_independent > options.alpha ? CausalStructure::Independent : directional_choice;
  } else {
    d.structure = d.p_independent > best_directional ? CausalStructure::Independent : directional_choice;
  }
  return d;
}

DiscoveryDecision discover_structure(const MultiEnvDataset& dataset, const DiscoveryOptions& options) {
  return discover_structure(build_cross_sample_pairs(dataset), options);
}

CausalStructure random_baseline(Stream& rng) {
  switch (rng.below(3)) {
    case 0: return CausalStructure::XtoY;
    case 1: return CausalStructure::YtoX;
    default: return CausalStructure::Independent;
  }
}

}  // namespace exch
