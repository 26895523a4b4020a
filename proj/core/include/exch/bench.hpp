#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

#include "exch/discovery.hpp"

namespace exch {

struct BenchConfig {
  std::vector<std::size_t> env_grid{100, 200, 300, 400, 500};
  std::size_t n_seeds = 100;
  std::vector<VariabilityRegime> regimes{VariabilityRegime::FullExchangeable,
                                         VariabilityRegime::CauseVariability,
                                         VariabilityRegime::MechanismVariability};
  /// Structures the per-cell truth is drawn from (uniformly).
  std::vector<CausalStructure> truths{CausalStructure::XtoY, CausalStructure::YtoX,
                                      CausalStructure::Independent};
  std::size_t samples_per_env = 2;
  double alpha = 0.05;
  CITestOptions test;
  DecisionRule rule = DecisionRule::GatedHighestP;
  /// Template for everything the grid does not set (regime, size, structure).
  DGPConfig dgp;
  std::uint64_t master_seed = 0;
  bool include_random_baseline = true;
  std::size_t jobs = 1;
};

void validate(const BenchConfig& config);

struct BenchCell {
  VariabilityRegime regime = VariabilityRegime::FullExchangeable;
  CausalStructure truth = CausalStructure::Independent;
  std::size_t n_envs = 0;
  std::size_t seed = 0;  ///< seed index within the grid point
  CausalStructure decision = CausalStructure::Independent;
  double p_x_to_y = 1.0;
  double p_y_to_x = 1.0;
  double p_independent = 1.0;
  bool correct = false;
  CausalStructure baseline_decision = CausalStructure::Independent;
  bool baseline_correct = false;
};

struct StructureAccuracy {
  CausalStructure truth = CausalStructure::Independent;
  std::size_t n_cells = 0;
  double accuracy = 0.0;
};

struct SummaryRow {
  VariabilityRegime regime = VariabilityRegime::FullExchangeable;
  std::size_t n_envs = 0;
  double accuracy_mean = 0.0;
  /// Sample standard deviation (n - 1) of the 0/1 correctness indicator.
  double accuracy_std = 0.0;
  double baseline_accuracy = 0.0;
  std::size_t n_cells = 0;
  std::vector<StructureAccuracy> by_structure;
};

struct BenchResult {
  std::vector<BenchCell> cells;
  std::vector<SummaryRow> summary;
};

/// Seed of one cell: derive_seed(master_seed, regime code, n_envs, seed index)
/// with regime codes 0..3 in VariabilityRegime declaration order.
std::uint64_t cell_seed(std::uint64_t master_seed, VariabilityRegime regime, std::size_t n_envs,
                        std::size_t seed_index) noexcept;

/// Runs one cell: draws the truth, simulates, discovers and draws the
/// baseline, all from streams derived from cell_seed.
BenchCell run_cell(const BenchConfig& config, VariabilityRegime regime, std::size_t n_envs,
                   std::size_t seed_index);

/// Cells in (regime, n_envs, seed) order regardless of `jobs`. A failing cell
/// rethrows as Error naming the cell.
BenchResult run_benchmark(const BenchConfig& config);

std::vector<SummaryRow> summarize(const std::vector<BenchCell>& cells);

/// Accuracy of the random baseline over all cells.
double baseline_accuracy(const std::vector<BenchCell>& cells);

void write_cells_csv(std::ostream& out, const std::vector<BenchCell>& cells);
void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& summary);

}  // namespace exch
