#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "exch/bench.hpp"
#include "exch/error.hpp"

namespace exch {
namespace {

BenchConfig small_config() {
  BenchConfig c;
  c.env_grid = {40, 80};
  c.n_seeds = 6;
  c.master_seed = 3;
  return c;
}

TEST(Bench, SingleCellIsSelfConsistent) {
  const auto c = small_config();
  const auto cell = run_cell(c, VariabilityRegime::CauseVariability, 80, 2);
  EXPECT_EQ(cell.n_envs, 80u);
  EXPECT_EQ(cell.seed, 2u);
  EXPECT_EQ(cell.correct, cell.decision == cell.truth);
  EXPECT_EQ(cell.baseline_correct, cell.baseline_decision == cell.truth);
  const auto again = run_cell(c, VariabilityRegime::CauseVariability, 80, 2);
  EXPECT_EQ(again.p_x_to_y, cell.p_x_to_y);
  EXPECT_EQ(again.decision, cell.decision);
}

TEST(Bench, GridShapeAndSummary) {
  const auto r = run_benchmark(small_config());
  ASSERT_EQ(r.cells.size(), 3u * 2u * 6u);
  ASSERT_EQ(r.summary.size(), 6u);
  for (const auto& row : r.summary) {
    EXPECT_EQ(row.n_cells, 6u);
    EXPECT_GE(row.accuracy_mean, 0.0);
    EXPECT_LE(row.accuracy_mean, 1.0);
    std::size_t hits = 0;
    for (const auto& cell : r.cells)
      if (cell.regime == row.regime && cell.n_envs == row.n_envs) hits += cell.correct;
    EXPECT_DOUBLE_EQ(row.accuracy_mean, hits / 6.0);
    // Sample standard deviation of a 0/1 indicator.
    const double m = row.accuracy_mean;
    EXPECT_NEAR(row.accuracy_std, std::sqrt(6.0 / 5.0 * m * (1.0 - m)), 1e-12);
  }
}

TEST(Bench, ParallelRunIsByteIdentical) {
  auto c = small_config();
  std::ostringstream serial_cells, serial_summary, parallel_cells, parallel_summary;
  const auto a = run_benchmark(c);
  write_cells_csv(serial_cells, a.cells);
  write_summary_csv(serial_summary, a.summary);
  c.jobs = 4;
  const auto b = run_benchmark(c);
  write_cells_csv(parallel_cells, b.cells);
  write_summary_csv(parallel_summary, b.summary);
  EXPECT_EQ(serial_cells.str(), parallel_cells.str());
  EXPECT_EQ(serial_summary.str(), parallel_summary.str());
}

TEST(Bench, CellSeedsAreDistinct) {
  std::set<std::uint64_t> seeds;
  for (auto r : {VariabilityRegime::FullExchangeable, VariabilityRegime::CauseVariability})
    for (std::size_t n : {100u, 200u})
      for (std::size_t s = 0; s < 100; ++s) seeds.insert(cell_seed(0, r, n, s));
  EXPECT_EQ(seeds.size(), 400u);
}

TEST(Bench, BaselineNearOneThird) {
  BenchConfig c;
  c.env_grid = {20};
  c.n_seeds = 1000;
  c.regimes = {VariabilityRegime::FullExchangeable};
  const auto r = run_benchmark(c);
  EXPECT_NEAR(baseline_accuracy(r.cells), 1.0 / 3.0, 0.05);
}

TEST(Bench, ValidationNamesTheProblem) {
  auto c = small_config();
  c.env_grid = {10};
  EXPECT_THROW(run_benchmark(c), Error);
  c = small_config();
  c.n_seeds = 0;
  EXPECT_THROW(validate(c), Error);
  c = small_config();
  c.truths.clear();
  EXPECT_THROW(validate(c), Error);
}

TEST(Bench, CsvHeader) {
  std::ostringstream out;
  write_cells_csv(out, {});
  EXPECT_EQ(out.str().substr(0, out.str().find('\n')).find("regime"), 0u);
}

}  // namespace
}  // namespace exch
