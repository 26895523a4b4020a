#include "exch/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <ostream>
#include <string>
#include <thread>

#include "exch/error.hpp"
#include "exch/io.hpp"

namespace exch {

namespace {

constexpr std::uint64_t kTruthKey = 0x7101;
constexpr std::uint64_t kDataKey = 0x7102;
constexpr std::uint64_t kTestKey = 0x7103;
constexpr std::uint64_t kBaselineKey = 0x7104;

std::string cell_name(VariabilityRegime regime, std::size_t n_envs, std::size_t seed_index) {
  return "cell (regime=" + std::string(to_string(regime)) + ", n_envs=" + std::to_string(n_envs) +
         ", seed=" + std::to_string(seed_index) + ")";
}

}  // namespace

void validate(const BenchConfig& config) {
  if (config.env_grid.empty()) throw Error(ErrorCode::InvalidConfig, "env_grid must not be empty");
  for (std::size_t i = 0; i < config.env_grid.size(); ++i) {
    if (config.env_grid[i] == 0) throw Error(ErrorCode::InvalidConfig, "env_grid entries must be positive");
    if (i > 0 && config.env_grid[i] <= config.env_grid[i - 1])
      throw Error(ErrorCode::InvalidConfig, "env_grid must be strictly increasing");
  }
  if (config.n_seeds == 0) throw Error(ErrorCode::InvalidConfig, "n_seeds must be at least 1");
  if (config.regimes.empty()) throw Error(ErrorCode::InvalidConfig, "regimes must not be empty");
  if (config.truths.empty()) throw Error(ErrorCode::InvalidConfig, "truths must not be empty");
  if (config.samples_per_env < 2) throw Error(ErrorCode::InvalidConfig, "samples_per_env must be at least 2");
  if (!(config.alpha > 0.0 && config.alpha < 1.0)) throw Error(ErrorCode::InvalidConfig, "alpha must lie in (0, 1)");
  if (config.jobs == 0) throw Error(ErrorCode::InvalidConfig, "jobs must be at least 1");
}

std::uint64_t cell_seed(std::uint64_t master_seed, VariabilityRegime regime, std::size_t n_envs,
                        std::size_t seed_index) noexcept {
  return derive_seed(master_seed, static_cast<std::uint64_t>(regime), n_envs, seed_index);
}

BenchCell run_cell(const BenchConfig& config, VariabilityRegime regime, std::size_t n_envs,
                   std::size_t seed_index) {
  const std::uint64_t seed = cell_seed(config.master_seed, regime, n_envs, seed_index);

  BenchCell cell;
  cell.regime = regime;
  cell.n_envs = n_envs;
  cell.seed = seed_index;

  Stream truth_stream(derive_seed(seed, kTruthKey));
  cell.truth = config.truths[truth_stream.below(config.truths.size())];

  DGPConfig dgp = config.dgp;
  dgp.n_environments = n_envs;
  dgp.samples_per_env = config.samples_per_env;
  dgp.regime = regime;
  dgp.structure = cell.truth;
  const MultiEnvDataset data = simulate_dataset(dgp, derive_seed(seed, kDataKey));

  DiscoveryOptions options;
  options.test = config.test;
  options.test.seed = derive_seed(seed, kTestKey);
  options.alpha = config.alpha;
  options.rule = config.rule;
  const DiscoveryDecision d = discover_structure(data, options);

  cell.decision = d.structure;
  cell.p_x_to_y = d.p_x_to_y;
  cell.p_y_to_x = d.p_y_to_x;
  cell.p_independent = d.p_independent;
  cell.correct = cell.decision == cell.truth;

  if (config.include_random_baseline) {
    Stream baseline(derive_seed(seed, kBaselineKey));
    cell.baseline_decision = random_baseline(baseline);
    cell.baseline_correct = cell.baseline_decision == cell.truth;
  }
  return cell;
}

BenchResult run_benchmark(const BenchConfig& config) {
  validate(config);

  struct Job {
    VariabilityRegime regime;
    std::size_t n_envs;
    std::size_t seed;
  };
  std::vector<Job> jobs;
  for (auto regime : config.regimes)
    for (auto n_envs : config.env_grid)
      for (std::size_t s = 0; s < config.n_seeds; ++s) jobs.push_back({regime, n_envs, s});

  BenchResult result;
  result.cells.resize(jobs.size());

  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex error_mutex;

  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size() && !failed; i = next++) {
      const Job& job = jobs[i];
      try {
        result.cells[i] = run_cell(config, job.regime, job.n_envs, job.seed);
      } catch (const std::exception& e) {
        std::lock_guard lock(error_mutex);
        if (!failed.exchange(true))
          first_error = std::make_exception_ptr(
              Error(ErrorCode::InvalidInput, cell_name(job.regime, job.n_envs, job.seed) + ": " + e.what()));
      }
    }
  };

  const std::size_t n_threads = std::min(config.jobs, std::max<std::size_t>(jobs.size(), 1));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }
  if (first_error) std::rethrow_exception(first_error);

  result.summary = summarize(result.cells);
  return result;
}

std::vector<SummaryRow> summarize(const std::vector<BenchCell>& cells) {
  std::vector<SummaryRow> rows;
  std::map<std::pair<VariabilityRegime, std::size_t>, std::size_t> index;
  struct Tally {
    std::size_t correct = 0;
    std::size_t baseline = 0;
    std::map<CausalStructure, std::pair<std::size_t, std::size_t>> by_truth;
  };
  std::vector<Tally> tallies;

  for (const auto& c : cells) {
    const auto key = std::make_pair(c.regime, c.n_envs);
    auto [it, inserted] = index.try_emplace(key, rows.size());
    if (inserted) {
      SummaryRow row;
      row.regime = c.regime;
      row.n_envs = c.n_envs;
      rows.push_back(row);
      tallies.emplace_back();
    }
    SummaryRow& row = rows[it->second];
    Tally& t = tallies[it->second];
    ++row.n_cells;
    t.correct += c.correct ? 1 : 0;
    t.baseline += c.baseline_correct ? 1 : 0;
    auto& [n, k] = t.by_truth[c.truth];
    ++n;
    k += c.correct ? 1 : 0;
  }

  for (std::size_t i = 0; i < rows.size(); ++i) {
    SummaryRow& row = rows[i];
    const auto n = static_cast<double>(row.n_cells);
    const double mean = static_cast<double>(tallies[i].correct) / n;
    row.accuracy_mean = mean;
    // sum of squared deviations of a 0/1 indicator = n * p * (1 - p)
    row.accuracy_std = row.n_cells > 1 ? std::sqrt(n * mean * (1.0 - mean) / (n - 1.0)) : 0.0;
    row.baseline_accuracy = static_cast<double>(tallies[i].baseline) / n;
    for (const auto& [truth, counts] : tallies[i].by_truth)
      row.by_structure.push_back(
          {truth, counts.first, static_cast<double>(counts.second) / static_cast<double>(counts.first)});
  }
  return rows;
}

double baseline_accuracy(const std::vector<BenchCell>& cells) {
  if (cells.empty()) return 0.0;
  const auto hits = std::count_if(cells.begin(), cells.end(), [](const BenchCell& c) { return c.baseline_correct; });
  return static_cast<double>(hits) / static_cast<double>(cells.size());
}

void write_cells_csv(std::ostream& out, const std::vector<BenchCell>& cells) {
  out << "regime,truth,n_envs,seed,decision,p_x_to_y,p_y_to_x,p_independent,correct,"
         "baseline_decision,baseline_correct\n";
  for (const auto& c : cells) {
    out << to_string(c.regime) << ',' << to_string(c.truth) << ',' << c.n_envs << ',' << c.seed << ','
        << to_string(c.decision) << ',' << format_real(c.p_x_to_y) << ',' << format_real(c.p_y_to_x) << ','
        << format_real(c.p_independent) << ',' << (c.correct ? 1 : 0) << ','
        << to_string(c.baseline_decision) << ',' << (c.baseline_correct ? 1 : 0) << '\n';
  }
}

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& summary) {
  out << "regime,n_envs,accuracy_mean,accuracy_std,baseline_accuracy,n_cells\n";
  for (const auto& r : summary) {
    out << to_string(r.regime) << ',' << r.n_envs << ',' << format_real(r.accuracy_mean) << ','
        << format_real(r.accuracy_std) << ',' << format_real(r.baseline_accuracy) << ',' << r.n_cells << '\n';
  }
}

}  // namespace exch
