#pragma once

#include <Eigen/Dense>

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

#include "exch/bench.hpp"
#include "exch/dgp.hpp"
#include "exch/discovery.hpp"
#include "exch/duality.hpp"
#include "exch/variability.hpp"

namespace exch {

/// Shortest-safe decimal form with 17 significant digits (round-trips doubles).
std::string format_real(double v);

// Dataset CSV: header `env,sample,x,y`, 0-based integer indices.
void write_dataset_csv(std::ostream& out, const MultiEnvDataset& dataset);

/// Reads the sample table. Rows may come in any order; environments must be
/// numbered 0..E-1 and samples 0..k-1 within each. Errors name the line.
/// Metadata (truth, params, ...) is left default; see apply_truth_json.
MultiEnvDataset read_dataset_csv(std::istream& in);

/// Sidecar truth file: structure, regime, seed and per-environment params
/// (plus noise_scale and collapse_noise).
std::string truth_json(const MultiEnvDataset& dataset);
void apply_truth_json(std::string_view json, MultiEnvDataset& dataset);

/// `<stem>.truth.json` next to a `<stem>.csv` data file.
std::string truth_path_for(const std::string& csv_path);

// Parameter CSV for variability diagnostics: header `env,dim_0,...,dim_{d-1}`.
Eigen::MatrixXd read_param_csv(std::istream& in);
void write_param_csv(std::ostream& out, const Eigen::MatrixXd& params);

// JSON configs. Unknown keys and type errors are rejected with a JSON path,
// e.g. "$.env_grid[2]: expected a positive integer".
DGPConfig parse_dgp_config(std::string_view json);
BenchConfig parse_bench_config(std::string_view json);
DualityConfig parse_duality_config(std::string_view json);

std::string to_json(const DGPConfig& config);
std::string to_json(const DualityConfig& config);
std::string to_json(const DiscoveryDecision& decision,
                    std::optional<CausalStructure> truth = std::nullopt);
std::string to_json(const VariabilityReport& report);
std::string to_json(const DiscrepancyQuery& query, const DiscrepancyResult& result);
std::string to_json(const DualityReport& report);
/// Summary rows including the per-structure breakdown and overall baseline accuracy.
std::string summary_json(const BenchResult& result);

}  // namespace exch
