#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "exch/bench.hpp"
#include "exch/dgp.hpp"
#include "exch/discovery.hpp"
#include "exch/duality.hpp"
#include "exch/error.hpp"
#include "exch/io.hpp"
#include "exch/variability.hpp"

namespace exch::cli {

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::InvalidInput, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::InvalidInput, "cannot write " + path);
  f << content;
  if (!f) throw Error(ErrorCode::InvalidInput, "write failed for " + path);
}

/// Writes to `path` when given, otherwise to `out`.
void emit(const std::string& path, const std::string& content, std::ostream& out) {
  if (path.empty()) {
    out << content;
    if (!content.empty() && content.back() != '\n') out << '\n';
  } else {
    write_file(path, content);
  }
}

/// "family:location:scale", e.g. "gaussian:0:1".
Density parse_density_flag(const std::string& spec, const std::string& flag) {
  std::vector<std::string> parts;
  std::stringstream ss(spec);
  for (std::string part; std::getline(ss, part, ':');) parts.push_back(part);
  if (parts.size() != 3)
    throw Error(ErrorCode::InvalidConfig, flag + " expects family:location:scale, got \"" + spec + "\"");
  Density d;
  auto family = parse_density_family(parts[0]);
  if (!family) throw Error(ErrorCode::InvalidConfig, flag + ": unknown family \"" + parts[0] + "\"");
  d.family = *family;
  try {
    d.location = std::stod(parts[1]);
    d.scale = std::stod(parts[2]);
  } catch (const std::exception&) {
    throw Error(ErrorCode::InvalidConfig, flag + ": location and scale must be numbers");
  }
  return d;
}

struct SimulateArgs {
  std::string config;
  std::uint64_t seed = 0;
  std::string out;
  std::string truth;
};

struct DiscoverArgs {
  std::string data;
  std::string truth;
  std::string test = "fisher-z";
  std::size_t permutations = 200;
  double alpha = 0.05;
  std::string rule = "gated_highest_p";
  std::uint64_t seed = 0;
  std::string out;
};

struct BenchmarkArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> jobs;
  std::string out;
  std::string summary;
  std::string summary_json;
};

struct VariabilityArgs {
  std::string data;
  double tolerance = kDefaultRankTolerance;
  std::size_t baseline = 0;
  std::size_t gcl_k = 1;
  double delta_tolerance = 1e-12;
  std::string out;
};

struct DiscrepancyArgs {
  std::string p;
  std::string p_tilde;
  std::optional<double> lo;
  std::optional<double> hi;
  std::size_t grid_points = 10001;
  double step = 1e-4;
  double zero_tolerance = 1e-6;
  std::string out;
};

struct DualityArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
};

int run_simulate(const SimulateArgs& a, std::ostream& out) {
  const DGPConfig config = parse_dgp_config(read_file(a.config));
  const MultiEnvDataset ds = simulate_dataset(config, a.seed);
  std::ostringstream csv;
  write_dataset_csv(csv, ds);
  emit(a.out, csv.str(), out);
  const std::string truth_path = !a.truth.empty() ? a.truth : (a.out.empty() ? "" : truth_path_for(a.out));
  if (!truth_path.empty()) write_file(truth_path, truth_json(ds) + "\n");
  return kExitOk;
}

int run_discover(const DiscoverArgs& a, std::ostream& out) {
  std::ifstream in(a.data);
  if (!in) throw Error(ErrorCode::InvalidInput, "cannot open " + a.data);
  MultiEnvDataset ds = read_dataset_csv(in);
  std::optional<CausalStructure> truth;
  if (!a.truth.empty()) {
    apply_truth_json(read_file(a.truth), ds);
    truth = ds.truth;
  }
  DiscoveryOptions options;
  options.test.method = *parse_test_method(a.test);
  options.test.permutations = a.permutations;
  options.test.seed = a.seed;
  options.alpha = a.alpha;
  options.rule = *parse_decision_rule(a.rule);
  emit(a.out, to_json(discover_structure(ds, options), truth), out);
  return kExitOk;
}

int run_benchmark_cmd(const BenchmarkArgs& a, std::ostream& out, std::ostream& err) {
  BenchConfig config = a.config.empty() ? BenchConfig{} : parse_bench_config(read_file(a.config));
  if (a.seed) config.master_seed = *a.seed;
  if (a.jobs) config.jobs = *a.jobs;
  const BenchResult result = run_benchmark(config);

  std::ostringstream cells;
  write_cells_csv(cells, result.cells);
  emit(a.out, cells.str(), out);
  if (!a.summary.empty()) {
    std::ostringstream s;
    write_summary_csv(s, result.summary);
    write_file(a.summary, s.str());
  }
  if (!a.summary_json.empty()) write_file(a.summary_json, summary_json(result) + "\n");
  if (!a.out.empty()) {
    out << summary_json(result) << '\n';
  } else {
    write_summary_csv(err, result.summary);
  }
  return kExitOk;
}

int run_variability(const VariabilityArgs& a, std::ostream& out) {
  std::ifstream in(a.data);
  if (!in) throw Error(ErrorCode::InvalidInput, "cannot open " + a.data);
  const Eigen::MatrixXd table = read_param_csv(in);
  if (a.gcl_k == 0 || table.cols() % static_cast<Eigen::Index>(a.gcl_k) != 0)
    throw Error(ErrorCode::ShapeMismatch, "--gcl-k must divide the number of dim columns");

  ModulationMatrix m;
  if (a.gcl_k == 1) {
    m = build_modulation_matrix(table, a.baseline);
  } else {
    const Eigen::Index k = static_cast<Eigen::Index>(a.gcl_k);
    const Eigen::Index d = table.cols() / k;
    std::vector<Eigen::MatrixXd> blocks;
    for (Eigen::Index e = 0; e < table.rows(); ++e) {
      Eigen::MatrixXd block(d, k);
      for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < k; ++j) block(i, j) = table(e, i * k + j);
      blocks.push_back(block);
    }
    m = build_gcl_modulation_matrix(blocks, a.baseline);
  }
  const VariabilityReport report = check_sufficient_variability(m, a.tolerance);
  nlohmann::json j = nlohmann::json::parse(to_json(report));
  j["n_environments"] = table.rows();
  j["d_sources"] = m.d_sources;
  j["k_order"] = m.k_order;
  j["baseline_index"] = m.baseline_index;
  j["delta_prior"] = detect_delta_prior(table, a.delta_tolerance);
  j["delta_tolerance"] = a.delta_tolerance;
  emit(a.out, j.dump(2), out);
  return kExitOk;
}

int run_discrepancy(const DiscrepancyArgs& a, std::ostream& out) {
  const Density p = parse_density_flag(a.p, "--p");
  const Density pt = parse_density_flag(a.p_tilde, "--p-tilde");
  DiscrepancyQuery q = default_discrepancy_query(p, pt);
  if (a.lo) q.lo = *a.lo;
  if (a.hi) q.hi = *a.hi;
  q.grid_points = a.grid_points;
  q.derivative_step = a.step;
  q.zero_tolerance = a.zero_tolerance;
  emit(a.out, to_json(q, interventional_discrepancy_fraction(q)), out);
  return kExitOk;
}

int run_duality(const DualityArgs& a, std::ostream& out) {
  DualityConfig config = parse_duality_config(read_file(a.config));
  if (a.seed) config.seed = *a.seed;
  emit(a.out, to_json(verify_duality(config)), out);
  return kExitOk;
}

}  // namespace

int command_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Exchangeable-data identifiability toolkit: simulate multi-environment data, "
               "discover bivariate causal structure, and run variability and duality diagnostics.",
               "exch"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Generate a multi-environment dataset (CSV + truth JSON)");
  simulate->add_option("--config", sim.config, "DGP config JSON")->required()->check(CLI::ExistingFile);
  simulate->add_option("--seed", sim.seed, "Dataset seed");
  simulate->add_option("--out", sim.out, "Output CSV path (truth JSON written next to it)");
  simulate->add_option("--truth", sim.truth, "Override the truth JSON path");

  DiscoverArgs disc;
  auto* discover = app.add_subcommand("discover", "Identify X->Y, Y->X or independence from a dataset CSV");
  discover->add_option("--data", disc.data, "Dataset CSV")->required()->check(CLI::ExistingFile);
  discover->add_option("--truth", disc.truth, "Truth JSON; adds truth/correct to the output")->check(CLI::ExistingFile);
  discover->add_option("--test", disc.test, "CI test")->check(CLI::IsMember({"fisher-z", "spearman-z", "residual-perm"}));
  discover->add_option("--permutations", disc.permutations, "Permutations for residual-perm")->check(CLI::PositiveNumber);
  discover->add_option("--alpha", disc.alpha, "Significance level")->check(CLI::Range(0.0, 1.0));
  discover->add_option("--rule", disc.rule, "Decision rule")->check(CLI::IsMember({"gated_highest_p", "highest_p"}));
  discover->add_option("--seed", disc.seed, "Permutation seed");
  discover->add_option("--out", disc.out, "Output JSON path");

  BenchmarkArgs bench;
  auto* benchmark = app.add_subcommand("benchmark", "Run the accuracy-vs-environments benchmark grid");
  benchmark->add_option("--config", bench.config, "Benchmark config JSON (defaults if omitted)")->check(CLI::ExistingFile);
  benchmark->add_option("--seed", bench.seed, "Override master_seed");
  benchmark->add_option("--jobs", bench.jobs, "Worker threads")->check(CLI::PositiveNumber);
  benchmark->add_option("--out", bench.out, "Per-cell results CSV path");
  benchmark->add_option("--summary", bench.summary, "Summary CSV path");
  benchmark->add_option("--summary-json", bench.summary_json, "Summary JSON path (with per-structure accuracy)");

  VariabilityArgs var;
  auto* variability = app.add_subcommand("variability", "Rank diagnostics of a modulation-parameter table");
  variability->add_option("--data", var.data, "Parameter CSV (env,dim_0,...)")->required()->check(CLI::ExistingFile);
  variability->add_option("--tolerance", var.tolerance, "Relative singular-value tolerance");
  variability->add_option("--baseline", var.baseline, "Baseline environment index");
  variability->add_option("--gcl-k", var.gcl_k, "Statistics per source (columns are d x k row-major)");
  variability->add_option("--delta-tolerance", var.delta_tolerance, "Spread at or below which a column is a delta prior");
  variability->add_option("--out", var.out, "Output JSON path");

  DiscrepancyArgs dis;
  auto* discrepancy = app.add_subcommand("discrepancy", "Check that log(p_tilde/p) has a.e. nonzero derivative");
  discrepancy->add_option("--p", dis.p, "Observational density family:location:scale")->required();
  discrepancy->add_option("--p-tilde", dis.p_tilde, "Interventional density family:location:scale")->required();
  discrepancy->add_option("--lo", dis.lo, "Grid lower end");
  discrepancy->add_option("--hi", dis.hi, "Grid upper end");
  discrepancy->add_option("--grid-points", dis.grid_points, "Grid size (>= 101)");
  discrepancy->add_option("--step", dis.step, "Central-difference step");
  discrepancy->add_option("--zero-tolerance", dis.zero_tolerance, "|derivative| counted as zero");
  discrepancy->add_option("--out", dis.out, "Output JSON path");

  DualityArgs dual;
  auto* duality = app.add_subcommand("duality", "Verify the cause/mechanism variability duality");
  duality->add_option("--config", dual.config, "Duality config JSON")->required()->check(CLI::ExistingFile);
  duality->add_option("--seed", dual.seed, "Override the config seed");
  duality->add_option("--out", dual.out, "Output report JSON path");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, err, err);
    if (!args.empty()) err << '\n';
    err << app.help();
    return kExitUsage;
  }

  try {
    if (*simulate) return run_simulate(sim, out);
    if (*discover) return run_discover(disc, out);
    if (*benchmark) return run_benchmark_cmd(bench, out, err);
    if (*variability) return run_variability(var, out);
    if (*discrepancy) return run_discrepancy(dis, out);
    if (*duality) return run_duality(dual, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  err << app.help();
  return kExitUsage;
}

}  // namespace exch::cli
