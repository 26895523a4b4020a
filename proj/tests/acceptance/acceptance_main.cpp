// Acceptance checks. One line per criterion; exit status is nonzero when any
// criterion fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <string>

#include "exch/bench.hpp"
#include "exch/citest.hpp"
#include "exch/discovery.hpp"
#include "exch/duality.hpp"
#include "exch/rng.hpp"
#include "exch/variability.hpp"
#include "oracles.hpp"

namespace {

using namespace exch;

int g_failures = 0;

void report(int id, const std::string& name, bool pass, const std::string& detail) {
  std::printf("[%s] %d %s: %s\n", pass ? "PASS" : "FAIL", id, name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

const SummaryRow* find_row(const BenchResult& r, VariabilityRegime regime, std::size_t n_envs) {
  for (const auto& row : r.summary)
    if (row.regime == regime && row.n_envs == n_envs) return &row;
  return nullptr;
}

void iid_negative_control();

void benchmark_criteria() {
  BenchConfig config;  // defaults: Fisher-z, alpha 0.05, 2 samples/env, 100 seeds, 100..500 envs
  const auto start = std::chrono::steady_clock::now();
  const auto result = run_benchmark(config);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  const auto* full = find_row(result, VariabilityRegime::FullExchangeable, 500);
  report(1, "full-exchangeable accuracy at 500 environments", full->accuracy_mean >= 0.95 && seconds < 300.0,
         fmt("accuracy=%.3f (need >= 0.95), runtime=%.1fs (need < 300s)", full->accuracy_mean, seconds));

  const auto* cause = find_row(result, VariabilityRegime::CauseVariability, 500);
  const auto* mech = find_row(result, VariabilityRegime::MechanismVariability, 500);
  report(2, "cause/mechanism variability accuracy at 500 environments",
         cause->accuracy_mean >= 0.90 && mech->accuracy_mean >= 0.90,
         fmt("cause=%.3f mechanism=%.3f (need each >= 0.90)", cause->accuracy_mean, mech->accuracy_mean));

  iid_negative_control();

  const double base = baseline_accuracy(result.cells);
  report(4, "random baseline accuracy", result.cells.size() >= 1500 && std::abs(base - 1.0 / 3.0) <= 0.05,
         fmt("accuracy=%.4f over %zu cells (need 1/3 +- 0.05)", base, result.cells.size()));

  bool monotone = true;
  std::string detail;
  for (auto regime : config.regimes) {
    const double a100 = find_row(result, regime, 100)->accuracy_mean;
    const double a500 = find_row(result, regime, 500)->accuracy_mean;
    monotone &= a500 >= a100 - 0.05;
    detail += fmt("%s: %.2f -> %.2f; ", std::string(to_string(regime)).c_str(), a100, a500);
  }
  report(5, "accuracy does not drop from 100 to 500 environments", monotone, detail + "(tolerance 0.05)");
}

void iid_negative_control() {
  DGPConfig c;
  c.regime = VariabilityRegime::IID;
  c.n_environments = 500;
  int correct = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto truth = seed % 2 ? CausalStructure::XtoY : CausalStructure::YtoX;
    c.structure = truth;
    correct += discover_structure(simulate_dataset(c, derive_seed(0x11D, seed))).structure == truth;
  }
  const double acc = correct / 100.0;
  report(3, "i.i.d. direction recovery is at chance", acc >= 0.35 && acc <= 0.65,
         fmt("accuracy=%.2f over 100 seeds (need [0.35, 0.65])", acc));
}

Eigen::MatrixXd uniform_table(Stream& s, Eigen::Index e, Eigen::Index d) {
  Eigen::MatrixXd t(e, d);
  for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] = s.uniform(-1.0, 1.0);
  return t;
}

void rank_criteria() {
  Stream s(0x1E3);
  int full = 0;
  for (int rep = 0; rep < 1000; ++rep)
    full += check_sufficient_variability(build_modulation_matrix(uniform_table(s, 4, 3)), 1e-10).full_column_rank;
  int deficient = 0;
  for (int rep = 0; rep < 100; ++rep) {
    Eigen::MatrixXd t = uniform_table(s, 4, 3);
    const Eigen::Index col = rep % 3;
    t.col(col).setConstant(t(0, col));
    const bool flagged = detect_delta_prior(t, 1e-10)[static_cast<std::size_t>(col)];
    deficient += flagged && !check_sufficient_variability(build_modulation_matrix(t), 1e-10).full_column_rank;
  }
  report(6, "non-delta draws give full column rank, delta columns do not", full == 1000 && deficient == 100,
         fmt("full rank %d/1000, deficient %d/100", full, deficient));
}

void discrepancy_criteria() {
  const Density std_normal{DensityFamily::Gaussian, 0.0, 1.0};
  const auto shift = interventional_discrepancy_fraction(
      default_discrepancy_query(std_normal, {DensityFamily::Gaussian, 1.0, 1.0}));
  const auto same = interventional_discrepancy_fraction(default_discrepancy_query(std_normal, std_normal));
  const auto wide = interventional_discrepancy_fraction(
      default_discrepancy_query(std_normal, {DensityFamily::Gaussian, 0.0, 2.0}));
  report(7, "interventional discrepancy on analytic Gaussian pairs",
         shift.fraction_zero == 0.0 && same.fraction_zero == 1.0 && wide.fraction_zero <= 0.001,
         fmt("mean shift=%g (need 0), identical=%g (need 1), variance change=%g (need <= 0.001)",
             shift.fraction_zero, same.fraction_zero, wide.fraction_zero));
}

SourceFamily gaussian2(double scale) { return {DensityFamily::Gaussian, {0.0, 0.0}, {scale, scale}}; }

void duality_criteria() {
  DualityConfig c;
  c.mixing = {MixingKind::TriangularAffinePlusTanh, 2, 5};
  c.base = gaussian2(1.0);
  c.per_u = {gaussian2(0.5), gaussian2(2.0)};
  c.n_samples = 5000;
  c.seed = 1;
  const auto report_one = verify_duality(c);

  Stream s(0xD0A1);
  Eigen::MatrixXd u(5000, 2);
  for (Eigen::Index i = 0; i < u.size(); ++i) u.data()[i] = s.uniform01();
  double max_diff = 0.0;
  for (std::size_t k = 0; k < c.per_u.size(); ++k)
    max_diff = std::max(max_diff, (cause_path_from_uniforms(c, k, u) - mechanism_path_from_uniforms(c, k, u))
                                      .cwiseAbs()
                                      .maxCoeff());

  int rejections = 0;
  DualityConfig null_cfg = c;
  null_cfg.per_u = {gaussian2(2.0)};
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    null_cfg.seed = derive_seed(0x4E55, seed);
    rejections += verify_duality(null_cfg).per_u_results[0].p_value < 0.05;
  }
  const double rate = rejections / 200.0;
  report(8, "cause/mechanism duality",
         report_one.overall_pass && max_diff <= 1e-10 && rate >= 0.01 && rate <= 0.12,
         fmt("example pass=%s, common-quantile max diff=%.3g (need <= 1e-10), null rejection=%.3f (need [0.01, 0.12])",
             report_one.overall_pass ? "true" : "false", max_diff, rate));
}

void invariant_criteria() {
  std::mt19937_64 shuffle_rng(9);
  double worst_density = 0.0;
  bool symmetric = true;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    DGPConfig c;
    c.n_environments = 200;
    c.samples_per_env = 3;
    c.regime = static_cast<VariabilityRegime>(seed % 4);
    c.structure.reset();
    auto ds = simulate_dataset(c, seed);
    const double before = joint_log_density(ds);
    auto permuted = ds;
    for (auto& env : permuted.environments) std::shuffle(env.samples.begin(), env.samples.end(), shuffle_rng);
    std::vector<std::size_t> order(permuted.environments.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    auto reordered = permuted;
    for (std::size_t i = 0; i < order.size(); ++i) {
      reordered.environments[i] = permuted.environments[order[i]];
      reordered.params[i] = permuted.params[order[i]];
    }
    worst_density = std::max(worst_density, std::abs(joint_log_density(reordered) - before));

    auto swapped = ds;
    for (auto& env : swapped.environments)
      for (auto& smp : env.samples) std::swap(smp.x, smp.y);
    const auto a = discover_structure(ds);
    const auto b = discover_structure(swapped);
    symmetric &= a.p_x_to_y == b.p_y_to_x && a.p_y_to_x == b.p_x_to_y && a.p_independent == b.p_independent;
  }

  Stream s(0x9A);
  double worst_modulation = 0.0;
  bool rank_invariant = true;
  for (int rep = 0; rep < 50; ++rep) {
    const auto t = uniform_table(s, 6, 3);
    const auto base = build_modulation_matrix(t);
    const Eigen::RowVectorXd shift = Eigen::RowVectorXd::Constant(3, s.uniform(-5.0, 5.0));
    worst_modulation = std::max(worst_modulation,
                                (build_modulation_matrix(t.rowwise() + shift).entries - base.entries).cwiseAbs().maxCoeff());
    const auto r0 = check_sufficient_variability(base);
    const auto scaled = check_sufficient_variability(build_modulation_matrix(-2.5 * t));
    rank_invariant &= scaled.rank == r0.rank &&
                      std::abs(scaled.condition_number - r0.condition_number) <= 1e-9 * r0.condition_number;
    for (std::size_t b = 1; b < 6; ++b)
      rank_invariant &= check_sufficient_variability(build_modulation_matrix(t, b)).rank == r0.rank;
  }

  std::vector<double> p;
  for (std::uint64_t rep = 0; rep < 1000; ++rep) {
    Stream draw(derive_seed(0xCA1, rep));
    std::vector<double> x(100), y(100), z(100);
    for (std::size_t i = 0; i < 100; ++i) {
      z[i] = draw.laplace(0.0, 1.0);
      x[i] = z[i] + draw.laplace(0.0, 1.0);
      y[i] = z[i] + draw.laplace(0.0, 1.0);
    }
    p.push_back(conditional_independence_test(x, y, z).p_value);
  }
  const double ks = exch::testing::one_sample_ks(p, exch::testing::uniform01_cdf);

  report(9, "invariant suites",
         worst_density <= 1e-9 && symmetric && worst_modulation <= 1e-12 && rank_invariant && ks < 0.06,
         fmt("log-density drift=%.2g, label symmetry=%s, modulation drift=%.2g, rank invariance=%s, "
             "null p-value KS=%.4f (need < 0.06)",
             worst_density, symmetric ? "ok" : "broken", worst_modulation, rank_invariant ? "ok" : "broken", ks));
}

}  // namespace

int main() {
  benchmark_criteria();
  rank_criteria();
  discrepancy_criteria();
  duality_criteria();
  invariant_criteria();
  std::printf("%d criterion(s) failed\n", g_failures);
  return g_failures == 0 ? 0 : 1;
}
