#include "exch/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <vector>

#include "exch/error.hpp"

namespace exch {

using nlohmann::json;

namespace {

[[noreturn]] void fail_at(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::Parse, path + ": " + what);
}

json parse_document(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::Parse, std::string("$: malformed JSON (") + e.what() + ")");
  }
}

std::uint64_t as_u64(const json& j, const std::string& path) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<std::int64_t>() >= 0))
    fail_at(path, "expected a non-negative integer");
  return j.get<std::uint64_t>();
}

double as_real(const json& j, const std::string& path) {
  if (!j.is_number()) fail_at(path, "expected a number");
  return j.get<double>();
}

bool as_bool(const json& j, const std::string& path) {
  if (!j.is_boolean()) fail_at(path, "expected a boolean");
  return j.get<bool>();
}

std::string as_string(const json& j, const std::string& path) {
  if (!j.is_string()) fail_at(path, "expected a string");
  return j.get<std::string>();
}

template <typename Parse>
auto as_enum(const json& j, const std::string& path, Parse parse, std::string_view choices) {
  const std::string s = as_string(j, path);
  auto v = parse(s);
  if (!v) fail_at(path, "unknown value \"" + s + "\" (expected one of " + std::string(choices) + ")");
  return *v;
}

std::vector<double> as_real_array(const json& j, const std::string& path) {
  if (!j.is_array()) fail_at(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(as_real(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

/// Object accessor that records consumed keys so leftovers can be rejected.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail_at(path_, "expected an object");
  }

  const json* find(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  const json& require(const std::string& key) {
    const json* v = find(key);
    if (!v) fail_at(path_, "missing required key \"" + key + "\"");
    return *v;
  }

  std::string path(const std::string& key) const { return path_ + "." + key; }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) fail_at(path(it.key()), "unknown key");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

constexpr std::string_view kRegimeChoices = "full_exchangeable, cause_variability, mechanism_variability, iid";
constexpr std::string_view kStructureChoices = "x_to_y, y_to_x, independent";

DGPConfig read_dgp(const json& j, const std::string& root) {
  ObjectReader r(j, root);
  DGPConfig c;
  if (auto v = r.find("n_environments")) c.n_environments = as_u64(*v, r.path("n_environments"));
  if (auto v = r.find("samples_per_env")) c.samples_per_env = as_u64(*v, r.path("samples_per_env"));
  if (auto v = r.find("regime")) c.regime = as_enum(*v, r.path("regime"), parse_regime, kRegimeChoices);
  if (auto v = r.find("structure")) {
    if (v->is_string() && v->get<std::string>() == "random") {
      c.structure.reset();
    } else {
      c.structure = as_enum(*v, r.path("structure"), parse_structure, "random, x_to_y, y_to_x, independent");
    }
  }
  if (auto v = r.find("noise_scale")) c.noise_scale = as_real(*v, r.path("noise_scale"));
  if (auto v = r.find("collapse_noise")) c.collapse_noise = as_bool(*v, r.path("collapse_noise"));
  if (auto v = r.find("coef_magnitude_range")) {
    const auto range = as_real_array(*v, r.path("coef_magnitude_range"));
    if (range.size() != 2) fail_at(r.path("coef_magnitude_range"), "expected [low, high]");
    c.coef_magnitude_range = {range[0], range[1]};
  }
  if (auto v = r.find("coef_sign"))
    c.coef_sign = as_enum(*v, r.path("coef_sign"), parse_coef_sign, "per_dataset, per_draw, positive");
  if (auto v = r.find("nonlinear_probability"))
    c.nonlinear_probability = as_real(*v, r.path("nonlinear_probability"));
  r.finish();
  try {
    validate(c);
  } catch (const Error& e) {
    fail_at(root, e.what());
  }
  return c;
}

SourceFamily read_family(const json& j, const std::string& root) {
  ObjectReader r(j, root);
  SourceFamily f;
  f.family = as_enum(r.require("family"), r.path("family"), parse_density_family, "gaussian, laplace");
  f.location = as_real_array(r.require("location"), r.path("location"));
  f.scale = as_real_array(r.require("scale"), r.path("scale"));
  r.finish();
  try {
    validate(f);
  } catch (const Error& e) {
    fail_at(root, e.what());
  }
  return f;
}

json family_json(const SourceFamily& f) {
  return {{"family", to_string(f.family)}, {"location", f.location}, {"scale", f.scale}};
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(',', start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  return s;
}

[[noreturn]] void fail_line(std::size_t line, const std::string& what) {
  throw Error(ErrorCode::Parse, "line " + std::to_string(line) + ": " + what);
}

std::size_t parse_index(std::string_view field, std::size_t line, std::string_view name) {
  field = trim(field);
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size() || field.empty())
    fail_line(line, std::string(name) + " \"" + std::string(field) + "\" is not a non-negative integer");
  return v;
}

double parse_real(std::string_view field, std::size_t line, std::string_view name) {
  field = trim(field);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size() || field.empty())
    fail_line(line, std::string(name) + " \"" + std::string(field) + "\" is not a number");
  if (!std::isfinite(v)) fail_line(line, std::string(name) + " is not finite");
  return v;
}

}  // namespace

std::string format_real(double v) {
  char buf[32];
  const int n = std::snprintf(buf, sizeof buf, "%.17g", v);
  return std::string(buf, static_cast<std::size_t>(n));
}

void write_dataset_csv(std::ostream& out, const MultiEnvDataset& dataset) {
  out << "env,sample,x,y\n";
  for (std::size_t e = 0; e < dataset.environments.size(); ++e) {
    const auto& rows = dataset.environments[e].samples;
    for (std::size_t i = 0; i < rows.size(); ++i)
      out << e << ',' << i << ',' << format_real(rows[i].x) << ',' << format_real(rows[i].y) << '\n';
  }
}

MultiEnvDataset read_dataset_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  std::map<std::size_t, std::map<std::size_t, std::pair<Sample, std::size_t>>> cells;

  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view text = trim(line);
    if (!have_header) {
      if (text != "env,sample,x,y") fail_line(line_no, "expected header \"env,sample,x,y\"");
      have_header = true;
      continue;
    }
    if (text.empty()) continue;
    const auto fields = split_commas(text);
    if (fields.size() != 4)
      fail_line(line_no, "expected 4 fields, found " + std::to_string(fields.size()));
    const std::size_t env = parse_index(fields[0], line_no, "env");
    const std::size_t sample = parse_index(fields[1], line_no, "sample");
    const Sample s{parse_real(fields[2], line_no, "x"), parse_real(fields[3], line_no, "y")};
    auto [it, inserted] = cells[env].try_emplace(sample, s, line_no);
    if (!inserted)
      fail_line(line_no, "duplicate (env " + std::to_string(env) + ", sample " + std::to_string(sample) +
                             "), first seen on line " + std::to_string(it->second.second));
  }
  if (!have_header) throw Error(ErrorCode::Parse, "line 1: empty input, expected header \"env,sample,x,y\"");

  MultiEnvDataset ds;
  std::size_t expected_env = 0;
  for (const auto& [env, samples] : cells) {
    if (env != expected_env)
      throw Error(ErrorCode::Parse, "environment " + std::to_string(expected_env) +
                                        " is missing (environments must be numbered 0..E-1)");
    ++expected_env;
    EnvironmentData data;
    std::size_t expected_sample = 0;
    for (const auto& [idx, entry] : samples) {
      if (idx != expected_sample)
        fail_line(entry.second, "environment " + std::to_string(env) + " skips sample " +
                                    std::to_string(expected_sample));
      ++expected_sample;
      data.samples.push_back(entry.first);
    }
    ds.environments.push_back(std::move(data));
  }
  return ds;
}

std::string truth_json(const MultiEnvDataset& dataset) {
  json params = json::array();
  for (const auto& p : dataset.params)
    params.push_back({{"theta", p.theta},
                      {"psi_loc", p.psi_loc},
                      {"psi_coef", p.psi_coef},
                      {"psi_nonlinear", p.psi_nonlinear}});
  json j = {{"structure", to_string(dataset.truth)},
            {"regime", to_string(dataset.regime)},
            {"seed", dataset.seed},
            {"noise_scale", dataset.noise_scale},
            {"collapse_noise", dataset.collapse_noise},
            {"params", params}};
  return j.dump(2);
}

void apply_truth_json(std::string_view text, MultiEnvDataset& dataset) {
  const json j = parse_document(text);
  ObjectReader r(j, "$");
  dataset.truth = as_enum(r.require("structure"), r.path("structure"), parse_structure, kStructureChoices);
  dataset.regime = as_enum(r.require("regime"), r.path("regime"), parse_regime, kRegimeChoices);
  dataset.seed = as_u64(r.require("seed"), r.path("seed"));
  if (auto v = r.find("noise_scale")) dataset.noise_scale = as_real(*v, r.path("noise_scale"));
  if (auto v = r.find("collapse_noise")) dataset.collapse_noise = as_bool(*v, r.path("collapse_noise"));
  const json& params = r.require("params");
  if (!params.is_array()) fail_at(r.path("params"), "expected an array");
  dataset.params.clear();
  for (std::size_t i = 0; i < params.size(); ++i) {
    ObjectReader pr(params[i], r.path("params") + "[" + std::to_string(i) + "]");
    DeFinettiParams p;
    p.theta = as_real(pr.require("theta"), pr.path("theta"));
    p.psi_loc = as_real(pr.require("psi_loc"), pr.path("psi_loc"));
    p.psi_coef = as_real(pr.require("psi_coef"), pr.path("psi_coef"));
    p.psi_nonlinear = as_bool(pr.require("psi_nonlinear"), pr.path("psi_nonlinear"));
    pr.finish();
    dataset.params.push_back(p);
  }
  r.finish();
  if (!dataset.environments.empty() && dataset.params.size() != dataset.environments.size())
    fail_at("$.params", "has " + std::to_string(dataset.params.size()) + " entries for " +
                            std::to_string(dataset.environments.size()) + " environments");
}

std::string truth_path_for(const std::string& csv_path) {
  const std::string suffix = ".csv";
  if (csv_path.size() >= suffix.size() &&
      csv_path.compare(csv_path.size() - suffix.size(), suffix.size(), suffix) == 0)
    return csv_path.substr(0, csv_path.size() - suffix.size()) + ".truth.json";
  return csv_path + ".truth.json";
}

Eigen::MatrixXd read_param_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::size_t dims = 0;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view text = trim(line);
    if (line_no == 1) {
      const auto fields = split_commas(text);
      if (fields.size() < 2 || trim(fields[0]) != "env")
        fail_line(1, "expected header \"env,dim_0,...,dim_{d-1}\"");
      for (std::size_t k = 1; k < fields.size(); ++k)
        if (trim(fields[k]) != "dim_" + std::to_string(k - 1))
          fail_line(1, "column " + std::to_string(k) + " must be named dim_" + std::to_string(k - 1));
      dims = fields.size() - 1;
      continue;
    }
    if (text.empty()) continue;
    const auto fields = split_commas(text);
    if (fields.size() != dims + 1)
      fail_line(line_no, "expected " + std::to_string(dims + 1) + " fields, found " + std::to_string(fields.size()));
    const std::size_t env = parse_index(fields[0], line_no, "env");
    if (env != rows.size())
      fail_line(line_no, "env must be " + std::to_string(rows.size()) + " (rows in order 0..E-1)");
    std::vector<double> row;
    for (std::size_t k = 0; k < dims; ++k) row.push_back(parse_real(fields[k + 1], line_no, "dim_" + std::to_string(k)));
    rows.push_back(std::move(row));
  }
  if (line_no == 0) throw Error(ErrorCode::Parse, "line 1: empty input");
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(dims));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t k = 0; k < dims; ++k) out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
  return out;
}

void write_param_csv(std::ostream& out, const Eigen::MatrixXd& params) {
  out << "env";
  for (Eigen::Index k = 0; k < params.cols(); ++k) out << ",dim_" << k;
  out << '\n';
  for (Eigen::Index e = 0; e < params.rows(); ++e) {
    out << e;
    for (Eigen::Index k = 0; k < params.cols(); ++k) out << ',' << format_real(params(e, k));
    out << '\n';
  }
}

DGPConfig parse_dgp_config(std::string_view text) { return read_dgp(parse_document(text), "$"); }

BenchConfig parse_bench_config(std::string_view text) {
  const json j = parse_document(text);
  ObjectReader r(j, "$");
  BenchConfig c;
  if (auto v = r.find("env_grid")) {
    if (!v->is_array()) fail_at(r.path("env_grid"), "expected an array of positive integers");
    c.env_grid.clear();
    for (std::size_t i = 0; i < v->size(); ++i) {
      const std::string p = r.path("env_grid") + "[" + std::to_string(i) + "]";
      const auto n = as_u64((*v)[i], p);
      if (n == 0) fail_at(p, "expected a positive integer");
      if (!c.env_grid.empty() && n <= c.env_grid.back()) fail_at(p, "env_grid must be strictly increasing");
      c.env_grid.push_back(n);
    }
  }
  if (auto v = r.find("n_seeds")) c.n_seeds = as_u64(*v, r.path("n_seeds"));
  if (auto v = r.find("regimes")) {
    if (!v->is_array()) fail_at(r.path("regimes"), "expected an array of regime names");
    c.regimes.clear();
    for (std::size_t i = 0; i < v->size(); ++i)
      c.regimes.push_back(as_enum((*v)[i], r.path("regimes") + "[" + std::to_string(i) + "]", parse_regime, kRegimeChoices));
  }
  if (auto v = r.find("truths")) {
    if (!v->is_array()) fail_at(r.path("truths"), "expected an array of structure names");
    c.truths.clear();
    for (std::size_t i = 0; i < v->size(); ++i)
      c.truths.push_back(as_enum((*v)[i], r.path("truths") + "[" + std::to_string(i) + "]", parse_structure, kStructureChoices));
  }
  if (auto v = r.find("samples_per_env")) c.samples_per_env = as_u64(*v, r.path("samples_per_env"));
  if (auto v = r.find("alpha")) c.alpha = as_real(*v, r.path("alpha"));
  if (auto v = r.find("test"))
    c.test.method = as_enum(*v, r.path("test"), parse_test_method, "fisher-z, spearman-z, residual-perm");
  if (auto v = r.find("permutations")) c.test.permutations = as_u64(*v, r.path("permutations"));
  if (auto v = r.find("decision_rule"))
    c.rule = as_enum(*v, r.path("decision_rule"), parse_decision_rule, "gated_highest_p, highest_p");
  if (auto v = r.find("master_seed")) c.master_seed = as_u64(*v, r.path("master_seed"));
  if (auto v = r.find("include_random_baseline"))
    c.include_random_baseline = as_bool(*v, r.path("include_random_baseline"));
  if (auto v = r.find("jobs")) c.jobs = as_u64(*v, r.path("jobs"));
  if (auto v = r.find("dgp")) c.dgp = read_dgp(*v, r.path("dgp"));
  r.finish();
  try {
    validate(c);
  } catch (const Error& e) {
    fail_at("$", e.what());
  }
  return c;
}

DualityConfig parse_duality_config(std::string_view text) {
  const json j = parse_document(text);
  ObjectReader r(j, "$");
  DualityConfig c;
  {
    ObjectReader m(r.require("mixing"), r.path("mixing"));
    c.mixing.kind = as_enum(m.require("kind"), m.path("kind"), parse_mixing_kind,
                            "identity, triangular_affine_plus_tanh");
    c.mixing.d = as_u64(m.require("d"), m.path("d"));
    if (auto v = m.find("seed")) c.mixing.seed = as_u64(*v, m.path("seed"));
    m.finish();
  }
  c.base = read_family(r.require("base"), r.path("base"));
  const json& per_u = r.require("per_u");
  if (!per_u.is_array()) fail_at(r.path("per_u"), "expected an array of source families");
  for (std::size_t i = 0; i < per_u.size(); ++i)
    c.per_u.push_back(read_family(per_u[i], r.path("per_u") + "[" + std::to_string(i) + "]"));
  if (auto v = r.find("n_samples")) c.n_samples = as_u64(*v, r.path("n_samples"));
  if (auto v = r.find("seed")) c.seed = as_u64(*v, r.path("seed"));
  if (auto v = r.find("test"))
    c.test = as_enum(*v, r.path("test"), parse_two_sample_method, "ks_per_coordinate, energy_permutation");
  if (auto v = r.find("permutations")) c.permutations = as_u64(*v, r.path("permutations"));
  if (auto v = r.find("level")) c.level = as_real(*v, r.path("level"));
  if (auto v = r.find("force_identity_transport"))
    c.force_identity_transport = as_bool(*v, r.path("force_identity_transport"));
  r.finish();
  try {
    validate(c);
  } catch (const Error& e) {
    fail_at("$", e.what());
  }
  return c;
}

std::string to_json(const DGPConfig& c) {
  json j = {{"n_environments", c.n_environments},
            {"samples_per_env", c.samples_per_env},
            {"regime", to_string(c.regime)},
            {"structure", c.structure ? std::string(to_string(*c.structure)) : std::string("random")},
            {"noise_scale", c.noise_scale},
            {"collapse_noise", c.collapse_noise},
            {"coef_magnitude_range", {c.coef_magnitude_range[0], c.coef_magnitude_range[1]}},
            {"coef_sign", to_string(c.coef_sign)},
            {"nonlinear_probability", c.nonlinear_probability}};
  return j.dump(2);
}

std::string to_json(const DualityConfig& c) {
  json per_u = json::array();
  for (const auto& f : c.per_u) per_u.push_back(family_json(f));
  json j = {{"mixing", {{"kind", to_string(c.mixing.kind)}, {"d", c.mixing.d}, {"seed", c.mixing.seed}}},
            {"base", family_json(c.base)},
            {"per_u", per_u},
            {"n_samples", c.n_samples},
            {"seed", c.seed},
            {"test", to_string(c.test)},
            {"permutations", c.permutations},
            {"level", c.level},
            {"force_identity_transport", c.force_identity_transport}};
  return j.dump(2);
}

std::string to_json(const DiscoveryDecision& d, std::optional<CausalStructure> truth) {
  json j = {{"structure", to_string(d.structure)},
            {"p_x_to_y", d.p_x_to_y},
            {"p_y_to_x", d.p_y_to_x},
            {"p_independent", d.p_independent},
            {"alpha", d.alpha},
            {"rule", to_string(d.rule)},
            {"flags", d.flags}};
  if (truth) {
    j["truth"] = to_string(*truth);
    j["correct"] = *truth == d.structure;
  }
  return j.dump(2);
}

std::string to_json(const VariabilityReport& r) {
  json j = {{"rank", r.rank},
            {"full_column_rank", r.full_column_rank},
            {"condition_number", std::isfinite(r.condition_number) ? json(r.condition_number) : json("inf")},
            {"singular_values", r.singular_values},
            {"tolerance", r.tolerance},
            {"flags", r.flags}};
  return j.dump(2);
}

std::string to_json(const DiscrepancyQuery& q, const DiscrepancyResult& res) {
  auto density = [](const Density& d) {
    return json{{"family", to_string(d.family)}, {"location", d.location}, {"scale", d.scale}};
  };
  json j = {{"p", density(q.p)},
            {"p_tilde", density(q.p_tilde)},
            {"interval", {q.lo, q.hi}},
            {"grid_points", q.grid_points},
            {"derivative_step", q.derivative_step},
            {"zero_tolerance", q.zero_tolerance},
            {"fraction_zero", res.fraction_zero},
            {"holds_ae", res.holds_ae}};
  return j.dump(2);
}

std::string to_json(const DualityReport& r) {
  json per_u = json::array();
  for (const auto& u : r.per_u_results)
    per_u.push_back({{"u", u.u},
                     {"statistic", u.statistic},
                     {"p_observed", u.p_observed},
                     {"p_source", u.p_source},
                     {"p_value", u.p_value},
                     {"pass", u.pass}});
  json j = {{"per_u_results", per_u}, {"overall_pass", r.overall_pass}, {"level", r.level}};
  return j.dump(2);
}

std::string summary_json(const BenchResult& result) {
  json rows = json::array();
  for (const auto& s : result.summary) {
    json by = json::object();
    for (const auto& b : s.by_structure)
      by[std::string(to_string(b.truth))] = {{"n_cells", b.n_cells}, {"accuracy", b.accuracy}};
    rows.push_back({{"regime", to_string(s.regime)},
                    {"n_envs", s.n_envs},
                    {"accuracy_mean", s.accuracy_mean},
                    {"accuracy_std", s.accuracy_std},
                    {"baseline_accuracy", s.baseline_accuracy},
                    {"n_cells", s.n_cells},
                    {"by_structure", by}});
  }
  json j = {{"n_cells", result.cells.size()},
            {"baseline_accuracy", baseline_accuracy(result.cells)},
            {"summary", rows}};
  return j.dump(2);
}

}  // namespace exch
