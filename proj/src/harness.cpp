#include "rvl/harness.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "rvl/bessel.h"
#include "rvl/experiment.h"
#include "rvl/ito.h"
#include "rvl/kernel.h"
#include "rvl/parallel.h"
#include "rvl/variation.h"

#ifndef RVL_BUILD_ID
#define RVL_BUILD_ID "unknown"
#endif

namespace rvl {

using nlohmann::json;

const char* build_identifier() noexcept { return RVL_BUILD_ID; }

// ---------------------------------------------------------------------------
// Configuration

namespace {

const std::vector<std::string>& known_experiments() {
  static const std::vector<std::string> names{
      "fbm-covariance", "fbm-variation",    "ito-variation",      "ito-variation-nd",    "lp-scaling",
      "kernel-check",   "bessel-variation", "bessel-moments", "bessel-selfsim"};
  return names;
}

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys{
      "experiment", "hurst",  "dimension", "horizon", "grid_sizes", "replications",
      "master_seed", "tolerances", "output_path", "format", "spec", "sampler",
      "q", "times", "scales", "time"};
  return keys;
}

std::string default_spec(const std::string& experiment) {
  return experiment == "ito-variation-nd" ? "half-norm-square" : "half-square";
}

}  // namespace

ExperimentConfig parse_config(const json& doc) {
  if (!doc.is_object()) throw std::invalid_argument("config must be a JSON object");
  for (const auto& [key, value] : doc.items())
    if (!known_keys().contains(key)) throw std::invalid_argument("unknown config key '" + key + "'");
  if (!doc.contains("experiment")) throw std::invalid_argument("config needs an 'experiment' key");

  ExperimentConfig c;
  try {
    c.experiment = doc.at("experiment").get<std::string>();
    if (doc.contains("hurst")) c.hurst = doc["hurst"].get<double>();
    if (doc.contains("dimension")) c.dimension = doc["dimension"].get<std::size_t>();
    if (doc.contains("horizon")) c.horizon = doc["horizon"].get<double>();
    if (doc.contains("grid_sizes")) c.grid_sizes = doc["grid_sizes"].get<std::vector<std::size_t>>();
    if (doc.contains("replications")) c.replications = doc["replications"].get<std::size_t>();
    if (doc.contains("master_seed")) c.master_seed = doc["master_seed"].get<std::uint64_t>();
    if (doc.contains("tolerances"))
      c.tolerances = doc["tolerances"].get<std::map<std::string, double>>();
    if (doc.contains("output_path")) c.output_path = doc["output_path"].get<std::string>();
    if (doc.contains("format")) c.format = doc["format"].get<std::string>();
    if (doc.contains("spec")) c.spec = doc["spec"].get<std::string>();
    if (doc.contains("sampler")) c.sampler = doc["sampler"].get<std::string>();
    if (doc.contains("q")) c.q = doc["q"].get<double>();
    if (doc.contains("times")) c.times = doc["times"].get<std::vector<double>>();
    if (doc.contains("scales")) c.scales = doc["scales"].get<std::vector<double>>();
    if (doc.contains("time")) c.time = doc["time"].get<double>();
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed config value: ") + e.what());
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw std::invalid_argument("config file '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_config(doc);
}

json to_json(const ExperimentConfig& c) {
  json j{{"experiment", c.experiment},   {"hurst", c.hurst},
         {"dimension", c.dimension},     {"horizon", c.horizon},
         {"grid_sizes", c.grid_sizes},   {"replications", c.replications},
         {"master_seed", c.master_seed}, {"tolerances", c.tolerances},
         {"output_path", c.output_path}, {"format", c.format},
         {"spec", c.spec},               {"sampler", c.sampler},
         {"q", c.q},                     {"times", c.times},
         {"scales", c.scales},           {"time", c.time}};
  return j;
}

std::vector<std::string> experiment_names() { return known_experiments(); }

void validate_config(const ExperimentConfig& c) {
  const auto& names = known_experiments();
  if (std::find(names.begin(), names.end(), c.experiment) == names.end())
    throw std::invalid_argument("unknown experiment '" + c.experiment + "'");
  const HurstParam h(c.hurst);
  if (c.format != "csv" && c.format != "json")
    throw std::invalid_argument("format must be csv or json");
  sampler_from_string(c.sampler);
  if (!(c.horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
  if (c.dimension == 0) throw std::invalid_argument("dimension must be at least 1");
  if (c.replications < 2) throw std::invalid_argument("at least 2 replications are required");

  const std::string& e = c.experiment;
  if (e == "kernel-check") {
    h.require_rough("kernel-check");
    return;
  }
  MonteCarloSetup setup;
  setup.grid_sizes = c.grid_sizes;
  setup.replications = c.replications;
  setup.horizon = c.horizon;
  setup.validate();

  if (e == "ito-variation" || e == "ito-variation-nd") h.require_rough(e.c_str());
  if (e == "ito-variation" || e == "lp-scaling") integrand(c.spec.empty() ? default_spec(e) : c.spec);
  if (e == "ito-variation-nd") multi_integrand(c.spec.empty() ? default_spec(e) : c.spec);
  if (e == "lp-scaling") {
    const UniformGrid finest(c.horizon, c.grid_sizes.back());
    for (const auto& [a, b] : default_lp_intervals(c.horizon)) {
      finest.index_of(a);
      finest.index_of(b);
    }
  }
  if (e == "fbm-covariance" && c.grid_sizes.back() > CholeskySampler::max_size)
    throw std::invalid_argument("fbm-covariance uses the Cholesky sampler (n <= 4096)");
  if (e.starts_with("bessel")) {
    if (c.dimension < 2) throw GateError(e + " requires dimension d >= 2");
    if (e == "bessel-variation") require_bessel_variation_gate(c.dimension, h);
    if (e == "bessel-moments") kq_constant(c.dimension, c.q);
    if (e == "bessel-selfsim") {
      if (!(c.time > 0.0)) throw std::invalid_argument("bessel-selfsim time must be positive");
      for (double a : c.scales)
        if (!(a > 0.0)) throw std::invalid_argument("bessel-selfsim scales must be positive");
    }
  }
}

// ---------------------------------------------------------------------------
// Empirical covariance

EmpiricalCovariance empirical_covariance(const FbmSampler& sampler, std::size_t replications,
                                         std::uint64_t master_seed, std::size_t workers) {
  if (replications < 2) throw std::invalid_argument("at least 2 replications are required");
  const std::size_t n = sampler.grid().size();
  const auto paths = parallel_map(replications, workers, [&](std::size_t r) {
    return sampler.sample({master_seed, r}).values;
  });
  EmpiricalCovariance out;
  out.n = n;
  out.value.assign(n * n, 0.0);
  out.std_error.assign(n * n, 0.0);
  std::vector<double> products(replications);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      for (std::size_t r = 0; r < replications; ++r)
        products[r] = paths[r][i + 1] * paths[r][j + 1];
      const Aggregate agg = aggregate(products);
      out.value[i * n + j] = out.value[j * n + i] = agg.mean;
      out.std_error[i * n + j] = out.std_error[j * n + i] = *agg.std_error;
    }
  return out;
}

// ---------------------------------------------------------------------------
// Experiments

namespace {

MonteCarloSetup setup_of(const ExperimentConfig& c, std::size_t workers) {
  MonteCarloSetup s;
  s.horizon = c.horizon;
  s.grid_sizes = c.grid_sizes;
  s.replications = c.replications;
  s.master_seed = c.master_seed;
  s.workers = workers;
  s.sampler = sampler_from_string(c.sampler);
  return s;
}

std::optional<double> tolerance(const ExperimentConfig& c, const std::string& name) {
  const auto it = c.tolerances.find(name);
  if (it == c.tolerances.end()) return std::nullopt;
  return it->second;
}

void convergence_checks(const ExperimentConfig& c, const ConvergenceReport& rep,
                        std::vector<Check>& checks) {
  if (auto tol = tolerance(c, "rel_err")) {
    const double v = rep.finest().rel_err;
    checks.push_back({"rel_err", v, *tol, v < *tol});
  }
  if (auto want = tolerance(c, "require_trend"); want && *want != 0.0) {
    const bool ok = rep.trend_decreasing();
    checks.push_back({"trend_decreasing", ok ? 1.0 : 0.0, 1.0, ok});
  }
  if (auto tol = tolerance(c, "z"); tol && rep.summary.find("closed_form_target")) {
    const double z = std::abs(rep.summary.at("closed_form_target") - rep.summary.at("xi_target")) /
                     rep.summary.at("xi_stderr");
    checks.push_back({"xi_agreement_z", z, *tol, z <= *tol});
  }
}

RunResult run_fbm_covariance(const ExperimentConfig& c, std::size_t workers) {
  const HurstParam h(c.hurst);
  const UniformGrid grid(c.horizon, c.grid_sizes.back());
  const std::size_t n = grid.size();
  const FbmSampler chol(h, grid, SamplerKind::cholesky);
  const FbmSampler circ(h, grid, SamplerKind::circulant);
  // The circulant arm draws from a derived master seed, independent of the first.
  const auto a = empirical_covariance(chol, c.replications, c.master_seed, workers);
  const auto b = empirical_covariance(circ, c.replications, mix64(c.master_seed), workers);

  RunResult out;
  Table& t = out.table;
  t.columns = {"i", "j", "target", "cholesky", "cholesky_se", "circulant", "circulant_se"};
  double z_chol = 0.0, z_circ = 0.0, z_diff = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      const std::size_t k = i * n + j;
      const double target = covariance(h, grid.node(i + 1), grid.node(j + 1));
      t.rows.push_back({static_cast<double>(i + 1), static_cast<double>(j + 1), target, a.value[k],
                        a.std_error[k], b.value[k], b.std_error[k]});
      z_chol = std::max(z_chol, std::abs(a.value[k] - target) / a.std_error[k]);
      z_circ = std::max(z_circ, std::abs(b.value[k] - target) / b.std_error[k]);
      z_diff = std::max(z_diff, std::abs(a.value[k] - b.value[k]) /
                                    std::hypot(a.std_error[k], b.std_error[k]));
    }
  t.summary.set("max_z_cholesky", z_chol);
  t.summary.set("max_z_circulant", z_circ);
  t.summary.set("max_z_between_samplers", z_diff);
  if (auto tol = tolerance(c, "z")) {
    out.checks.push_back({"cholesky_z", z_chol, *tol, z_chol <= *tol});
    out.checks.push_back({"circulant_z", z_circ, *tol, z_circ <= *tol});
    out.checks.push_back({"sampler_agreement_z", z_diff, *tol, z_diff <= *tol});
  }
  return out;
}

RunResult run_kernel_check(const ExperimentConfig& c) {
  const HurstParam h(c.hurst);
  const double tol = tolerance(c, "quadrature").value_or(default_kernel_tolerance);
  std::vector<double> lattice;
  for (int k = 1; k <= 5; ++k) lattice.push_back(0.2 * k * c.horizon);

  RunResult out;
  Table& t = out.table;
  t.columns = {"t", "s", "lhs", "rhs", "rel_err"};
  double worst = 0.0;
  for (double tt : lattice)
    for (double s : lattice) {
      const QuadratureResult lhs = kernel_reproduction(h, tt, s, tol);
      if (!lhs.converged)
        throw NumericalError("kernel reproduction quadrature did not converge");
      const double rhs = covariance(h, tt, s);
      const double rel = std::abs(lhs.value - rhs) / std::abs(rhs);
      worst = std::max(worst, rel);
      t.rows.push_back({tt, s, lhs.value, rhs, rel});
    }
  // Isometry on the same lattice: indicators of [0, t] on the 5-cell grid.
  const UniformGrid cells(c.horizon, lattice.size());
  double worst_isometry = 0.0;
  for (std::size_t i = 0; i < lattice.size(); ++i)
    for (std::size_t j = 0; j < lattice.size(); ++j) {
      const QuadratureResult ip = inner_product_H_detailed(
          h, StepFunction::indicator(cells, i + 1), StepFunction::indicator(cells, j + 1), tol);
      if (!ip.converged) throw NumericalError("isometry quadrature did not converge");
      const double rhs = covariance(h, lattice[i], lattice[j]);
      worst_isometry = std::max(worst_isometry, std::abs(ip.value - rhs) / std::abs(rhs));
    }
  t.summary.set("c_H", constant_cH(h));
  t.summary.set("max_rel_err", worst);
  t.summary.set("max_isometry_rel_err", worst_isometry);
  t.summary.set("fitted_bound_constant", fit_kernel_bound_constant(h, lattice, tol));
  if (auto lim = tolerance(c, "rel_err")) {
    out.checks.push_back({"rel_err", worst, *lim, worst < *lim});
    out.checks.push_back({"isometry_rel_err", worst_isometry, *lim, worst_isometry < *lim});
  }
  return out;
}

RunResult run_scaling(const ExperimentConfig& c, const ScalingReport& rep, double slope_target,
                      std::optional<double> intercept_target) {
  RunResult out;
  out.table = rep.to_table();
  if (auto tol = tolerance(c, "slope")) {
    const double dev = std::abs(rep.fit.slope - slope_target);
    out.checks.push_back({"slope", dev, *tol, dev < *tol});
  }
  if (intercept_target)
    if (auto tol = tolerance(c, "intercept")) {
      const double dev = std::abs(rep.fit.intercept - *intercept_target);
      out.checks.push_back({"intercept", dev, *tol, dev < *tol});
    }
  return out;
}

RunResult run_selfsim(const ExperimentConfig& c, std::size_t workers) {
  const HurstParam h(c.hurst);
  const std::vector<double> scales = c.scales.empty() ? std::vector<double>{2.0, 4.0} : c.scales;
  const std::size_t cells = c.grid_sizes.back();
  const double alpha = tolerance(c, "alpha").value_or(0.01);
  const double corrected = alpha / static_cast<double>(scales.size());

  RunResult out;
  Table& t = out.table;
  t.columns = {"a", "t", "ks_stat", "p_value", "ks_stat_misscaled", "p_value_misscaled",
               "mean_scaled", "mean_reference"};
  for (std::size_t k = 0; k < scales.size(); ++k) {
    // Each scale gets its own block of seeds.
    const std::uint64_t seed = mix64(c.master_seed + k);
    const auto rep =
        self_similarity_test(c.dimension, h, scales[k], c.time, c.replications, seed, workers,
                             cells, sampler_from_string(c.sampler));
    t.rows.push_back({rep.scale, rep.time, rep.ks.statistic, rep.ks.p_value,
                      rep.ks_misscaled.statistic, rep.ks_misscaled.p_value, rep.mean_scaled,
                      rep.mean_reference});
    if (c.tolerances.contains("alpha")) {
      out.checks.push_back({"ks_same_law_a" + std::to_string(k), rep.ks.p_value, corrected,
                            rep.ks.p_value > corrected});
    }
    if (auto power = tolerance(c, "power_alpha"); power && scales[k] != 1.0)
      out.checks.push_back({"ks_misscaled_rejected_a" + std::to_string(k),
                            rep.ks_misscaled.p_value, *power, rep.ks_misscaled.p_value < *power});
  }
  t.summary.set("bonferroni_threshold", corrected);
  return out;
}

}  // namespace

bool RunResult::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

RunResult run_experiment(const ExperimentConfig& c, std::size_t workers) {
  validate_config(c);
  const HurstParam h(c.hurst);
  const std::string& e = c.experiment;
  const std::string spec = c.spec.empty() ? default_spec(e) : c.spec;

  RunResult out;
  if (e == "fbm-covariance") {
    out = run_fbm_covariance(c, workers);
  } else if (e == "kernel-check") {
    out = run_kernel_check(c);
  } else if (e == "fbm-variation" || e == "ito-variation" || e == "ito-variation-nd" ||
             e == "bessel-variation") {
    const MonteCarloSetup setup = setup_of(c, workers);
    ConvergenceReport rep;
    if (e == "fbm-variation")
      rep = fbm_variation_experiment(h, setup);
    else if (e == "ito-variation")
      rep = ito_variation_experiment(integrand(spec), h, setup);
    else if (e == "ito-variation-nd")
      rep = ito_variation_multi_experiment(multi_integrand(spec), c.dimension, h, setup);
    else
      rep = theta_variation_experiment(c.dimension, h, setup);
    out.table = rep.to_table();
    convergence_checks(c, rep, out.checks);
  } else if (e == "lp-scaling") {
    const MonteCarloSetup setup = setup_of(c, workers);
    const auto intervals = default_lp_intervals(c.horizon);
    out = run_scaling(c, lp_scaling_experiment(integrand(spec), h, setup, intervals), 1.0,
                      std::nullopt);
  } else if (e == "bessel-moments") {
    const std::vector<double> times =
        c.times.empty() ? std::vector<double>{0.25, 0.5, 1.0, 2.0} : c.times;
    const auto rep = negative_moment_experiment(c.dimension, c.q, h, times, c.replications,
                                                c.master_seed, workers,
                                                sampler_from_string(c.sampler));
    out = run_scaling(c, rep, -c.hurst * c.q, rep.summary.at("intercept_target"));
  } else if (e == "bessel-selfsim") {
    out = run_selfsim(c, workers);
  }

  out.experiment = e;
  out.config = to_json(c);
  out.build = build_identifier();
  if (!c.output_path.empty()) write_text_file(c.output_path, render(out, c.format));
  return out;
}

// ---------------------------------------------------------------------------
// Serialisation

namespace {

std::string number(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

double parse_number(std::string_view s) {
  double x = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), x);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw std::invalid_argument("malformed number '" + std::string(s) + "' in CSV");
  return x;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    out.push_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace

std::string to_csv(const RunResult& r) {
  std::ostringstream os;
  os << "# experiment," << r.experiment << '\n';
  os << "# build," << r.build << '\n';
  os << "# config," << r.config.dump() << '\n';
  for (std::size_t i = 0; i < r.table.columns.size(); ++i)
    os << (i ? "," : "") << r.table.columns[i];
  os << '\n';
  for (const auto& row : r.table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << number(row[i]);
    os << '\n';
  }
  for (const auto& [k, v] : r.table.summary.entries()) os << "# summary," << k << ',' << number(v) << '\n';
  for (const auto& ch : r.checks)
    os << "# check," << ch.name << ',' << number(ch.value) << ',' << number(ch.threshold) << ','
       << (ch.passed ? "pass" : "fail") << '\n';
  return os.str();
}

json to_json(const RunResult& r) {
  json rows = json::array();
  for (const auto& row : r.table.rows) rows.push_back(row);
  json summary = json::object();
  for (const auto& [k, v] : r.table.summary.entries()) summary[k] = v;
  json checks = json::array();
  for (const auto& ch : r.checks)
    checks.push_back({{"name", ch.name},
                      {"value", ch.value},
                      {"threshold", ch.threshold},
                      {"passed", ch.passed}});
  return {{"experiment", r.experiment}, {"build", r.build},     {"config", r.config},
          {"columns", r.table.columns}, {"rows", rows},         {"summary", summary},
          {"checks", checks},           {"passed", r.passed()}};
}

std::string render(const RunResult& r, const std::string& format) {
  if (format == "json") return to_json(r).dump(2) + "\n";
  if (format == "csv") return to_csv(r);
  throw std::invalid_argument("format must be csv or json");
}

Table parse_csv_table(const std::string& text) {
  Table t;
  std::istringstream in(text);
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty() || line.front() == '#') continue;
    const auto fields = split(line, ',');
    if (header) {
      for (auto f : fields) t.columns.emplace_back(f);
      header = false;
      continue;
    }
    if (fields.size() != t.columns.size())
      throw std::invalid_argument("CSV row width differs from the header");
    std::vector<double> row;
    for (auto f : fields) row.push_back(parse_number(f));
    t.rows.push_back(std::move(row));
  }
  return t;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

}  // namespace rvl
