// Command-line front end. Every subcommand except `fbm` builds an
// ExperimentConfig and goes through run_experiment, so a CLI run and a
// `run --config` run with the same settings produce the same report.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "rvl/core.h"
#include "rvl/fbm.h"
#include "rvl/harness.h"
#include "rvl/parallel.h"

namespace {

using rvl::ExperimentConfig;

struct Common {
  std::optional<std::uint64_t> seed;
  std::size_t workers = rvl::default_worker_count();
  std::string out;
  std::string format = "csv";
  std::vector<std::string> checks;  // name=value
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--seed", c.seed, "master seed (fallback: RVL_DEFAULT_SEED, then 0)");
  app->add_option("--workers", c.workers, "worker threads")->check(CLI::PositiveNumber);
  app->add_option("--out", c.out, "output file (default: stdout)");
  app->add_option("--format", c.format, "report format")->check(CLI::IsMember({"csv", "json"}));
}

void add_checks(CLI::App* app, Common& c) {
  app->add_option("--check", c.checks,
                  "acceptance tolerance as name=value (repeatable); a failed check exits 1");
}

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("RVL_DEFAULT_SEED")) {
    try {
      std::size_t used = 0;
      const auto v = std::stoull(env, &used);
      if (used != std::string(env).size()) throw std::invalid_argument("trailing characters");
      return v;
    } catch (const std::exception&) {
      throw std::invalid_argument(std::string("RVL_DEFAULT_SEED is not an unsigned integer: ") +
                                  env);
    }
  }
  return 0;
}

std::map<std::string, double> parse_checks(const std::vector<std::string>& items) {
  std::map<std::string, double> out;
  for (const auto& item : items) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0)
      throw std::invalid_argument("--check expects name=value, got '" + item + "'");
    std::size_t used = 0;
    const std::string value = item.substr(eq + 1);
    double v = 0.0;
    try {
      v = std::stod(value, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != value.size())
      throw std::invalid_argument("--check value is not a number: '" + item + "'");
    out[item.substr(0, eq)] = v;
  }
  return out;
}

void emit(const std::string& text, const std::string& out) {
  if (out.empty())
    std::cout << text;
  else
    rvl::write_text_file(out, text);
}

int finish(const rvl::RunResult& result, const std::string& format, const std::string& out) {
  emit(rvl::render(result, format), out);
  for (const auto& c : result.checks)
    if (!c.passed)
      std::cerr << "rvl: check " << c.name << " failed: " << c.value << " vs " << c.threshold
                << '\n';
  return result.passed() ? rvl::exit_pass : rvl::exit_tolerance_failure;
}

int run_config(ExperimentConfig cfg, const Common& common) {
  cfg.format = common.format;
  cfg.tolerances = parse_checks(common.checks);
  // The report goes through emit() so that stdout works too.
  cfg.output_path.clear();
  return finish(rvl::run_experiment(cfg, common.workers), cfg.format, common.out);
}

std::string path_csv(const rvl::MultiPath& p) {
  std::ostringstream os;
  os.precision(17);
  os << 't';
  if (p.dim == 1) {
    os << ",value";
  } else {
    for (std::size_t j = 0; j < p.dim; ++j) os << ",v" << j + 1;
  }
  os << '\n';
  for (std::size_t i = 0; i <= p.grid.size(); ++i) {
    os << p.grid.node(i);
    for (double v : p.row(i)) os << ',' << v;
    os << '\n';
  }
  return os.str();
}

std::string path_json(const rvl::MultiPath& p) {
  nlohmann::json j;
  std::vector<double> t;
  for (std::size_t i = 0; i <= p.grid.size(); ++i) t.push_back(p.grid.node(i));
  j["t"] = t;
  for (std::size_t k = 0; k < p.dim; ++k) j["values"].push_back(p.column(k).values);
  return j.dump() + "\n";
}

int dispatch(int argc, char** argv) {
  CLI::App app{"Rough-path variation lab: fBm sampling, kernel checks and Monte Carlo "
               "convergence experiments"};
  app.require_subcommand(1);

  // fbm
  Common fbm_common;
  double fbm_hurst = 0.3, fbm_horizon = 1.0;
  std::size_t fbm_n = 1024, fbm_dim = 1, fbm_replication = 0;
  std::string fbm_sampler = "circulant";
  auto* fbm = app.add_subcommand("fbm", "sample one fBm path and write it as CSV");
  add_common(fbm, fbm_common);
  fbm->add_option("--hurst", fbm_hurst, "Hurst parameter in (0, 1)");
  fbm->add_option("--horizon", fbm_horizon, "time horizon T");
  fbm->add_option("--n", fbm_n, "number of grid cells")->check(CLI::PositiveNumber);
  fbm->add_option("--dim", fbm_dim, "dimension d")->check(CLI::PositiveNumber);
  fbm->add_option("--replication", fbm_replication, "replication index within the seed");
  fbm->add_option("--sampler", fbm_sampler, "cholesky or circulant")->check(CLI::IsMember({"cholesky", "circulant"}));

  // variation
  Common var_common;
  ExperimentConfig var_cfg;
  var_cfg.experiment = "fbm-variation";
  auto* variation = app.add_subcommand("variation", "1/H-variation of fBm against e_H T");
  add_common(variation, var_common);
  add_checks(variation, var_common);
  variation->add_option("--hurst", var_cfg.hurst, "Hurst parameter");
  variation->add_option("--horizon", var_cfg.horizon, "time horizon T");
  variation->add_option("--grids", var_cfg.grid_sizes, "grid sizes, ascending")->delimiter(',');
  variation->add_option("--paths", var_cfg.replications, "Monte Carlo replications M");
  variation->add_option("--sampler", var_cfg.sampler, "cholesky or circulant");

  // ito-check
  Common ito_common;
  ExperimentConfig ito_cfg;
  bool lp = false;
  auto* ito = app.add_subcommand(
      "ito-check", "variation of divergence integrals (d = 1 or d > 1), or L^p scaling");
  add_common(ito, ito_common);
  add_checks(ito, ito_common);
  ito->add_option("--hurst", ito_cfg.hurst, "Hurst parameter");
  ito->add_option("--horizon", ito_cfg.horizon, "time horizon T");
  ito->add_option("--spec", ito_cfg.spec, "registered integrand label");
  ito->add_option("--dim", ito_cfg.dimension, "dimension d");
  ito->add_option("--grids", ito_cfg.grid_sizes, "grid sizes, ascending")->delimiter(',');
  ito->add_option("--paths", ito_cfg.replications, "Monte Carlo replications M");
  ito->add_option("--sampler", ito_cfg.sampler, "cholesky or circulant");
  ito->add_flag("--lp-scaling", lp, "E|X_b - X_a|^{1/H} against b - a on the finest grid");

  // bessel
  Common bes_common;
  ExperimentConfig bes_cfg;
  bes_cfg.dimension = 3;
  std::string bes_kind = "variation";
  auto* bessel = app.add_subcommand("bessel", "fractional Bessel process experiments");
  add_common(bessel, bes_common);
  add_checks(bessel, bes_common);
  bessel->add_option("--experiment", bes_kind)
      ->check(CLI::IsMember({"variation", "moments", "selfsim"}));
  bessel->add_option("--dim", bes_cfg.dimension, "dimension d");
  bessel->add_option("--hurst", bes_cfg.hurst, "Hurst parameter");
  bessel->add_option("--horizon", bes_cfg.horizon, "time horizon T");
  bessel->add_option("--grids", bes_cfg.grid_sizes, "grid sizes, ascending")->delimiter(',');
  bessel->add_option("--paths", bes_cfg.replications, "Monte Carlo replications M");
  bessel->add_option("--sampler", bes_cfg.sampler, "cholesky or circulant");
  bessel->add_option("--q", bes_cfg.q, "negative moment order (moments)");
  bessel->add_option("--times", bes_cfg.times, "evaluation times (moments)")->delimiter(',');
  bessel->add_option("--scales", bes_cfg.scales, "scale factors a (selfsim)")->delimiter(',');
  bessel->add_option("--time", bes_cfg.time, "reference time t (selfsim)");

  // kernel-check
  Common ker_common;
  ExperimentConfig ker_cfg;
  ker_cfg.experiment = "kernel-check";
  std::optional<double> ker_tol;
  std::optional<double> ker_max_rel;
  auto* kernel = app.add_subcommand("kernel-check", "K_H reproduction of R_H on a 5x5 lattice");
  add_common(kernel, ker_common);
  kernel->add_option("--hurst", ker_cfg.hurst, "Hurst parameter");
  kernel->add_option("--horizon", ker_cfg.horizon, "time horizon T");
  kernel->add_option("--tol", ker_tol, "quadrature tolerance");
  kernel->add_option("--max-rel-err", ker_max_rel, "fail (exit 1) above this relative error");

  // run
  Common run_common;
  std::string config_path;
  auto* run = app.add_subcommand("run", "run an experiment described by a JSON config");
  run->add_option("--config", config_path, "JSON config file")->required();
  run->add_option("--seed", run_common.seed, "overrides master_seed");
  run->add_option("--workers", run_common.workers, "worker threads")->check(CLI::PositiveNumber);
  run->add_option("--out", run_common.out, "overrides output_path");
  run->add_option("--format", run_common.format, "report format")->check(CLI::IsMember({"csv", "json"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? rvl::exit_pass : rvl::exit_config_error;
  }

  if (fbm->parsed()) {
    const rvl::UniformGrid grid(fbm_horizon, fbm_n);
    const rvl::FbmSampler sampler(rvl::HurstParam(fbm_hurst), grid,
                                  rvl::sampler_from_string(fbm_sampler));
    const auto path =
        sampler.sample_multi(fbm_dim, {resolve_seed(fbm_common.seed), fbm_replication});
    emit(fbm_common.format == "json" ? path_json(path) : path_csv(path), fbm_common.out);
    return rvl::exit_pass;
  }
  if (variation->parsed()) {
    var_cfg.master_seed = resolve_seed(var_common.seed);
    return run_config(var_cfg, var_common);
  }
  if (ito->parsed()) {
    ito_cfg.experiment = lp ? "lp-scaling" : ito_cfg.dimension > 1 ? "ito-variation-nd" : "ito-variation";
    if (lp && !ito->count("--grids")) ito_cfg.grid_sizes = {2048};
    ito_cfg.master_seed = resolve_seed(ito_common.seed);
    return run_config(ito_cfg, ito_common);
  }
  if (bessel->parsed()) {
    bes_cfg.experiment = "bessel-" + bes_kind;
    if (bes_kind == "selfsim" && !bessel->count("--grids")) bes_cfg.grid_sizes = {256};
    bes_cfg.master_seed = resolve_seed(bes_common.seed);
    return run_config(bes_cfg, bes_common);
  }
  if (kernel->parsed()) {
    ker_cfg.master_seed = resolve_seed(ker_common.seed);
    if (ker_tol) ker_cfg.tolerances["quadrature"] = *ker_tol;
    if (ker_max_rel) ker_cfg.tolerances["rel_err"] = *ker_max_rel;
    ker_cfg.format = ker_common.format;
    return finish(rvl::run_experiment(ker_cfg, ker_common.workers), ker_cfg.format,
                  ker_common.out);
  }

  // run --config
  std::ifstream in(config_path);
  if (!in) throw std::invalid_argument("cannot open config file '" + config_path + "'");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("config file is not valid JSON: " + std::string(e.what()));
  }
  if (run_common.seed || (doc.is_object() && !doc.contains("master_seed")))
    doc["master_seed"] = resolve_seed(run_common.seed);
  ExperimentConfig cfg = rvl::parse_config(doc);
  if (run->count("--format")) cfg.format = run_common.format;
  if (!run_common.out.empty()) cfg.output_path = run_common.out;
  const rvl::RunResult result = rvl::run_experiment(cfg, run_common.workers);
  if (cfg.output_path.empty()) std::cout << rvl::render(result, cfg.format);
  for (const auto& c : result.checks)
    if (!c.passed)
      std::cerr << "rvl: check " << c.name << " failed: " << c.value << " vs " << c.threshold
                << '\n';
  return result.passed() ? rvl::exit_pass : rvl::exit_tolerance_failure;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return dispatch(argc, argv);
  } catch (const rvl::GateError& e) {
    std::cerr << "rvl: gate: " << e.what() << '\n';
    return rvl::exit_config_error;
  } catch (const rvl::NumericalError& e) {
    std::cerr << "rvl: numerical failure: " << e.what() << '\n';
    return rvl::exit_numerical_failure;
  } catch (const std::invalid_argument& e) {
    std::cerr << "rvl: configuration: " << e.what() << '\n';
    return rvl::exit_config_error;
  } catch (const std::domain_error& e) {
    std::cerr << "rvl: numerical failure: " << e.what() << '\n';
    return rvl::exit_numerical_failure;
  } catch (const std::exception& e) {
    std::cerr << "rvl: " << e.what() << '\n';
    return rvl::exit_config_error;
  }
}
