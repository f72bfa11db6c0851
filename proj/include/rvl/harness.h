#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include "json.hpp"
#include <string>
#include <vector>

#include "rvl/fbm.h"
#include "rvl/report.h"

namespace rvl {

/// One experiment invocation. Parsed from a single JSON document in which
/// unknown keys are errors; every field except `experiment` has a default.
struct ExperimentConfig {
  std::string experiment;
  double hurst = 0.3;
  std::size_t dimension = 1;
  double horizon = 1.0;
  std::vector<std::size_t> grid_sizes{64, 256, 1024, 4096};
  std::size_t replications = 200;
  std::uint64_t master_seed = 0;
  std::map<std::string, double> tolerances;
  std::string output_path;
  std::string format = "csv";  // csv | json

  // Experiment-specific knobs.
  std::string spec;                  // integrand label (ito-variation, ito-variation-nd, lp-scaling)
  std::string sampler = "circulant";
  double q = 1.0;                    // bessel-moments exponent
  std::vector<double> times;         // bessel-moments evaluation times
  std::vector<double> scales;        // bessel-selfsim scale factors a
  double time = 0.5;                 // bessel-selfsim reference time t
};

ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::string& path);
nlohmann::json to_json(const ExperimentConfig& config);

/// Registered experiment identifiers.
std::vector<std::string> experiment_names();

/// Range and gate checks for the config; throws GateError (or
/// std::invalid_argument for malformed values) before any sampling.
void validate_config(const ExperimentConfig& config);

struct Check {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool passed = false;
};

struct RunResult {
  std::string experiment;
  Table table;
  std::vector<Check> checks;
  nlohmann::json config;
  std::string build;

  bool passed() const;
};

/// Runs the configured experiment on `workers` threads. The result is a pure
/// function of the config; it is written to config.output_path (when set) in
/// the configured format.
RunResult run_experiment(const ExperimentConfig& config, std::size_t workers);

/// Serialisation. CSV: '#'-prefixed metadata lines, a header, one line per
/// row, then '#'-prefixed summary and check lines. Numbers use the shortest
/// round-trip representation.
std::string to_csv(const RunResult& result);
nlohmann::json to_json(const RunResult& result);
std::string render(const RunResult& result, const std::string& format);

/// Reads back the columns and rows of a CSV report (comment lines skipped).
Table parse_csv_table(const std::string& text);

/// Writes `text` to `path`, throwing std::runtime_error on failure.
void write_text_file(const std::string& path, const std::string& text);

/// Exit status contract of the CLI.
enum ExitCode : int {
  exit_pass = 0,
  exit_tolerance_failure = 1,
  exit_config_error = 2,
  exit_numerical_failure = 3,
};

const char* build_identifier() noexcept;

/// Empirical second moments of sampled paths; the mean is known to be zero,
/// so entry (i, j) is the average of B_{t_i} B_{t_j} and its standard error
/// is the jackknife standard error of that average.
struct EmpiricalCovariance {
  std::size_t n = 0;
  std::vector<double> value;      // n x n, nodes t_1..t_n
  std::vector<double> std_error;  // n x n
};
EmpiricalCovariance empirical_covariance(const FbmSampler& sampler, std::size_t replications,
                                         std::uint64_t master_seed, std::size_t workers);

}  // namespace rvl
