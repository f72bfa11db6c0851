#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rvl/stats.h"

namespace rvl {

/// Ordered name -> value list for scalar results (fitted slopes, p-values,
/// cross-check targets). Insertion order is the emission order.
class Summary {
 public:
  void set(const std::string& key, double value);
  std::optional<double> find(const std::string& key) const;
  double at(const std::string& key) const;
  const std::vector<std::pair<std::string, double>>& entries() const noexcept { return entries_; }

 private:
  std::vector<std::pair<std::string, double>> entries_;
};

/// Plain numeric table: the unit of CSV/JSON emission.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  Summary summary;
};

struct ConvergenceRow {
  std::size_t n = 0;
  double estimate = 0.0;   // Monte Carlo mean of the statistic
  double target = 0.0;     // Monte Carlo mean of the (per-path) limit
  double abs_err = 0.0;    // Monte Carlo mean of |statistic - limit|
  double rel_err = 0.0;    // abs_err / target
  double std_error = 0.0;  // jackknife standard error of abs_err
};

struct ConvergenceReport {
  std::vector<ConvergenceRow> rows;  // sorted by n
  Summary summary;

  /// abs_err strictly decreasing along the rows.
  bool trend_decreasing() const;
  const ConvergenceRow& finest() const;
  Table to_table() const;
};

/// Builds one row from per-replication statistic and target values.
ConvergenceRow convergence_row(std::size_t n, std::span<const double> statistic,
                               std::span<const double> target);

/// Report of a log-log scaling regression: one row per abscissa.
struct ScalingRow {
  double x = 0.0;
  double estimate = 0.0;
  double target = 0.0;  // NaN when no closed form is available
  double std_error = 0.0;
};

struct ScalingReport {
  std::vector<ScalingRow> rows;
  LinearFit fit;  // log(estimate) against log(x)
  Summary summary;

  Table to_table() const;
};

}  // namespace rvl
