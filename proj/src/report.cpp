#include "rvl/report.h"

#include <cmath>
#include <stdexcept>

namespace rvl {

void Summary::set(const std::string& key, double value) {
  for (auto& [k, v] : entries_)
    if (k == key) {
      v = value;
      return;
    }
  entries_.emplace_back(key, value);
}

std::optional<double> Summary::find(const std::string& key) const {
  for (const auto& [k, v] : entries_)
    if (k == key) return v;
  return std::nullopt;
}

double Summary::at(const std::string& key) const {
  if (auto v = find(key)) return *v;
  throw std::out_of_range("summary has no entry '" + key + "'");
}

bool ConvergenceReport::trend_decreasing() const {
  for (std::size_t i = 1; i < rows.size(); ++i)
    if (!(rows[i].abs_err < rows[i - 1].abs_err)) return false;
  return !rows.empty();
}

const ConvergenceRow& ConvergenceReport::finest() const {
  if (rows.empty()) throw std::logic_error("empty convergence report");
  return rows.back();
}

Table ConvergenceReport::to_table() const {
  Table t;
  t.columns = {"n", "estimate", "target", "abs_err", "rel_err", "stderr"};
  for (const auto& r : rows)
    t.rows.push_back({static_cast<double>(r.n), r.estimate, r.target, r.abs_err, r.rel_err,
                      r.std_error});
  t.summary = summary;
  t.summary.set("trend_decreasing", trend_decreasing() ? 1.0 : 0.0);
  return t;
}

ConvergenceRow convergence_row(std::size_t n, std::span<const double> statistic,
                               std::span<const double> target) {
  if (statistic.size() != target.size())
    throw std::invalid_argument("statistic and target samples differ in size");
  std::vector<double> dev(statistic.size());
  for (std::size_t i = 0; i < dev.size(); ++i) dev[i] = std::abs(statistic[i] - target[i]);

  const Aggregate s = aggregate(statistic);
  const Aggregate t = aggregate(target);
  const Aggregate e = aggregate(dev);
  ConvergenceRow row;
  row.n = n;
  row.estimate = s.mean;
  row.target = t.mean;
  row.abs_err = e.mean;
  row.rel_err = e.mean / std::abs(t.mean);
  row.std_error = e.std_error.value_or(std::nan(""));
  return row;
}

Table ScalingReport::to_table() const {
  Table t;
  t.columns = {"x", "estimate", "target", "stderr"};
  for (const auto& r : rows) t.rows.push_back({r.x, r.estimate, r.target, r.std_error});
  t.summary = summary;
  t.summary.set("slope", fit.slope);
  t.summary.set("intercept", fit.intercept);
  t.summary.set("r_squared", fit.r_squared);
  return t;
}

}  // namespace rvl
