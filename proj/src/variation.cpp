#include "rvl/variation.h"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "rvl/stats.h"

namespace rvl {

VariationResult variation_Vnq(const RealPath& path, double q) {
  if (!(q > 0.0)) throw std::invalid_argument("variation exponent q must be positive");
  CompensatedSum sum;
  for (std::size_t i = 0; i + 1 < path.values.size(); ++i)
    sum.add(std::pow(std::abs(path.values[i + 1] - path.values[i]), q));
  return {path.grid.size(), q, sum.value()};
}

double abs_gaussian_moment(double p) {
  if (!(p > -1.0)) throw std::domain_error("E|Z|^p requires p > -1");
  return std::exp(0.5 * p * std::numbers::ln2 + std::lgamma(0.5 * (p + 1.0)) -
                  0.5 * std::log(std::numbers::pi));
}

EHConstant e_H(HurstParam h) { return {h, abs_gaussian_moment(1.0 / h.value())}; }

ConvergenceReport fbm_variation_experiment(HurstParam h, const MonteCarloSetup& setup) {
  const GridFamily family(h, setup);
  const double q = 1.0 / h.value();
  const double target = setup.horizon * e_H(h).value;

  auto report = run_convergence(setup, [&](std::size_t r) {
    const auto paths = family.sample(1, setup.seed(r));
    std::vector<std::pair<double, double>> out;
    for (const auto& p : paths) out.emplace_back(variation_Vnq(p.column(0), q).value, target);
    return out;
  });
  report.summary.set("e_H", e_H(h).value);
  return report;
}

}  // namespace rvl
