#pragma once

#include <cstddef>

#include "rvl/core.h"
#include "rvl/experiment.h"
#include "rvl/report.h"

namespace rvl {

struct VariationResult {
  std::size_t n = 0;
  double q = 0.0;
  double value = 0.0;
};

/// V_n^q(X) = sum_i |X_{t_{i+1}} - X_{t_i}|^q over the path's own grid,
/// summed left to right with compensation.
VariationResult variation_Vnq(const RealPath& path, double q);

struct EHConstant {
  HurstParam h;
  double value;
};

/// e_H = E|Z|^{1/H} = 2^{1/(2H)} Gamma((1/H + 1)/2) / sqrt(pi).
EHConstant e_H(HurstParam h);

/// Absolute Gaussian moment E|Z|^p for p > -1.
double abs_gaussian_moment(double p);

/// L^1 distance between V_n^{1/H}(B) and T e_H for fBm B, per grid size.
ConvergenceReport fbm_variation_experiment(HurstParam h, const MonteCarloSetup& setup);

}  // namespace rvl
