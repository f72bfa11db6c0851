#pragma once

#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rvl/core.h"
#include "rvl/experiment.h"
#include "rvl/report.h"

// Divergence integrals are never discretised directly. For integrands of the
// form f'(B) the Ito formula for the divergence integral,
//
//   f(B_t) = f(0) + int_0^t f'(B_s) dB_s (divergence) + H int_0^t f''(B_s) s^{2H-1} ds,
//
// turns X_t = int_0^t f'(B_s) dB_s into a pathwise functional of B, and the
// same holds coordinatewise for F(B_t) with B d-dimensional.

namespace rvl {

struct SmoothIntegrandSpec {
  std::string label;
  std::function<double(double)> f;
  std::function<double(double)> f_prime;
  std::function<double(double)> f_second;
};

using VectorFunction = std::function<double(std::span<const double>)>;
using VectorField = std::function<void(std::span<const double>, std::span<double>)>;

struct MultiIntegrandSpec {
  std::string label;
  VectorFunction F;
  VectorField gradient;
  VectorFunction laplacian;  // sum_i d^2F/dx_i^2
};

/// Finite-difference consistency of f, f', f'' (resp. F, grad F, Laplacian)
/// on a fixed probe set; throws std::invalid_argument on relative error
/// >= 1e-4.
void validate_integrand(const SmoothIntegrandSpec& spec);
void validate_integrand(const MultiIntegrandSpec& spec, std::size_t dim);

/// Whitelisted integrands, i.e. potentials whose gradients are known to
/// satisfy the Holder hypotheses required for the variation limit (polynomial f).
/// Labels: identity, half-square, cubic, constant.
const SmoothIntegrandSpec& integrand(const std::string& label);
std::vector<std::string> integrand_labels();

/// Labels: half-norm-square (F = |x|^2/2), linear (F = sum_i x_i).
const MultiIntegrandSpec& multi_integrand(const std::string& label);
std::vector<std::string> multi_integrand_labels();

/// Sum over cells i < upto of g(t_{i+1}) times the exact integral of
/// s^{2H-1} over [t_i, t_{i+1}]. g holds one sample per grid node.
double weighted_time_integral(std::span<const double> g, const UniformGrid& grid, HurstParam h,
                              std::size_t upto);

/// Cumulative version: entry k is the integral up to t_k, for a general
/// exponent e > -1 of the weight s^e.
std::vector<double> power_weighted_integral_path(std::span<const double> g,
                                                 const UniformGrid& grid, double exponent);

enum class DivergenceReading {
  plain,     // H in (1/4, 1): the process belongs to the divergence domain
  extended,  // H <= 1/4: only the extended-domain reading applies
};
DivergenceReading divergence_reading(HurstParam h);
const char* to_string(DivergenceReading r);

/// X_t = f(B_t) - f(0) - H int_0^t f''(B_s) s^{2H-1} ds on the path's grid.
RealPath divergence_via_ito(const SmoothIntegrandSpec& spec, const RealPath& path, HurstParam h);

/// X_t = F(B_t) - F(0) - H int_0^t Laplacian F(B_s) s^{2H-1} ds.
RealPath divergence_via_ito_multi(const MultiIntegrandSpec& spec, const MultiPath& path,
                                  HurstParam h);

/// V_n^{1/H}(X) against e_H sum_i |f'(B_{t_{i+1}})|^{1/H} T/n, per path.
ConvergenceReport ito_variation_experiment(const SmoothIntegrandSpec& spec, HurstParam h,
                                       const MonteCarloSetup& setup);

/// Number of standard-normal directions used for the nu-integral per run.
inline constexpr std::size_t default_xi_draws = 10000;

/// Multidimensional version with u = grad F. The limit is computed in closed
/// form, e_H int |u_s|^{1/H} ds, and by Monte Carlo over xi ~ N(0, I); the
/// two must agree within 3 standard errors of the latter at every grid size
/// or the run aborts with NumericalError.
ConvergenceReport ito_variation_multi_experiment(const MultiIntegrandSpec& spec, std::size_t dim,
                                       HurstParam h, const MonteCarloSetup& setup,
                                       std::size_t xi_draws = default_xi_draws);

/// Interval pairs (a, b) on the default L^p scaling lattice: a = T/4 and
/// b - a = T 2^{-k}, k = 5..9.
std::vector<std::pair<double, double>> default_lp_intervals(double horizon);
inline constexpr std::size_t default_lp_grid = 2048;

/// Monte Carlo E|X_b - X_a|^{1/H} for each interval and a log-log regression
/// of it against b - a. Uses the finest grid of `setup`; interval endpoints
/// must be nodes of that grid.
ScalingReport lp_scaling_experiment(const SmoothIntegrandSpec& spec, HurstParam h,
                                    const MonteCarloSetup& setup,
                                    std::span<const std::pair<double, double>> intervals);

}  // namespace rvl
