#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "rvl/core.h"
#include "rvl/quadrature.h"

// Volterra kernel of the rough (H < 1/2) fractional Brownian motion and the
// operator K* acting on step functions. Every function in this header throws
// GateError for H >= 1/2.

namespace rvl {

/// Piecewise-constant function on a grid: coefficient j is the value on
/// [t_j, t_{j+1}).
struct StepFunction {
  UniformGrid grid;
  std::vector<double> coefficients;  // n entries

  StepFunction(UniformGrid g, std::vector<double> a);

  /// 1_{[0, t_k]}.
  static StepFunction indicator(const UniformGrid& grid, std::size_t k);
  static StepFunction constant(const UniformGrid& grid, double value);
  /// Projection of f onto the grid, using the value at each cell midpoint.
  static StepFunction project(const UniformGrid& grid, const std::function<double(double)>& f);

  double operator()(double s) const;
};

inline constexpr double default_kernel_tolerance = 1e-9;

struct KernelConstants {
  double c_h;
  double tol_q;
};

/// c_H = (2H / ((1-2H) Beta(1-2H, H+1/2)))^{1/2}, Beta through log-Gamma.
double constant_cH(HurstParam h);
KernelConstants kernel_constants(HurstParam h, double tol_q = default_kernel_tolerance);

/// Euler Beta function via log-Gamma.
double beta_function(double x, double y);

/// K_H(t,s), 0 < s < t. The inner integral over u in [s, t] is rewritten as
/// s^{2H-1} times the integral of y^{-2H}(1-y)^{H-1/2} over [s/t, 1] and
/// computed with singularity-aware quadrature.
double kernel_K(HurstParam h, double t, double s, double tol = default_kernel_tolerance);

/// Same as kernel_K with the gap t - s supplied separately, for callers that
/// know it more accurately than the difference of the two times.
double kernel_K_gap(HurstParam h, double t, double s, double gap,
                    double tol = default_kernel_tolerance);

/// dK_H/dt(t,s) = c_H (H - 1/2) (t/s)^{H-1/2} (t-s)^{H-3/2}.
double kernel_dKdt(HurstParam h, double t, double s);

/// K*(1_{[0,t]})(s) = K_H(t,s) 1_{[0,t]}(s); s == t is outside the domain.
double kstar_indicator(HurstParam h, double t, double s, double tol = default_kernel_tolerance);

/// K* applied to a step function, by linearity over indicator differences.
/// s must not be a grid node.
double kstar_step(HurstParam h, const StepFunction& phi, double s,
                  double tol = default_kernel_tolerance);

/// <phi, psi>_h = <K* phi, K* psi>_{L^2(0,T)}.
QuadratureResult inner_product_H_detailed(HurstParam h, const StepFunction& phi,
                                          const StepFunction& psi,
                                          double tol = default_kernel_tolerance);
double inner_product_H(HurstParam h, const StepFunction& phi, const StepFunction& psi,
                       double tol = default_kernel_tolerance);

/// ||phi||_K^2: weighted L^2 term (exact per cell) plus the double integral of
/// increments against (t-s)^{H-3/2} (inner integral exact, outer quadrature).
QuadratureResult seminorm_K_squared_detailed(HurstParam h, const StepFunction& phi,
                                             double tol = default_kernel_tolerance);
double seminorm_K(HurstParam h, const StepFunction& phi, double tol = default_kernel_tolerance);

/// dR/ds(s,t) = H (s^{2H-1} + sign(t-s) |t-s|^{2H-1}).
double covariance_ds(HurstParam h, double s, double t);

/// Extended pairing <phi, 1_{[0,t]}> = int_0^T phi(s) dR/ds(s,t) ds. For a
/// step phi the antiderivative of dR/ds in s is R itself, so each cell
/// contributes a_j (R(t_{j+1},t) - R(t_j,t)).
double extended_inner(HurstParam h, const StepFunction& phi, double t);

/// int_0^{min(s,t)} K_H(t,u) K_H(s,u) du.
QuadratureResult kernel_reproduction(HurstParam h, double t, double s,
                                     double tol = default_kernel_tolerance);

/// Smallest D with K_H(t,s) <= D ((t-s)^{H-1/2} + s^{H-1/2}) over all pairs
/// s < t drawn from `times`.
double fit_kernel_bound_constant(HurstParam h, std::span<const double> times,
                                 double tol = default_kernel_tolerance);

}  // namespace rvl
