#pragma once

#include <functional>

namespace rvl {

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  bool converged = true;

  QuadratureResult& operator+=(const QuadratureResult& other) {
    value += other.value;
    error_estimate += other.error_estimate;
    converged = converged && other.converged;
    return *this;
  }
};

/// A point x of [a, b] together with its distances to both ends, computed
/// without cancellation. Integrands with power singularities at the ends must
/// use the distances rather than x - a or b - x.
struct BracketPoint {
  double x;
  double from_left;
  double from_right;
};

using BracketIntegrand = std::function<double(const BracketPoint&)>;

/// Integral over [a, b] of a function with integrable power singularities
/// (x - a)^alpha_left and (b - x)^alpha_right, alpha > -1. Each half of the
/// interval is mapped onto [0, 1] by x - a = c v^{1/(1+alpha)} (and its mirror
/// image), which cancels the leading singularity, and then integrated with
/// adaptive 15-point Gauss-Kronrod to the requested relative tolerance.
/// Nodes never touch either endpoint.
QuadratureResult integrate_endpoint_singular(const BracketIntegrand& f, double a, double b,
                                             double alpha_left, double alpha_right,
                                             double rel_tol);

}  // namespace rvl
