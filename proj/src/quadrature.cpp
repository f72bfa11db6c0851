#include "rvl/quadrature.h"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rvl {

namespace {

constexpr unsigned max_depth = 24;

// x - a = c v^p turns (x - a)^alpha dx into v^{p(1+alpha)-1} dv; p(1+alpha) = 3
// also smooths the weaker companion terms (x - a)^beta, beta > alpha, that
// kernel products carry alongside the leading power. alpha = 0 means no
// endpoint behaviour to remove.
double substitution_power(double alpha) {
  if (!(alpha > -1.0)) throw std::invalid_argument("endpoint exponent must exceed -1");
  return alpha == 0.0 ? 1.0 : std::max(1.0, 3.0 / (1.0 + alpha));
}

}  // namespace

QuadratureResult integrate_endpoint_singular(const BracketIntegrand& f, double a, double b,
                                             double alpha_left, double alpha_right,
                                             double rel_tol) {
  if (!(b > a)) throw std::invalid_argument("integration interval must satisfy a < b");
  const double half = 0.5 * (b - a);
  const double p_left = substitution_power(alpha_left);
  const double p_right = substitution_power(alpha_right);

  using GK = boost::math::quadrature::gauss_kronrod<double, 15>;

  // Left half: x = a + half * v^p.
  auto left = [&](double v) {
    const double vp = std::pow(v, p_left);
    const double d = half * vp;
    const double jac = half * p_left * (p_left == 1.0 ? 1.0 : std::pow(v, p_left - 1.0));
    if (jac == 0.0) return 0.0;  // v^{p-1} underflow: the integrand vanishes there
    return f({a + d, d, (b - a) - d}) * jac;
  };
  // Right half: x = b - half * v^p.
  auto right = [&](double v) {
    const double vp = std::pow(v, p_right);
    const double d = half * vp;
    const double jac = half * p_right * (p_right == 1.0 ? 1.0 : std::pow(v, p_right - 1.0));
    if (jac == 0.0) return 0.0;
    return f({b - d, (b - a) - d, d}) * jac;
  };

  QuadratureResult out;
  for (int side = 0; side < 2; ++side) {
    double err = 0.0;
    double l1 = 0.0;
    const double val = side == 0 ? GK::integrate(left, 0.0, 1.0, max_depth, rel_tol, &err, &l1)
                                 : GK::integrate(right, 0.0, 1.0, max_depth, rel_tol, &err, &l1);
    if (!std::isfinite(val)) throw std::domain_error("non-finite quadrature value");
    const bool ok = err <= 100.0 * rel_tol * l1 || err < 1e-300;
    out += QuadratureResult{val, err, ok};
  }
  return out;
}

}  // namespace rvl
