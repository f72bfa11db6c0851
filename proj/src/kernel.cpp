#include "rvl/kernel.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rvl/fbm.h"

namespace rvl {

StepFunction::StepFunction(UniformGrid g, std::vector<double> a)
    : grid(g), coefficients(std::move(a)) {
  if (coefficients.size() != grid.size())
    throw std::invalid_argument("step function needs one coefficient per grid cell");
}

StepFunction StepFunction::indicator(const UniformGrid& grid, std::size_t k) {
  if (k > grid.size()) throw std::out_of_range("indicator end node out of range");
  std::vector<double> a(grid.size(), 0.0);
  std::fill_n(a.begin(), k, 1.0);
  return {grid, std::move(a)};
}

StepFunction StepFunction::constant(const UniformGrid& grid, double value) {
  return {grid, std::vector<double>(grid.size(), value)};
}

StepFunction StepFunction::project(const UniformGrid& grid,
                                   const std::function<double(double)>& f) {
  std::vector<double> a(grid.size());
  for (std::size_t j = 0; j < a.size(); ++j) a[j] = f(0.5 * (grid.node(j) + grid.node(j + 1)));
  return {grid, std::move(a)};
}

double StepFunction::operator()(double s) const {
  if (s < 0.0 || s >= grid.horizon()) return 0.0;
  const auto j = std::min(grid.size() - 1, static_cast<std::size_t>(s / grid.step()));
  return coefficients[j];
}

double beta_function(double x, double y) {
  return std::exp(std::lgamma(x) + std::lgamma(y) - std::lgamma(x + y));
}

double constant_cH(HurstParam h) {
  h.require_rough("constant_cH");
  const double H = h.value();
  return std::sqrt(2.0 * H / ((1.0 - 2.0 * H) * beta_function(1.0 - 2.0 * H, H + 0.5)));
}

KernelConstants kernel_constants(HurstParam h, double tol_q) {
  if (!(tol_q > 0.0)) throw std::invalid_argument("quadrature tolerance must be positive");
  return {constant_cH(h), tol_q};
}

namespace {

void check_tolerance(const QuadratureResult& r, const char* what) {
  if (!r.converged) {
    std::ostringstream msg;
    msg << what << ": quadrature did not converge (value " << r.value << ", error estimate "
        << r.error_estimate << ")";
    throw NumericalError(msg.str());
  }
}

// J(z) = integral of y^{-2H} (1-y)^{H-1/2} over [z, 1], with w = 1 - z passed
// separately. Every piece is arranged so that its singularities sit exactly at
// an endpoint of the piece:
//   w <= 1/2: in r = 1 - y, r^{H-1/2} (z + dist-to-right)^{-2H} on [0, w];
//   w >  1/2: [1/2, 1] in r as above, plus [z, 1/2] in y, taken directly when
//             z >= 1/4 and as [0, 1/2] minus [0, z] otherwise.
double tail_integral(double H, double z, double w, double tol) {
  QuadratureResult total;
  const auto in_r = [H](double right_end_y) {
    return [H, right_end_y](const BracketPoint& p) {
      return std::pow(p.from_left, H - 0.5) * std::pow(right_end_y + p.from_right, -2.0 * H);
    };
  };
  const auto in_y = [H](const BracketPoint& p) {
    return std::pow(p.x, -2.0 * H) * std::pow(1.0 - p.x, H - 0.5);
  };
  if (w <= 0.5) {
    total += integrate_endpoint_singular(in_r(z), 0.0, w, H - 0.5, 0.0, tol);
  } else {
    total += integrate_endpoint_singular(in_r(0.5), 0.0, 0.5, H - 0.5, 0.0, tol);
    if (z >= 0.25) {
      total += integrate_endpoint_singular(in_y, z, 0.5, 0.0, 0.0, tol);
    } else {
      // Integral over [0, x] of y^{-2H}(1-y)^{H-1/2}: the y^{-2H} part is taken
      // in closed form, leaving y^{-2H}((1-y)^{H-1/2} - 1) ~ y^{1-2H}. As H -> 1/2
      // the raw singularity is too close to non-integrable for quadrature.
      const auto remainder = [H](const BracketPoint& p) {
        const double y = p.from_left;
        return std::pow(y, -2.0 * H) * std::expm1((H - 0.5) * std::log1p(-y));
      };
      const auto from_zero = [&](double x) {
        QuadratureResult r = integrate_endpoint_singular(remainder, 0.0, x, 1.0 - 2.0 * H, 0.0, tol);
        r.value += std::pow(x, 1.0 - 2.0 * H) / (1.0 - 2.0 * H);
        return r;
      };
      total += from_zero(0.5);
      QuadratureResult head = from_zero(z);
      head.value = -head.value;
      total += head;
    }
  }
  check_tolerance(total, "kernel_K");
  return total.value;
}

// Shared evaluation of K(t_{j+1}, s) for all j >= m, where s lies in cell m at
// distance dr from its right end.
std::vector<double> kernel_column(HurstParam h, const UniformGrid& grid, std::size_t m, double s,
                                  double dr, double tol) {
  const std::size_t n = grid.size();
  std::vector<double> k(n - m);
  const double right = grid.node(m + 1);
  for (std::size_t j = m; j < n; ++j) {
    const double t = grid.node(j + 1);
    k[j - m] = kernel_K_gap(h, t, s, (t - right) + dr, tol);
  }
  return k;
}

double apply_kstar(const StepFunction& phi, std::size_t m, std::span<const double> kcol) {
  const auto& a = phi.coefficients;
  const std::size_t n = a.size();
  double v = a[n - 1] * kcol[n - 1 - m];
  for (std::size_t j = m; j + 1 < n; ++j) v += (a[j] - a[j + 1]) * kcol[j - m];
  return v;
}

bool vanishes_from(const StepFunction& phi, std::size_t m) {
  return std::all_of(phi.coefficients.begin() + static_cast<std::ptrdiff_t>(m),
                     phi.coefficients.end(), [](double x) { return x == 0.0; });
}

std::size_t cell_of(const UniformGrid& grid, double s) {
  if (!(s > 0.0 && s < grid.horizon()))
    throw std::domain_error("K* evaluation point must lie in (0, T)");
  const auto m = std::min(grid.size() - 1, static_cast<std::size_t>(s / grid.step()));
  if (s == grid.node(m) || s == grid.node(m + 1))
    throw std::domain_error("K* evaluation point must not be a grid node");
  return m;
}

}  // namespace

double kernel_K_gap(HurstParam h, double t, double s, double gap, double tol) {
  h.require_rough("kernel_K");
  // s may round to t when the gap is passed separately and is tiny.
  if (!(s > 0.0) || !(gap > 0.0) || !(t >= s))
    throw std::domain_error("kernel_K requires 0 < s < t");
  const double H = h.value();
  const double c = constant_cH(h);
  const double ratio = s / t;
  const double w = gap / t;
  const double direct = std::pow(1.0 / ratio, H - 0.5) * std::pow(gap, H - 0.5);
  const double integral = std::pow(s, H - 0.5) * tail_integral(H, ratio, w, tol);
  return c * (direct + (0.5 - H) * integral);
}

double kernel_K(HurstParam h, double t, double s, double tol) {
  return kernel_K_gap(h, t, s, t - s, tol);
}

double kernel_dKdt(HurstParam h, double t, double s) {
  h.require_rough("kernel_dKdt");
  if (!(s > 0.0) || !(t > s)) throw std::domain_error("kernel_dKdt requires 0 < s < t");
  const double H = h.value();
  return constant_cH(h) * (H - 0.5) * std::pow(t / s, H - 0.5) * std::pow(t - s, H - 1.5);
}

double kstar_indicator(HurstParam h, double t, double s, double tol) {
  h.require_rough("kstar_indicator");
  if (!(s > 0.0)) throw std::domain_error("kstar_indicator requires s > 0");
  if (s == t) throw std::domain_error("kstar_indicator is undefined at s == t");
  return s < t ? kernel_K(h, t, s, tol) : 0.0;
}

double kstar_step(HurstParam h, const StepFunction& phi, double s, double tol) {
  h.require_rough("kstar_step");
  const std::size_t m = cell_of(phi.grid, s);
  if (vanishes_from(phi, m)) return 0.0;
  const auto kcol = kernel_column(h, phi.grid, m, s, phi.grid.node(m + 1) - s, tol);
  return apply_kstar(phi, m, kcol);
}

QuadratureResult inner_product_H_detailed(HurstParam h, const StepFunction& phi,
                                          const StepFunction& psi, double tol) {
  h.require_rough("inner_product_H");
  if (!(phi.grid == psi.grid)) throw std::invalid_argument("step functions must share a grid");
  const UniformGrid& grid = phi.grid;
  const double H = h.value();

  QuadratureResult total;
  for (std::size_t m = 0; m < grid.size(); ++m) {
    if (vanishes_from(phi, m) || vanishes_from(psi, m)) continue;
    const double left = grid.node(m);
    const auto f = [&](const BracketPoint& p) {
      const double s = m == 0 ? p.from_left : left + p.from_left;
      const auto kcol = kernel_column(h, grid, m, s, p.from_right, tol);
      return apply_kstar(phi, m, kcol) * apply_kstar(psi, m, kcol);
    };
    const double alpha_left = m == 0 ? 2.0 * H - 1.0 : 0.0;
    total += integrate_endpoint_singular(f, left, grid.node(m + 1), alpha_left, 2.0 * H - 1.0,
                                         10.0 * tol);
  }
  return total;
}

double inner_product_H(HurstParam h, const StepFunction& phi, const StepFunction& psi,
                       double tol) {
  const QuadratureResult r = inner_product_H_detailed(h, phi, psi, tol);
  check_tolerance(r, "inner_product_H");
  return r.value;
}

QuadratureResult seminorm_K_squared_detailed(HurstParam h, const StepFunction& phi, double tol) {
  h.require_rough("seminorm_K");
  const UniformGrid& grid = phi.grid;
  const std::size_t n = grid.size();
  const double H = h.value();
  const double T = grid.horizon();
  const auto& a = phi.coefficients;

  // Weighted L^2 term, exact per cell.
  double weighted = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double lo = grid.node(j);
    const double hi = grid.node(j + 1);
    const double w = (std::pow(hi, 2.0 * H) - std::pow(lo, 2.0 * H)) +
                     (std::pow(T - lo, 2.0 * H) - std::pow(T - hi, 2.0 * H));
    weighted += a[j] * a[j] * w / (2.0 * H);
  }

  // For s in cell m: sum over later cells of |a_j - a_m| times the exact
  // integral of (t-s)^{H-3/2} over [t_j, t_{j+1}].
  QuadratureResult increments;
  for (std::size_t m = 0; m + 1 < n; ++m) {
    bool flat = true;
    for (std::size_t j = m + 1; j < n; ++j) flat = flat && a[j] == a[m];
    if (flat) continue;
    const double right = grid.node(m + 1);
    const auto f = [&](const BracketPoint& p) {
      double inner = 0.0;
      for (std::size_t j = m + 1; j < n; ++j) {
        const double jump = std::abs(a[j] - a[m]);
        if (jump == 0.0) continue;
        const double near = (grid.node(j) - right) + p.from_right;
        const double far = (grid.node(j + 1) - right) + p.from_right;
        inner += jump * (std::pow(near, H - 0.5) - std::pow(far, H - 0.5)) / (0.5 - H);
      }
      return inner * inner;
    };
    increments += integrate_endpoint_singular(f, grid.node(m), right, 0.0, 2.0 * H - 1.0, tol);
  }
  increments.value += weighted;
  return increments;
}

double seminorm_K(HurstParam h, const StepFunction& phi, double tol) {
  const QuadratureResult r = seminorm_K_squared_detailed(h, phi, tol);
  check_tolerance(r, "seminorm_K");
  return std::sqrt(std::max(0.0, r.value));
}

double covariance_ds(HurstParam h, double s, double t) {
  const double H = h.value();
  const double d = t - s;
  const double sign = d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0);
  const double cross = sign == 0.0 ? 0.0 : sign * std::pow(std::abs(d), 2.0 * H - 1.0);
  return H * (std::pow(s, 2.0 * H - 1.0) + cross);
}

double extended_inner(HurstParam h, const StepFunction& phi, double t) {
  if (t < 0.0) throw std::domain_error("extended_inner requires t >= 0");
  const UniformGrid& grid = phi.grid;
  double acc = 0.0;
  double prev = covariance(h, 0.0, t);
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double next = covariance(h, grid.node(j + 1), t);
    acc += phi.coefficients[j] * (next - prev);
    prev = next;
  }
  return acc;
}

QuadratureResult kernel_reproduction(HurstParam h, double t, double s, double tol) {
  h.require_rough("kernel_reproduction");
  if (!(t > 0.0 && s > 0.0)) throw std::domain_error("kernel_reproduction requires t, s > 0");
  const double lo = std::min(t, s);
  const double hi = std::max(t, s);
  const double H = h.value();
  const auto f = [&](const BracketPoint& p) {
    const double u = p.from_left;
    const double k_lo = kernel_K_gap(h, lo, u, p.from_right, tol);
    const double k_hi = kernel_K_gap(h, hi, u, (hi - lo) + p.from_right, tol);
    return k_lo * k_hi;
  };
  return integrate_endpoint_singular(f, 0.0, lo, 2.0 * H - 1.0, 2.0 * H - 1.0, 10.0 * tol);
}

double fit_kernel_bound_constant(HurstParam h, std::span<const double> times, double tol) {
  h.require_rough("fit_kernel_bound_constant");
  const double H = h.value();
  double d = 0.0;
  for (double t : times)
    for (double s : times) {
      if (!(s > 0.0 && s < t)) continue;
      const double bound = std::pow(t - s, H - 0.5) + std::pow(s, H - 0.5);
      d = std::max(d, kernel_K(h, t, s, tol) / bound);
    }
  return d;
}

}  // namespace rvl
