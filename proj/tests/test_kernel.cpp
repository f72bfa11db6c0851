#include <algorithm>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "rvl/fbm.h"
#include "rvl/kernel.h"

using namespace rvl;

namespace {

// K_H through the regularised incomplete Beta function: the inner integral is
// s^{2H-1} B(1-2H, H+1/2) I_{1-s/t}(H+1/2, 1-2H).
double kernel_oracle(double H, double t, double s) {
  const double c = std::sqrt(2.0 * H / ((1.0 - 2.0 * H) * boost::math::beta(1.0 - 2.0 * H, H + 0.5)));
  const double J = boost::math::beta(1.0 - 2.0 * H, H + 0.5) *
                   boost::math::ibetac(1.0 - 2.0 * H, H + 0.5, s / t);
  return c * (std::pow(t / s, H - 0.5) * std::pow(t - s, H - 0.5) +
              (0.5 - H) * std::pow(s, H - 0.5) * J);
}

double relerr(double a, double b) { return std::abs(a - b) / std::abs(b); }

StepFunction random_step(const UniformGrid& g, std::mt19937_64& gen) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> a(g.size());
  for (auto& x : a) x = u(gen);
  return {g, a};
}

}  // namespace

TEST_CASE("c_H matches a numerical Beta integral") {
  boost::math::quadrature::tanh_sinh<double> ts;
  for (double H : {0.1, 0.25, 0.3, 0.45}) {
    const double x = 1.0 - 2.0 * H, y = H + 0.5;
    // Two-argument form: tc is the signed distance to the nearer endpoint,
    // so 1 - t is available without cancellation.
    const double beta = ts.integrate(
        [&](double t, double tc) {
          const double one_minus_t = tc > 0 ? tc : 1.0 - t;
          const double tt = tc < 0 ? -tc : t;
          return std::pow(tt, x - 1) * std::pow(one_minus_t, y - 1);
        },
        0.0, 1.0);
    CHECK(relerr(beta_function(x, y), beta) < 1e-12);
    const double want = std::sqrt(2.0 * H / ((1.0 - 2.0 * H) * beta));
    CHECK(relerr(constant_cH(HurstParam(H)), want) < 1e-12);
  }
  // h = 1/4: c_H = Beta(1/2, 3/4)^{-1/2}.
  const double b = std::tgamma(0.5) * std::tgamma(0.75) / std::tgamma(1.25);
  CHECK(relerr(constant_cH(HurstParam(0.25)), 1.0 / std::sqrt(b)) < 1e-13);
  const auto k = kernel_constants(HurstParam(0.3), 1e-7);
  CHECK(k.tol_q == 1e-7);
  CHECK(k.c_h == constant_cH(HurstParam(0.3)));
}

TEST_CASE("c_H as H approaches 1/2") {
  // (1-2H) Beta(1-2H, H+1/2) = Gamma(2-2H) Gamma(H+1/2) / Gamma(3/2-H) -> 1,
  // so c_H increases to sqrt(2 * 1/2) = 1 rather than diverging.
  double previous = 0.0;
  for (double H : {0.3, 0.45, 0.49, 0.499}) {
    const double c = constant_cH(HurstParam(H));
    const double oracle = std::sqrt(2.0 * H * std::tgamma(1.5 - H) / (std::tgamma(2.0 - 2.0 * H) * std::tgamma(H + 0.5)));
    CHECK(relerr(c, oracle) < 1e-12);
    CHECK(c > previous);
    CHECK(c < 1.0);
    previous = c;
  }
  CHECK(std::abs(previous - 1.0) < 2e-3);
  CHECK_THROWS_AS(constant_cH(HurstParam(0.5)), GateError);
}

TEST_CASE("kernel_K against the incomplete Beta oracle") {
  for (double H : {0.1, 0.2, 0.3, 0.4, 0.49})
    for (auto [t, s] : {std::pair{1.0, 0.37}, {1.0, 1e-6}, {1.0, 0.999999}, {2.5, 0.1}, {0.3, 0.2}}) {
      INFO("H=" << H << " t=" << t << " s=" << s);
      CHECK(relerr(kernel_K(HurstParam(H), t, s), kernel_oracle(H, t, s)) < 1e-9);
    }
}

TEST_CASE("kernel_K domain and gate") {
  const HurstParam h(0.3);
  CHECK_THROWS_AS(kernel_K(h, 1.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(kernel_K(h, 1.0, 1.5), std::domain_error);
  CHECK_THROWS_AS(kernel_K(h, 1.0, 0.0), std::domain_error);
  CHECK_THROWS_AS(kernel_K(HurstParam(0.5), 1.0, 0.5), GateError);
  CHECK_THROWS_AS(kernel_dKdt(h, 1.0, 1.0), std::domain_error);
}

TEST_CASE("near-diagonal singularity has exponent H - 1/2") {
  const HurstParam h(0.3);
  const double c = constant_cH(h);
  double previous = 1e300;
  for (double eps : {1e-2, 1e-4, 1e-6, 1e-8}) {
    const double scaled = kernel_K(h, 1.0, 1.0 - eps) * std::pow(eps, 0.5 - 0.3);
    const double gap = std::abs(scaled - c);
    CHECK(gap < previous);
    previous = gap;
  }
  CHECK(previous < 1e-4 * c);
}

TEST_CASE("kernel scaling K(at, as) = a^{H-1/2} K(t, s)") {
  const HurstParam h(0.3);
  for (double a : {2.0, 5.0})
    for (auto [t, s] : {std::pair{1.0, 0.5}, {0.7, 0.1}, {0.4, 0.39}}) {
      CHECK(relerr(kernel_K(h, a * t, a * s), std::pow(a, -0.2) * kernel_K(h, t, s)) < 1e-8);
    }
}

TEST_CASE("kernel reproduces the covariance") {
  CHECK(std::abs(kernel_reproduction(HurstParam(0.3), 1.0, 1.0).value - 1.0) < 1e-6);
  for (double H : {0.2, 0.3, 0.4}) {
    const HurstParam h(H);
    for (int i = 1; i <= 5; ++i)
      for (int j = 1; j <= 5; ++j) {
        const double t = 0.2 * i, s = 0.2 * j;
        const auto r = kernel_reproduction(h, t, s);
        CHECK(r.converged);
        CHECK(relerr(r.value, covariance(h, t, s)) < 1e-4);
      }
  }
}

TEST_CASE("dK/dt: sign, finite difference and the first estimate") {
  const HurstParam h3(0.3);
  const double fd = (kernel_K(h3, 1.0 + 1e-6, 0.5) - kernel_K(h3, 1.0, 0.5)) / 1e-6;
  CHECK(relerr(fd, kernel_dKdt(h3, 1.0, 0.5)) < 1e-4);

  for (double H : {0.2, 0.3, 0.4}) {
    const HurstParam h(H);
    const double c = constant_cH(h);
    for (double t : {0.2, 0.5, 1.0, 3.0})
      for (double s : {0.01, 0.1, 0.19, 0.49, 0.9, 2.5}) {
        if (!(s < t)) continue;
        const double d = kernel_dKdt(h, t, s);
        CHECK(d < 0.0);
        CHECK(std::abs(d) * std::pow(t - s, 1.5 - H) <= c * std::pow(t / s, H - 0.5) * (1 + 1e-12));
        CHECK(std::abs(d) <= c * std::pow(t - s, H - 1.5));
      }
  }
}

TEST_CASE("structural bound K <= D ((t-s)^{H-1/2} + s^{H-1/2})") {
  const HurstParam h(0.3);
  const std::vector<double> times{0.05, 0.1, 0.2, 0.4, 0.6, 0.8, 1.0};
  const double D = fit_kernel_bound_constant(h, times);
  CHECK(std::isfinite(D));
  CHECK(D > 0.0);
  for (double t : times)
    for (double s : times)
      if (s < t)
        CHECK(kernel_K(h, t, s) <= D * (std::pow(t - s, -0.2) + std::pow(s, -0.2)) * (1 + 1e-12));
}

TEST_CASE("K* on indicators and step functions") {
  const HurstParam h(0.3);
  CHECK(kstar_indicator(h, 0.5, 0.7) == 0.0);
  CHECK(kstar_indicator(h, 0.5, 0.3) == kernel_K(h, 0.5, 0.3));

  const UniformGrid g(1.0, 8);
  const double s = 0.3;  // inside cell 2
  // 1_{[a,b]} = 1_{[0,b]} - 1_{[0,a]}.
  std::vector<double> band(8, 0.0);
  for (std::size_t j = 3; j < 6; ++j) band[j] = 1.0;
  const double direct = kstar_step(h, StepFunction(g, band), 0.1);
  CHECK(relerr(direct, kstar_indicator(h, 0.75, 0.1) - kstar_indicator(h, 0.375, 0.1)) < 1e-12);

  CHECK(kstar_step(h, StepFunction::indicator(g, 5), s) == doctest::Approx(kstar_indicator(h, 0.625, s)).epsilon(1e-14));
  CHECK(relerr(kstar_step(h, StepFunction::constant(g, 1.0), s), kernel_K(h, 1.0, s)) < 1e-14);
  CHECK(kstar_step(h, StepFunction::constant(g, 0.0), s) == 0.0);
  CHECK_THROWS_AS(kstar_step(h, StepFunction::constant(g, 1.0), 0.25), std::domain_error);
}

TEST_CASE("isometry: <1_[0,t], 1_[0,s]>_h = R_H(t,s)") {
  const HurstParam h(0.3);
  const UniformGrid g(1.0, 4);
  const double ip = inner_product_H(h, StepFunction::indicator(g, 3), StepFunction::indicator(g, 2));
  CHECK(relerr(ip, covariance(h, 0.75, 0.5)) < 1e-4);

  std::mt19937_64 gen(11);
  const UniformGrid g5(1.0, 5);
  for (int k = 0; k < 6; ++k) {
    const StepFunction a = random_step(g5, gen), b = random_step(g5, gen);
    CHECK(std::abs(inner_product_H(h, a, b) - inner_product_H(h, b, a)) < 1e-12);
    CHECK(inner_product_H(h, a, a) >= 0.0);
  }
}

TEST_CASE("inner product of step functions equals the bilinear form in R") {
  // Independent oracle: <phi, psi> = sum_ij a_i b_j <1_{cell i}, 1_{cell j}>,
  // with <1_{(u,v]}, 1_{(x,y]}> = R(v,y) - R(v,x) - R(u,y) + R(u,x).
  const HurstParam h(0.35);
  const UniformGrid g(2.0, 4);
  std::mt19937_64 gen(5);
  for (int k = 0; k < 4; ++k) {
    const StepFunction a = random_step(g, gen), b = random_step(g, gen);
    double want = 0.0;
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = 0; j < 4; ++j) {
        const double u = g.node(i), v = g.node(i + 1), x = g.node(j), y = g.node(j + 1);
        want += a.coefficients[i] * b.coefficients[j] *
                (covariance(h, v, y) - covariance(h, v, x) - covariance(h, u, y) + covariance(h, u, x));
      }
    CHECK(std::abs(inner_product_H(h, a, b) - want) < 1e-6 * (1.0 + std::abs(want)));
  }
}

TEST_CASE("seminorm") {
  const HurstParam h(0.3);
  const UniformGrid g(1.5, 6);
  CHECK(seminorm_K(h, StepFunction::constant(g, 0.0)) == 0.0);
  // phi = 1 on [0, T): only the weighted term survives, T^{2H} / H.
  const double want = std::sqrt(std::pow(1.5, 0.6) / 0.3);
  CHECK(relerr(seminorm_K(h, StepFunction::constant(g, 1.0)), want) < 1e-12);

  // ||phi||_h^2 / ||phi||_K^2 stays bounded on random step functions.
  std::mt19937_64 gen(3);
  std::vector<double> ratio;
  for (int k = 0; k < 12; ++k) {
    const StepFunction phi = random_step(g, gen);
    const double K = seminorm_K(h, phi);
    ratio.push_back(inner_product_H(h, phi, phi) / (K * K));
  }
  const auto [lo, hi] = std::minmax_element(ratio.begin(), ratio.end());
  CHECK(*lo > 0.0);
  CHECK(*hi < 10.0 * *lo);
  CHECK(*hi < 1.0);
}

TEST_CASE("extended inner product") {
  const HurstParam h(0.3);
  const UniformGrid g(1.0, 10);
  for (std::size_t k : {1, 4, 10})
    for (double t : {0.1, 0.5, 1.0})
      CHECK(std::abs(extended_inner(h, StepFunction::indicator(g, k), t) -
                     covariance(h, g.node(k), t)) < 1e-10);
  CHECK(extended_inner(h, StepFunction::constant(g, 0.0), 0.4) == 0.0);

  // Agreement with inner_product_H against indicators on random step phi.
  std::mt19937_64 gen(9);
  const UniformGrid g5(1.0, 5);
  for (int r = 0; r < 3; ++r) {
    const StepFunction phi = random_step(g5, gen);
    for (std::size_t k : {2, 5}) {
      const double a = extended_inner(h, phi, g5.node(k));
      const double b = inner_product_H(h, phi, StepFunction::indicator(g5, k));
      CHECK(std::abs(a - b) < 1e-6);
    }
  }
}

TEST_CASE("dR/ds by central differences") {
  const HurstParam h(0.3);
  for (auto [s, t] : {std::pair{0.3, 0.8}, {0.8, 0.3}, {1.2, 1.5}}) {
    const double e = 1e-6;
    const double fd = (covariance(h, s + e, t) - covariance(h, s - e, t)) / (2 * e);
    CHECK(std::abs(fd - covariance_ds(h, s, t)) < 1e-6);
  }
}
