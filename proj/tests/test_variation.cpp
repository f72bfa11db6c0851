#include <boost/math/quadrature/exp_sinh.hpp>
#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "rvl/fbm.h"
#include "rvl/variation.h"

using namespace rvl;

namespace {

// E|Z|^p = 2 int_0^inf x^p phi(x) dx by numerical integration.
double moment_oracle(double p) {
  boost::math::quadrature::exp_sinh<double> es;
  const double half = es.integrate([p](double x) {
    return std::exp(p * std::log(x) - 0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
  });
  return 2.0 * half;
}

RealPath path_of(double T, std::vector<double> v) {
  const std::size_t n = v.size() - 1;
  return {UniformGrid(T, n), std::move(v)};
}

}  // namespace

TEST_CASE("V_n^q hand examples") {
  CHECK(variation_Vnq(path_of(1.0, {2, 2, 2, 2}), 1.5).value == 0.0);
  CHECK(variation_Vnq(path_of(1.0, {0, -1, 1}), 2.0).value == 5.0);
  std::vector<double> ramp(65);
  for (std::size_t i = 0; i <= 64; ++i) ramp[i] = 3.0 * static_cast<double>(i) / 64;
  const auto r = variation_Vnq(path_of(3.0, ramp), 1.0);
  CHECK(r.value == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(r.n == 64);
  CHECK(r.q == 1.0);
  CHECK_THROWS_AS(variation_Vnq(path_of(1.0, {0, 1}), 0.0), std::invalid_argument);
}

TEST_CASE("V_n^q invariances") {
  const FbmSampler s(HurstParam(0.3), UniformGrid(1.0, 256));
  const RealPath p = s.sample({4, 0});
  const double q = 1.0 / 0.3;
  const double base = variation_Vnq(p, q).value;
  CHECK(base > 0.0);

  std::vector<double> shifted = p.values, negated = p.values, scaled = p.values;
  for (auto& x : shifted) x += 0.75;
  for (auto& x : negated) x = -x;
  for (auto& x : scaled) x *= -2.5;
  CHECK(variation_Vnq({p.grid, shifted}, q).value == doctest::Approx(base).epsilon(1e-12));
  CHECK(variation_Vnq({p.grid, negated}, q).value == base);
  CHECK(variation_Vnq({p.grid, scaled}, q).value ==
        doctest::Approx(std::pow(2.5, q) * base).epsilon(1e-13));
}

TEST_CASE("e_H closed form against numerical integration") {
  CHECK(e_H(HurstParam(0.5)).value == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(e_H(HurstParam(0.25)).value == doctest::Approx(3.0).epsilon(1e-14));
  const double third = e_H(HurstParam(1.0 / 3.0)).value;
  CHECK(third == doctest::Approx(2.0 * std::sqrt(2.0) / std::sqrt(std::numbers::pi)).epsilon(1e-13));
  CHECK(third == doctest::Approx(1.59577).epsilon(1e-5));

  double previous = 1e300;
  for (double H : {0.25, 0.3, 1.0 / 3.0, 0.4, 0.45, 0.5}) {
    const double v = e_H(HurstParam(H)).value;
    CHECK(std::abs(v - moment_oracle(1.0 / H)) <= 1e-10 * v);
    CHECK(v < previous);
    previous = v;
  }
  CHECK(std::abs(abs_gaussian_moment(-0.5) - moment_oracle(-0.5)) < 1e-10);
}

TEST_CASE("Brownian quadratic variation has mean T at every n") {
  MonteCarloSetup setup;
  setup.horizon = 2.0;
  setup.grid_sizes = {16, 64, 256};
  setup.replications = 400;
  setup.master_seed = 31;
  const auto rep = fbm_variation_experiment(HurstParam(0.5), setup);
  REQUIRE(rep.rows.size() == 3);
  for (const auto& row : rep.rows) {
    CHECK(row.target == 2.0);
    // Var V_n^2 = 2 T^2 / n for Brownian motion.
    const double se = std::sqrt(2.0 * 4.0 / static_cast<double>(row.n) / 400.0);
    CHECK(std::abs(row.estimate - 2.0) < 3.0 * se);
  }
}

TEST_CASE("fBm 1/H-variation converges to e_H T") {
  for (double H : {0.3, 0.4}) {
    MonteCarloSetup setup;
    setup.master_seed = 2024;
    const auto rep = fbm_variation_experiment(HurstParam(H), setup);
    REQUIRE(rep.rows.size() == 4);
    CHECK(rep.rows.front().n == 64);
    CHECK(rep.finest().n == 4096);
    CHECK(rep.finest().rel_err < 0.05);
    CHECK(rep.trend_decreasing());
    for (const auto& row : rep.rows) {
      CHECK(row.std_error > 0.0);
      CHECK(row.target == doctest::Approx(e_H(HurstParam(H)).value).epsilon(1e-14));
    }
  }
}

TEST_CASE("V_n^{1/H} on horizon T is T times the unit-horizon law") {
  const double H = 0.3, T = 3.0;
  MonteCarloSetup unit, wide;
  unit.grid_sizes = wide.grid_sizes = {512};
  unit.replications = wide.replications = 400;
  unit.master_seed = 8;
  wide.master_seed = 9;
  wide.horizon = T;
  const auto a = fbm_variation_experiment(HurstParam(H), unit).finest();
  const auto b = fbm_variation_experiment(HurstParam(H), wide).finest();
  // Estimates carry no standard error of their own here; use the sample
  // spread of V over replications through a direct computation instead.
  const FbmSampler su(HurstParam(H), UniformGrid(1.0, 512));
  const FbmSampler sw(HurstParam(H), UniformGrid(T, 512));
  std::vector<double> va, vb;
  for (std::size_t r = 0; r < 400; ++r) {
    va.push_back(T * variation_Vnq(su.sample({8, r}), 1.0 / H).value);
    vb.push_back(variation_Vnq(sw.sample({9, r}), 1.0 / H).value);
  }
  const auto A = aggregate(va), B = aggregate(vb);
  CHECK(A.mean == doctest::Approx(T * a.estimate).epsilon(1e-12));
  CHECK(B.mean == doctest::Approx(b.estimate).epsilon(1e-12));
  CHECK(std::abs(A.mean - B.mean) < 3.0 * std::hypot(*A.std_error, *B.std_error));
}
