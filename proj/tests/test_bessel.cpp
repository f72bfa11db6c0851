#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "doctest.h"
#include "rvl/bessel.h"
#include "rvl/fbm.h"
#include "rvl/variation.h"

using namespace rvl;

TEST_CASE("radius of a multipath") {
  const UniformGrid g(1.0, 2);
  const MultiPath p(g, 2, {0, 0, 3, 4, -1, 0});
  const RealPath r = bessel_from_multipath(p);
  CHECK(r[0] == 0.0);
  CHECK(r[1] == 5.0);
  CHECK(r[2] == 1.0);
  CHECK_THROWS_AS(bessel_from_multipath(MultiPath(g, 1, {0, 1, 2})), std::invalid_argument);
}

TEST_CASE("E R_t^2 = d t^{2H}") {
  const FbmSampler s(HurstParam(0.45), UniformGrid(1.0, 16));
  std::vector<double> r2;
  for (std::size_t k = 0; k < 10000; ++k) {
    const RealPath r = bessel_from_multipath(s.sample_multi(3, {41, k}));
    r2.push_back(r[8] * r[8]);
  }
  CHECK(std::abs(aggregate(r2).mean - 3.0 * std::pow(0.5, 0.9)) < 0.05 * 3.0 * std::pow(0.5, 0.9));
}

TEST_CASE("Theta path structure") {
  const HurstParam h(0.4);
  const FbmSampler s(h, UniformGrid(2.0, 512));
  for (std::size_t k = 0; k < 5; ++k) {
    const BesselPaths p = bessel_paths(s.sample_multi(3, {43, k}), h);
    CHECK(p.theta[0] == 0.0);
    double previous = 0.0;
    for (std::size_t i = 1; i < p.r.size(); ++i) {
      CHECK(p.theta[i] <= p.r[i]);
      const double drift = p.r[i] - p.theta[i];
      CHECK(drift >= previous);
      previous = drift;
    }
    for (auto scheme : {DriftScheme::self_similar, DriftScheme::right_endpoint}) {
      const RealPath t = theta_path(p.base, h, scheme);
      CHECK(t[0] == 0.0);
      for (std::size_t i = 1; i < t.size(); ++i) CHECK(t[i] <= p.r[i]);
    }
  }
}

TEST_CASE("Theta drift schemes on a deterministic path") {
  // A path with |B_t| = t^H exactly makes s^H / R_s = 1, so the self-similar
  // scheme gives the drift H(d-1) int_0^t s^{H-1} ds = (d-1) t^H without
  // discretisation error, and Theta = 0 at every node.
  const double H = 0.3;
  const UniformGrid g(1.0, 64);
  std::vector<double> v;
  for (std::size_t i = 0; i <= 64; ++i) {
    const double r = std::pow(g.node(i), H);
    v.insert(v.end(), {r * 0.6, r * 0.8, 0.0});
  }
  const RealPath t = theta_path(MultiPath(g, 3, v), HurstParam(H));
  for (std::size_t i = 0; i <= 64; ++i) CHECK(std::abs(t[i] - (1.0 - 2.0) * std::pow(g.node(i), H)) < 1e-12);

  std::vector<double> zero_row(v);
  zero_row[3 * 5] = zero_row[3 * 5 + 1] = 0.0;
  CHECK_THROWS_AS(theta_path(MultiPath(g, 3, zero_row), HurstParam(H)), NumericalError);
}

TEST_CASE("rotational invariance of R and Theta") {
  const HurstParam h(0.45);
  const FbmSampler s(h, UniformGrid(1.0, 256));
  const MultiPath base = s.sample_multi(3, {47, 0});
  // Rotation about (1,1,1)/sqrt 3 by 0.7 rad.
  const double c = std::cos(0.7), sn = std::sin(0.7), k = 1.0 / std::sqrt(3.0);
  const double u[3] = {k, k, k};
  double Q[3][3];
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const double cross = (i == j) ? 0.0 : (((j - i + 3) % 3 == 1) ? -u[3 - i - j] : u[3 - i - j]);
      Q[i][j] = (i == j ? c : 0.0) + (1 - c) * u[i] * u[j] + sn * cross;
    }
  std::vector<double> rotated(base.values.size());
  for (std::size_t r = 0; r <= 256; ++r)
    for (int i = 0; i < 3; ++i) {
      double acc = 0.0;
      for (int j = 0; j < 3; ++j) acc += Q[i][j] * base.at(r, j);
      rotated[r * 3 + i] = acc;
    }
  const BesselPaths a = bessel_paths(base, h);
  const BesselPaths b = bessel_paths(MultiPath(base.grid, 3, rotated), h);
  for (std::size_t i = 0; i <= 256; ++i) {
    CHECK(std::abs(a.r[i] - b.r[i]) < 1e-12);
    CHECK(std::abs(a.theta[i] - b.theta[i]) < 1e-12);
  }
}

TEST_CASE("E Theta_t = 0") {
  const HurstParam h(0.45);
  const FbmSampler s(h, UniformGrid(1.0, 256));
  std::vector<double> end, mid;
  for (std::size_t k = 0; k < 10000; ++k) {
    const RealPath t = theta_path(s.sample_multi(3, {53, k}), h);
    end.push_back(t[256]);
    mid.push_back(t[128]);
  }
  const Aggregate a = aggregate(end), b = aggregate(mid);
  CHECK(std::abs(a.mean) < 3.0 * *a.std_error);
  CHECK(std::abs(b.mean) < 3.0 * *b.std_error);
}

TEST_CASE("E Theta_T agrees across grid refinement") {
  const HurstParam h(0.45);
  const FbmSampler coarse(h, UniformGrid(1.0, 1024));
  const FbmSampler fine(h, UniformGrid(1.0, 4096));
  std::vector<double> a, b;
  for (std::size_t k = 0; k < 1000; ++k) {
    a.push_back(theta_path(coarse.sample_multi(3, {59, k}), h).values.back());
    b.push_back(theta_path(fine.sample_multi(3, {61, k}), h).values.back());
  }
  const Aggregate A = aggregate(a), B = aggregate(b);
  CHECK(std::abs(A.mean - B.mean) < 3.0 * std::hypot(*A.std_error, *B.std_error));
}

TEST_CASE("K_q constant") {
  CHECK(kq_constant(3, 1.0).value == doctest::Approx(std::sqrt(2.0 / std::numbers::pi)).epsilon(1e-14));
  CHECK(kq_constant(3, 1.0).value == doctest::Approx(0.79788).epsilon(1e-5));
  CHECK_THROWS_AS(kq_constant(3, 3.0), GateError);
  CHECK_THROWS_AS(kq_constant(3, 0.0), GateError);

  std::mt19937_64 gen(67);
  std::normal_distribution<double> z;
  for (auto [d, q] : {std::pair<std::size_t, double>{3, 1.0}, {4, 2.5}, {2, 0.5}}) {
    std::vector<double> m;
    for (int k = 0; k < 100000; ++k) {
      double n2 = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        const double v = z(gen);
        n2 += v * v;
      }
      m.push_back(std::pow(n2, -0.5 * q));
    }
    const Aggregate a = aggregate(m);
    CHECK(std::abs(a.mean - kq_constant(d, q).value) < 3.0 * *a.std_error);
  }
}

TEST_CASE("Bessel variation gate") {
  try {
    require_bessel_variation_gate(3, HurstParam(0.35));
    FAIL("expected a gate error");
  } catch (const GateError& e) {
    CHECK(std::string(e.what()).find("2dH^2 > 1") != std::string::npos);
    CHECK(std::string(e.what()).find("0.735") != std::string::npos);
  }
  CHECK_NOTHROW(require_bessel_variation_gate(3, HurstParam(0.45)));
  MonteCarloSetup setup;
  CHECK_THROWS_AS(theta_variation_experiment(3, HurstParam(0.35), setup), GateError);
  CHECK_THROWS_AS(theta_variation_experiment(1, HurstParam(0.45), setup), GateError);
}

TEST_CASE("Theta variation target is e_H T") {
  MonteCarloSetup setup;
  setup.master_seed = 71;
  setup.horizon = 2.0;
  setup.grid_sizes = {256, 1024};
  setup.replications = 40;
  const auto rep = theta_variation_experiment(3, HurstParam(0.45), setup);
  for (const auto& row : rep.rows)
    CHECK(row.target == doctest::Approx(2.0 * e_H(HurstParam(0.45)).value).epsilon(1e-14));
  CHECK(rep.summary.at("gate_2dH2") == doctest::Approx(1.215).epsilon(1e-12));
}

TEST_CASE("negative moments scale like t^{-Hq}") {
  const std::vector<double> times{0.25, 0.5, 1.0, 2.0};
  const auto rep = negative_moment_experiment(3, 1.0, HurstParam(0.45), times, 20000, 73, 1);
  CHECK(std::abs(rep.fit.slope + 0.45) < 0.03);
  CHECK(std::abs(rep.fit.intercept - std::log(std::sqrt(2.0 / std::numbers::pi))) < 0.05);
  for (const auto& row : rep.rows) CHECK(std::abs(row.estimate - row.target) < 4.0 * row.std_error);
  CHECK_THROWS_AS(negative_moment_experiment(3, 3.0, HurstParam(0.45), times, 10, 1, 1), GateError);
}

TEST_CASE("self-similarity test") {
  const auto same = self_similarity_test(3, HurstParam(0.45), 1.0, 0.5, 1000, 79, 1, 128);
  CHECK(same.ks.p_value > 0.01);
  const auto four = self_similarity_test(3, HurstParam(0.45), 4.0, 0.5, 2000, 83, 1, 128);
  CHECK(four.ks.p_value > 0.01);
  CHECK(four.ks_misscaled.p_value < 0.01);
  CHECK(four.replications == 2000);
}
