#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "rvl/core.h"
#include "rvl/experiment.h"
#include "rvl/report.h"
#include "rvl/stats.h"

namespace rvl {

/// R_t = |B_t| nodewise, for d >= 2.
RealPath bessel_from_multipath(const MultiPath& path);

/// How the drift H(d-1) int_0^t s^{2H-1} / R_s ds is discretised.
enum class DriftScheme {
  /// s^H / R_s held at its right-endpoint value on each cell, weight s^{H-1}
  /// integrated exactly. Since s^H / R_s has a law that does not depend on s,
  /// the expectation of every cell is exact and E Theta_t = 0 holds on any grid.
  self_similar,
  /// 1/R_s held at its right-endpoint value, weight s^{2H-1} integrated
  /// exactly. Biased by O(n^{-H}) near s = 0.
  right_endpoint,
};

/// Theta_t = R_t - H(d-1) int_0^t s^{2H-1} / R_s ds, Theta_0 = 0.
RealPath theta_path(const MultiPath& path, HurstParam h,
                    DriftScheme scheme = DriftScheme::self_similar);

struct BesselPaths {
  MultiPath base;
  RealPath r;
  RealPath theta;
};
BesselPaths bessel_paths(MultiPath base, HurstParam h,
                         DriftScheme scheme = DriftScheme::self_similar);

struct KqConstant {
  std::size_t d;
  double q;
  double value;
};

/// K_q = E|Z|^{-q} = 2^{-q/2} Gamma((d-q)/2) / Gamma(d/2), Z ~ N(0, I_d), 0 < q < d.
KqConstant kq_constant(std::size_t d, double q);

/// Throws GateError unless 2 d H^2 > 1.
void require_bessel_variation_gate(std::size_t d, HurstParam h);

/// V_n^{1/H}(Theta) against e_H T; the report also carries the Monte Carlo
/// evaluation of the nu-integral over xi ~ N(0, I) as a cross-check.
ConvergenceReport theta_variation_experiment(std::size_t d, HurstParam h,
                                             const MonteCarloSetup& setup,
                                             std::size_t xi_draws = 10000);

/// Monte Carlo E R_t^{-q} at each t and the log-log regression against t.
/// Paths are sampled on [0, max t] with the smallest grid (n <= 4096) that
/// contains every t as a node.
ScalingReport negative_moment_experiment(std::size_t d, double q, HurstParam h,
                                         std::span<const double> times, std::size_t replications,
                                         std::uint64_t master_seed, std::size_t workers,
                                         SamplerKind sampler = SamplerKind::circulant);

struct SelfSimilarityReport {
  double scale = 1.0;
  double time = 1.0;
  std::size_t replications = 0;
  KsResult ks;             // a^{-H} Theta_{at} vs Theta_t
  KsResult ks_misscaled;   // a^{-2H} Theta_{at} vs Theta_t
  double mean_scaled = 0.0;
  double mean_reference = 0.0;
};

/// Two independent samples, a^{-H} Theta_{at} (paths on [0, at]) and Theta_t
/// (paths on [0, t]), each on a grid of `cells` cells; replications M..2M-1
/// of the master seed feed the second arm.
SelfSimilarityReport self_similarity_test(std::size_t d, HurstParam h, double a, double t,
                                          std::size_t replications, std::uint64_t master_seed,
                                          std::size_t workers, std::size_t cells = 256,
                                          SamplerKind sampler = SamplerKind::circulant);

}  // namespace rvl
