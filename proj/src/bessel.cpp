#include "rvl/bessel.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rvl/ito.h"
#include "rvl/parallel.h"
#include "rvl/variation.h"

namespace rvl {

RealPath bessel_from_multipath(const MultiPath& path) {
  if (path.dim < 2) throw std::invalid_argument("fractional Bessel process needs d >= 2");
  std::vector<double> r(path.grid.size() + 1);
  for (std::size_t i = 0; i < r.size(); ++i) {
    double s = 0.0;
    for (double v : path.row(i)) s += v * v;
    r[i] = std::sqrt(s);
  }
  return {path.grid, std::move(r)};
}

namespace {

RealPath theta_from_radius(const RealPath& r, std::size_t d, HurstParam h, DriftScheme scheme) {
  const double H = h.value();
  const std::size_t size = r.size();
  std::vector<double> g(size, 0.0);
  for (std::size_t i = 1; i < size; ++i) {
    if (!(r[i] > 0.0)) {
      std::ostringstream msg;
      msg << "degenerate Bessel path: R vanishes at grid node " << i;
      throw NumericalError(msg.str());
    }
    g[i] = scheme == DriftScheme::self_similar ? std::pow(r.grid.node(i), H) / r[i] : 1.0 / r[i];
  }
  const double exponent = scheme == DriftScheme::self_similar ? H - 1.0 : 2.0 * H - 1.0;
  const auto drift = power_weighted_integral_path(g, r.grid, exponent);
  const double factor = H * static_cast<double>(d - 1);
  std::vector<double> theta(size, 0.0);
  for (std::size_t i = 1; i < size; ++i) theta[i] = r[i] - factor * drift[i];
  return {r.grid, std::move(theta)};
}

}  // namespace

RealPath theta_path(const MultiPath& path, HurstParam h, DriftScheme scheme) {
  return theta_from_radius(bessel_from_multipath(path), path.dim, h, scheme);
}

BesselPaths bessel_paths(MultiPath base, HurstParam h, DriftScheme scheme) {
  RealPath r = bessel_from_multipath(base);
  RealPath theta = theta_from_radius(r, base.dim, h, scheme);
  return {std::move(base), std::move(r), std::move(theta)};
}

KqConstant kq_constant(std::size_t d, double q) {
  const double dd = static_cast<double>(d);
  if (!(q > 0.0 && q < dd))
    throw GateError("negative moment E R^{-q} requires 0 < q < d");
  const double v = std::exp(-0.5 * q * std::log(2.0) + std::lgamma(0.5 * (dd - q)) -
                            std::lgamma(0.5 * dd));
  return {d, q, v};
}

void require_bessel_variation_gate(std::size_t d, HurstParam h) {
  const double lhs = 2.0 * static_cast<double>(d) * h.value() * h.value();
  if (!(lhs > 1.0)) {
    std::ostringstream msg;
    msg << "Bessel variation requires 2dH^2 > 1 (2 * " << d << " * " << h.value()
        << "^2 = " << lhs << ")";
    throw GateError(msg.str());
  }
}

ConvergenceReport theta_variation_experiment(std::size_t d, HurstParam h,
                                             const MonteCarloSetup& setup,
                                             std::size_t xi_draws) {
  if (d < 2) throw GateError("Bessel variation requires d >= 2");
  require_bessel_variation_gate(d, h);
  setup.validate();
  const GridFamily family(h, setup);
  const double q = 1.0 / h.value();
  const double eh = e_H(h).value;
  const double target = eh * setup.horizon;
  const std::size_t per_path =
      std::max<std::size_t>(2, (xi_draws + setup.replications - 1) / setup.replications);
  const std::size_t grids = setup.grid_sizes.size();

  struct Sample {
    std::vector<double> variation, xi_estimate;
  };
  const auto samples = parallel_map(setup.replications, setup.workers, [&](std::size_t r) {
    const SeedSpec seed = setup.seed(r);
    const auto paths = family.sample(d, seed);
    auto gen = seed.stream(d);
    std::normal_distribution<double> normal;
    std::vector<double> xi(per_path * d);
    for (auto& v : xi) v = normal(gen);

    Sample s;
    for (const auto& path : paths) {
      const RealPath radius = bessel_from_multipath(path);
      const RealPath theta = theta_from_radius(radius, d, h, DriftScheme::self_similar);
      std::vector<CompensatedSum> by_direction(per_path);
      for (std::size_t i = 1; i < radius.size(); ++i) {
        const auto row = path.row(i);
        for (std::size_t k = 0; k < per_path; ++k) {
          double dot = 0.0;
          for (std::size_t j = 0; j < d; ++j) dot += row[j] * xi[k * d + j];
          by_direction[k].add(std::pow(std::abs(dot) / radius[i], q));
        }
      }
      CompensatedSum mc;
      for (const auto& c : by_direction) mc.add(c.value());
      s.variation.push_back(variation_Vnq(theta, q).value);
      s.xi_estimate.push_back(mc.value() / static_cast<double>(per_path) * path.grid.step());
    }
    return s;
  });

  ConvergenceReport report;
  for (std::size_t g = 0; g < grids; ++g) {
    std::vector<double> v, a, b;
    for (const auto& s : samples) {
      v.push_back(s.variation[g]);
      a.push_back(target);
      b.push_back(s.xi_estimate[g]);
    }
    report.rows.push_back(convergence_row(setup.grid_sizes[g], v, a));
    const Aggregate xi = aggregate(b);
    if (std::abs(xi.mean - target) > 3.0 * *xi.std_error) {
      std::ostringstream msg;
      msg << "nu-integral cross-check failed at n = " << setup.grid_sizes[g] << ": e_H T = "
          << target << " vs Monte Carlo " << xi.mean << " (s.e. " << *xi.std_error << ")";
      throw NumericalError(msg.str());
    }
    if (g + 1 == grids) {
      report.summary.set("xi_target", xi.mean);
      report.summary.set("xi_stderr", *xi.std_error);
    }
  }
  report.summary.set("e_H", eh);
  report.summary.set("gate_2dH2", 2.0 * static_cast<double>(d) * h.value() * h.value());
  return report;
}

namespace {

// Smallest n <= 4096 for which every t is a node of the grid on [0, max t].
std::size_t common_grid_size(std::span<const double> times, double horizon) {
  for (std::size_t n = 1; n <= 4096; ++n) {
    const bool ok = std::all_of(times.begin(), times.end(), [&](double t) {
      const double x = t / horizon * static_cast<double>(n);
      return std::abs(x - std::round(x)) < 1e-9;
    });
    if (ok) return n;
  }
  throw std::invalid_argument("times do not fit on a uniform grid with n <= 4096");
}

}  // namespace

ScalingReport negative_moment_experiment(std::size_t d, double q, HurstParam h,
                                         std::span<const double> times, std::size_t replications,
                                         std::uint64_t master_seed, std::size_t workers,
                                         SamplerKind sampler) {
  if (d < 2) throw GateError("negative moments of the Bessel process need d >= 2");
  const KqConstant kq = kq_constant(d, q);
  if (times.size() < 3) throw std::invalid_argument("negative moment regression needs >= 3 times");
  if (replications < 2) throw std::invalid_argument("at least 2 replications are required");
  if (std::any_of(times.begin(), times.end(), [](double t) { return !(t > 0.0); }))
    throw std::invalid_argument("negative moment times must be positive");

  const double horizon = *std::max_element(times.begin(), times.end());
  const UniformGrid grid(horizon, common_grid_size(times, horizon));
  std::vector<std::size_t> nodes;
  for (double t : times) nodes.push_back(grid.index_of(t));
  const FbmSampler fbm(h, grid, sampler);

  const auto samples = parallel_map(replications, workers, [&](std::size_t r) {
    const RealPath radius = bessel_from_multipath(fbm.sample_multi(d, {master_seed, r}));
    std::vector<double> m;
    for (std::size_t i : nodes) m.push_back(std::pow(radius[i], -q));
    return m;
  });

  ScalingReport report;
  std::vector<double> lx, ly;
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    std::vector<double> col;
    for (const auto& s : samples) col.push_back(s[k]);
    const Aggregate agg = aggregate(col);
    report.rows.push_back(
        {times[k], agg.mean, kq.value * std::pow(times[k], -h.value() * q), *agg.std_error});
    lx.push_back(std::log(times[k]));
    ly.push_back(std::log(agg.mean));
  }
  report.fit = linear_fit(lx, ly);
  report.summary.set("slope_target", -h.value() * q);
  report.summary.set("K_q", kq.value);
  report.summary.set("intercept_target", std::log(kq.value));
  return report;
}

SelfSimilarityReport self_similarity_test(std::size_t d, HurstParam h, double a, double t,
                                          std::size_t replications, std::uint64_t master_seed,
                                          std::size_t workers, std::size_t cells,
                                          SamplerKind sampler) {
  if (!(a > 0.0) || !(t > 0.0)) throw std::invalid_argument("scale a and time t must be positive");
  if (d < 2) throw GateError("self-similarity test of Theta needs d >= 2");
  if (replications < 2) throw std::invalid_argument("at least 2 replications are required");

  const FbmSampler scaled(h, UniformGrid(a * t, cells), sampler);
  const FbmSampler reference(h, UniformGrid(t, cells), sampler);
  const double H = h.value();

  const auto arm_a = parallel_map(replications, workers, [&](std::size_t r) {
    const RealPath theta = theta_path(scaled.sample_multi(d, {master_seed, r}), h);
    return theta.values.back();
  });
  const auto arm_b = parallel_map(replications, workers, [&](std::size_t r) {
    const RealPath theta = theta_path(reference.sample_multi(d, {master_seed, replications + r}), h);
    return theta.values.back();
  });

  std::vector<double> right(arm_a), wrong(arm_a);
  for (auto& x : right) x *= std::pow(a, -H);
  for (auto& x : wrong) x *= std::pow(a, -2.0 * H);

  SelfSimilarityReport rep;
  rep.scale = a;
  rep.time = t;
  rep.replications = replications;
  rep.ks = ks_two_sample(right, arm_b);
  rep.ks_misscaled = ks_two_sample(wrong, arm_b);
  rep.mean_scaled = aggregate(right).mean;
  rep.mean_reference = aggregate(arm_b).mean;
  return rep;
}

}  // namespace rvl
