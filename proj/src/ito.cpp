#include "rvl/ito.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <sstream>

#include "rvl/parallel.h"
#include "rvl/stats.h"
#include "rvl/variation.h"

namespace rvl {

namespace {

constexpr std::array<double, 7> probes{-2.0, -1.0, -0.3, 0.2, 0.7, 1.5, 2.5};
constexpr double fd_step = 1e-4;
constexpr double fd_tolerance = 1e-4;

void expect_close(double fd, double exact, const std::string& what) {
  if (std::abs(fd - exact) >= fd_tolerance * std::max(1.0, std::abs(exact)))
    throw std::invalid_argument("integrand '" + what + "' fails finite-difference validation");
}

const std::map<std::string, SmoothIntegrandSpec>& registry() {
  static const auto specs = [] {
    std::map<std::string, SmoothIntegrandSpec> m;
    auto add = [&m](SmoothIntegrandSpec s) {
      validate_integrand(s);
      m.emplace(s.label, std::move(s));
    };
    add({"identity", [](double x) { return x; }, [](double) { return 1.0; },
         [](double) { return 0.0; }});
    add({"half-square", [](double x) { return 0.5 * x * x; }, [](double x) { return x; },
         [](double) { return 1.0; }});
    add({"cubic", [](double x) { return x * x * x / 6.0; }, [](double x) { return 0.5 * x * x; },
         [](double x) { return x; }});
    add({"constant", [](double) { return 1.0; }, [](double) { return 0.0; },
         [](double) { return 0.0; }});
    return m;
  }();
  return specs;
}

const std::map<std::string, MultiIntegrandSpec>& multi_registry() {
  static const auto specs = [] {
    std::map<std::string, MultiIntegrandSpec> m;
    auto add = [&m](MultiIntegrandSpec s) {
      for (std::size_t d : {1, 2, 3, 5}) validate_integrand(s, d);
      m.emplace(s.label, std::move(s));
    };
    add({"half-norm-square",
         [](std::span<const double> x) {
           double r = 0.0;
           for (double v : x) r += v * v;
           return 0.5 * r;
         },
         [](std::span<const double> x, std::span<double> g) { std::copy(x.begin(), x.end(), g.begin()); },
         [](std::span<const double> x) { return static_cast<double>(x.size()); }});
    add({"linear",
         [](std::span<const double> x) {
           double r = 0.0;
           for (double v : x) r += v;
           return r;
         },
         [](std::span<const double>, std::span<double> g) { std::fill(g.begin(), g.end(), 1.0); },
         [](std::span<const double>) { return 0.0; }});
    return m;
  }();
  return specs;
}

template <class Map>
std::vector<std::string> keys_of(const Map& m) {
  std::vector<std::string> out;
  for (const auto& [k, v] : m) out.push_back(k);
  return out;
}

void require_finite(double x, std::size_t node, const std::string& label) {
  if (!std::isfinite(x)) {
    std::ostringstream msg;
    msg << "integrand '" << label << "' is not finite at grid node " << node;
    throw NumericalError(msg.str());
  }
}

double power_integral(double a, double b, double exponent) {
  return (std::pow(b, exponent + 1.0) - std::pow(a, exponent + 1.0)) / (exponent + 1.0);
}

}  // namespace

void validate_integrand(const SmoothIntegrandSpec& spec) {
  for (double x : probes) {
    const double d1 = (spec.f(x + fd_step) - spec.f(x - fd_step)) / (2.0 * fd_step);
    const double d2 = (spec.f_prime(x + fd_step) - spec.f_prime(x - fd_step)) / (2.0 * fd_step);
    expect_close(d1, spec.f_prime(x), spec.label);
    expect_close(d2, spec.f_second(x), spec.label);
  }
}

void validate_integrand(const MultiIntegrandSpec& spec, std::size_t dim) {
  std::vector<double> x(dim), g(dim), gp(dim), gm(dim);
  for (std::size_t p = 0; p < probes.size(); ++p) {
    for (std::size_t i = 0; i < dim; ++i) x[i] = probes[(p + 2 * i) % probes.size()];
    spec.gradient(x, g);
    double lap = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
      auto xp = x, xm = x;
      xp[i] += fd_step;
      xm[i] -= fd_step;
      expect_close((spec.F(xp) - spec.F(xm)) / (2.0 * fd_step), g[i], spec.label);
      spec.gradient(xp, gp);
      spec.gradient(xm, gm);
      lap += (gp[i] - gm[i]) / (2.0 * fd_step);
    }
    expect_close(lap, spec.laplacian(x), spec.label);
  }
}

const SmoothIntegrandSpec& integrand(const std::string& label) {
  const auto& m = registry();
  const auto it = m.find(label);
  if (it == m.end()) throw GateError("integrand '" + label + "' is not in the registered whitelist");
  return it->second;
}

std::vector<std::string> integrand_labels() { return keys_of(registry()); }

const MultiIntegrandSpec& multi_integrand(const std::string& label) {
  const auto& m = multi_registry();
  const auto it = m.find(label);
  if (it == m.end())
    throw GateError("multidimensional integrand '" + label + "' is not in the registered whitelist");
  return it->second;
}

std::vector<std::string> multi_integrand_labels() { return keys_of(multi_registry()); }

std::vector<double> power_weighted_integral_path(std::span<const double> g,
                                                 const UniformGrid& grid, double exponent) {
  if (g.size() != grid.size() + 1)
    throw std::invalid_argument("integrand samples must have one value per grid node");
  if (!(exponent > -1.0)) throw std::domain_error("weight exponent must exceed -1");
  std::vector<double> out(g.size(), 0.0);
  CompensatedSum acc;
  for (std::size_t i = 0; i + 1 < g.size(); ++i) {
    acc.add(g[i + 1] * power_integral(grid.node(i), grid.node(i + 1), exponent));
    out[i + 1] = acc.value();
  }
  return out;
}

double weighted_time_integral(std::span<const double> g, const UniformGrid& grid, HurstParam h,
                              std::size_t upto) {
  if (upto > grid.size()) throw std::out_of_range("upto exceeds the grid size");
  if (g.size() != grid.size() + 1)
    throw std::invalid_argument("integrand samples must have one value per grid node");
  const double e = 2.0 * h.value() - 1.0;
  CompensatedSum acc;
  for (std::size_t i = 0; i < upto; ++i)
    acc.add(g[i + 1] * power_integral(grid.node(i), grid.node(i + 1), e));
  return acc.value();
}

DivergenceReading divergence_reading(HurstParam h) {
  return h.value() > 0.25 ? DivergenceReading::plain : DivergenceReading::extended;
}

const char* to_string(DivergenceReading r) {
  return r == DivergenceReading::plain ? "divergence" : "extended-domain reading";
}

RealPath divergence_via_ito(const SmoothIntegrandSpec& spec, const RealPath& path, HurstParam h) {
  const std::size_t size = path.values.size();
  std::vector<double> curvature(size);
  std::vector<double> level(size);
  for (std::size_t i = 0; i < size; ++i) {
    curvature[i] = spec.f_second(path.values[i]);
    level[i] = spec.f(path.values[i]);
    require_finite(curvature[i], i, spec.label);
    require_finite(level[i], i, spec.label);
  }
  const auto drift = power_weighted_integral_path(curvature, path.grid, 2.0 * h.value() - 1.0);
  const double f0 = spec.f(0.0);
  std::vector<double> x(size);
  x[0] = 0.0;
  for (std::size_t i = 1; i < size; ++i) x[i] = (level[i] - f0) - h.value() * drift[i];
  return {path.grid, std::move(x)};
}

RealPath divergence_via_ito_multi(const MultiIntegrandSpec& spec, const MultiPath& path,
                                  HurstParam h) {
  const std::size_t size = path.grid.size() + 1;
  std::vector<double> curvature(size);
  std::vector<double> level(size);
  for (std::size_t i = 0; i < size; ++i) {
    curvature[i] = spec.laplacian(path.row(i));
    level[i] = spec.F(path.row(i));
    require_finite(curvature[i], i, spec.label);
    require_finite(level[i], i, spec.label);
  }
  const auto drift = power_weighted_integral_path(curvature, path.grid, 2.0 * h.value() - 1.0);
  const std::vector<double> origin(path.dim, 0.0);
  const double f0 = spec.F(origin);
  std::vector<double> x(size);
  x[0] = 0.0;
  for (std::size_t i = 1; i < size; ++i) x[i] = (level[i] - f0) - h.value() * drift[i];
  return {path.grid, std::move(x)};
}

ConvergenceReport ito_variation_experiment(const SmoothIntegrandSpec& spec, HurstParam h,
                                       const MonteCarloSetup& setup) {
  h.require_rough("ito-variation");
  const SmoothIntegrandSpec& registered = integrand(spec.label);
  const GridFamily family(h, setup);
  const double q = 1.0 / h.value();
  const double eh = e_H(h).value;

  auto report = run_convergence(setup, [&](std::size_t r) {
    const auto paths = family.sample(1, setup.seed(r));
    std::vector<std::pair<double, double>> out;
    for (const auto& mp : paths) {
      const RealPath b = mp.column(0);
      const RealPath x = divergence_via_ito(registered, b, h);
      CompensatedSum limit;
      for (std::size_t i = 1; i < b.size(); ++i)
        limit.add(std::pow(std::abs(registered.f_prime(b[i])), q));
      out.emplace_back(variation_Vnq(x, q).value, eh * limit.value() * b.grid.step());
    }
    return out;
  });
  report.summary.set("e_H", eh);
  return report;
}

ConvergenceReport ito_variation_multi_experiment(const MultiIntegrandSpec& spec, std::size_t dim,
                                       HurstParam h, const MonteCarloSetup& setup,
                                       std::size_t xi_draws) {
  h.require_rough("ito-variation-nd");
  if (dim == 0) throw std::invalid_argument("dimension must be at least 1");
  const MultiIntegrandSpec& registered = multi_integrand(spec.label);
  const GridFamily family(h, setup);
  const double q = 1.0 / h.value();
  const double eh = e_H(h).value;
  const std::size_t per_path =
      std::max<std::size_t>(2, (xi_draws + setup.replications - 1) / setup.replications);
  const std::size_t grids = setup.grid_sizes.size();

  struct Sample {
    std::vector<double> variation, closed_form, xi_estimate;
  };

  const auto samples = parallel_map(setup.replications, setup.workers, [&](std::size_t r) {
    const SeedSpec seed = setup.seed(r);
    const auto paths = family.sample(dim, seed);

    // Directions xi ~ N(0, I_d) from the first sub-stream not used by the path.
    auto gen = seed.stream(dim);
    std::normal_distribution<double> normal;
    std::vector<double> xi(per_path * dim);
    for (auto& v : xi) v = normal(gen);

    Sample s;
    std::vector<double> u(dim);
    for (const auto& path : paths) {
      const RealPath x = divergence_via_ito_multi(registered, path, h);
      CompensatedSum closed;
      std::vector<CompensatedSum> by_direction(per_path);
      for (std::size_t i = 1; i <= path.grid.size(); ++i) {
        registered.gradient(path.row(i), u);
        double norm2 = 0.0;
        for (double v : u) norm2 += v * v;
        closed.add(std::pow(norm2, 0.5 * q));
        for (std::size_t k = 0; k < per_path; ++k) {
          double dot = 0.0;
          for (std::size_t j = 0; j < dim; ++j) dot += u[j] * xi[k * dim + j];
          by_direction[k].add(std::pow(std::abs(dot), q));
        }
      }
      CompensatedSum mc;
      for (const auto& c : by_direction) mc.add(c.value());
      const double dt = path.grid.step();
      s.variation.push_back(variation_Vnq(x, q).value);
      s.closed_form.push_back(eh * closed.value() * dt);
      s.xi_estimate.push_back(mc.value() / static_cast<double>(per_path) * dt);
    }
    return s;
  });

  ConvergenceReport report;
  for (std::size_t g = 0; g < grids; ++g) {
    std::vector<double> v, a, b;
    for (const auto& s : samples) {
      v.push_back(s.variation[g]);
      a.push_back(s.closed_form[g]);
      b.push_back(s.xi_estimate[g]);
    }
    report.rows.push_back(convergence_row(setup.grid_sizes[g], v, a));
    const Aggregate closed = aggregate(a);
    const Aggregate xi = aggregate(b);
    if (std::abs(closed.mean - xi.mean) > 3.0 * *xi.std_error) {
      std::ostringstream msg;
      msg << "nu-integral cross-check failed at n = " << setup.grid_sizes[g]
          << ": closed form " << closed.mean << " vs Monte Carlo " << xi.mean << " (s.e. "
          << *xi.std_error << ")";
      throw NumericalError(msg.str());
    }
    if (g + 1 == grids) {
      report.summary.set("closed_form_target", closed.mean);
      report.summary.set("xi_target", xi.mean);
      report.summary.set("xi_stderr", *xi.std_error);
    }
  }
  report.summary.set("e_H", eh);
  report.summary.set("xi_draws_per_path", static_cast<double>(per_path));
  return report;
}

std::vector<std::pair<double, double>> default_lp_intervals(double horizon) {
  std::vector<std::pair<double, double>> out;
  const double a = 0.25 * horizon;
  for (int k = 9; k >= 5; --k) out.emplace_back(a, a + horizon * std::ldexp(1.0, -k));
  return out;
}

ScalingReport lp_scaling_experiment(const SmoothIntegrandSpec& spec, HurstParam h,
                                    const MonteCarloSetup& setup,
                                    std::span<const std::pair<double, double>> intervals) {
  const SmoothIntegrandSpec& registered = integrand(spec.label);
  if (intervals.size() < 3)
    throw std::invalid_argument("lp scaling regression needs at least 3 interval widths");
  if (std::all_of(probes.begin(), probes.end(),
                  [&](double x) { return registered.f_prime(x) == 0.0; }))
    throw GateError("lp scaling: degenerate input, integrand f' vanishes identically");
  if (setup.replications < 2) throw std::invalid_argument("at least 2 replications are required");

  const UniformGrid grid(setup.horizon, setup.grid_sizes.back());
  std::vector<std::pair<std::size_t, std::size_t>> nodes;
  for (const auto& [a, b] : intervals) {
    if (!(b > a) || a < 0.25 * setup.horizon - 1e-12)
      throw std::invalid_argument("lp scaling intervals need T/4 <= a < b");
    nodes.emplace_back(grid.index_of(a), grid.index_of(b));
  }
  const FbmSampler sampler(h, grid, setup.sampler);
  const double q = 1.0 / h.value();

  const auto samples = parallel_map(setup.replications, setup.workers, [&](std::size_t r) {
    const RealPath x = divergence_via_ito(registered, sampler.sample(setup.seed(r)), h);
    std::vector<double> m;
    for (const auto& [i, j] : nodes) m.push_back(std::pow(std::abs(x[j] - x[i]), q));
    return m;
  });

  ScalingReport report;
  std::vector<double> lx, ly;
  const bool exact = registered.label == "identity";
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    std::vector<double> col;
    for (const auto& s : samples) col.push_back(s[k]);
    const Aggregate agg = aggregate(col);
    if (!(agg.mean > 0.0))
      throw GateError("lp scaling: degenerate input, all moments vanish");
    const double width = intervals[k].second - intervals[k].first;
    report.rows.push_back({width, agg.mean, exact ? e_H(h).value * width : std::nan(""),
                           *agg.std_error});
    lx.push_back(std::log(width));
    ly.push_back(std::log(agg.mean));
  }
  report.fit = linear_fit(lx, ly);
  report.summary.set("slope_target", 1.0);
  return report;
}

}  // namespace rvl
