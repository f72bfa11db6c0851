#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <utility>
#include <vector>

#include "rvl/fbm.h"
#include "rvl/parallel.h"
#include "rvl/report.h"

namespace rvl {

/// Monte Carlo settings shared by the convergence experiments.
struct MonteCarloSetup {
  double horizon = 1.0;
  std::vector<std::size_t> grid_sizes{64, 256, 1024, 4096};
  std::size_t replications = 200;
  std::uint64_t master_seed = 0;
  std::size_t workers = 1;
  SamplerKind sampler = SamplerKind::circulant;

  /// Throws std::invalid_argument unless grids are strictly increasing and
  /// replications >= 2.
  void validate() const;
  SeedSpec seed(std::size_t replication) const { return {master_seed, replication}; }
};

/// Samples one d-dimensional path per grid of the setup. When every grid
/// divides the finest one, a single path on the finest grid is drawn and
/// restricted to the coarser grids (an exact sample on each); otherwise each
/// grid gets its own path from a separate block of sub-streams.
class GridFamily {
 public:
  GridFamily(HurstParam h, const MonteCarloSetup& setup);

  std::vector<MultiPath> sample(std::size_t dim, const SeedSpec& seed) const;
  bool nested() const noexcept { return nested_; }

 private:
  std::vector<std::size_t> grids_;
  bool nested_ = true;
  std::vector<std::shared_ptr<const FbmSampler>> samplers_;
};

/// Runs per_replication(r) -> vector of (statistic, target) pairs, one pair
/// per grid, for r = 0..M-1 in parallel and reduces in replication order.
template <class PerReplication>
ConvergenceReport run_convergence(const MonteCarloSetup& setup, PerReplication&& per_replication) {
  setup.validate();
  const auto samples = parallel_map(setup.replications, setup.workers, per_replication);
  ConvergenceReport report;
  const std::size_t k = setup.grid_sizes.size();
  for (std::size_t g = 0; g < k; ++g) {
    std::vector<double> stat(samples.size());
    std::vector<double> target(samples.size());
    for (std::size_t r = 0; r < samples.size(); ++r) {
      stat[r] = samples[r].at(g).first;
      target[r] = samples[r].at(g).second;
    }
    report.rows.push_back(convergence_row(setup.grid_sizes[g], stat, target));
  }
  return report;
}

}  // namespace rvl
