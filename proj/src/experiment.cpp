#include "rvl/experiment.h"

#include <stdexcept>
#include <thread>

#include "rvl/parallel.h"

namespace rvl {

std::size_t default_worker_count() noexcept {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : n;
}

void MonteCarloSetup::validate() const {
  if (grid_sizes.empty()) throw std::invalid_argument("at least one grid size is required");
  for (std::size_t i = 0; i < grid_sizes.size(); ++i) {
    if (grid_sizes[i] == 0) throw std::invalid_argument("grid sizes must be positive");
    if (i > 0 && grid_sizes[i] <= grid_sizes[i - 1])
      throw std::invalid_argument("grid sizes must be strictly increasing");
  }
  if (replications < 2) throw std::invalid_argument("at least 2 replications are required");
  if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
}

GridFamily::GridFamily(HurstParam h, const MonteCarloSetup& setup) : grids_(setup.grid_sizes) {
  setup.validate();
  const std::size_t finest = grids_.back();
  for (std::size_t n : grids_) nested_ = nested_ && finest % n == 0;
  if (nested_) {
    samplers_.push_back(
        std::make_shared<const FbmSampler>(h, UniformGrid(setup.horizon, finest), setup.sampler));
  } else {
    for (std::size_t n : grids_)
      samplers_.push_back(
          std::make_shared<const FbmSampler>(h, UniformGrid(setup.horizon, n), setup.sampler));
  }
}

std::vector<MultiPath> GridFamily::sample(std::size_t dim, const SeedSpec& seed) const {
  std::vector<MultiPath> out;
  out.reserve(grids_.size());
  if (nested_) {
    const MultiPath fine = samplers_.front()->sample_multi(dim, seed);
    for (std::size_t n : grids_) out.push_back(n == grids_.back() ? fine : subsample(fine, n));
    return out;
  }
  // Separate sub-stream blocks: grid g uses components g * 4096 + j.
  for (std::size_t g = 0; g < grids_.size(); ++g) {
    const FbmSampler& s = *samplers_[g];
    std::vector<double> v((grids_[g] + 1) * dim);
    for (std::size_t j = 0; j < dim; ++j) {
      const RealPath col = s.sample(seed, g * 4096 + j);
      for (std::size_t i = 0; i <= grids_[g]; ++i) v[i * dim + j] = col.values[i];
    }
    out.emplace_back(s.grid(), dim, std::move(v));
  }
  return out;
}

}  // namespace rvl
