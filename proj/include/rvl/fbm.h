#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <vector>

#include "rvl/core.h"

namespace rvl {

/// R_H(t,s) = (t^{2H} + s^{2H} - |t-s|^{2H}) / 2.
double covariance(HurstParam h, double t, double s);

/// Autocovariance at lag k of fractional Gaussian noise with step dt.
double fgn_autocovariance(HurstParam h, std::size_t lag, double dt);

enum class SamplerKind { cholesky, circulant };

const char* to_string(SamplerKind kind);
SamplerKind sampler_from_string(const std::string& name);

/// Exact sampler for (B_{t_1}, ..., B_{t_n}) via a Cholesky factor of the
/// Gram matrix R_H(t_i, t_j). O(n^3) setup, so n is capped at max_size.
class CholeskySampler {
 public:
  static constexpr std::size_t max_size = 4096;

  CholeskySampler(HurstParam h, UniformGrid grid);

  RealPath sample(const SeedSpec& seed, std::size_t component = 0) const;

  const UniformGrid& grid() const noexcept { return grid_; }
  /// True if the diagonal jitter had to be applied.
  bool jittered() const noexcept { return jittered_; }

 private:
  HurstParam h_;
  UniformGrid grid_;
  std::vector<double> lower_;  // row-major n x n lower factor
  bool jittered_ = false;
};

/// Circulant embedding of the fGn autocovariance (length-2n circulant,
/// diagonalised by one FFT). Sampling costs one FFT of size 2n per path.
class CirculantSampler {
 public:
  /// Relative eigenvalue tolerance: eigenvalues in [-tol*max, 0) are clamped
  /// to zero with a warning, anything lower is an embedding failure.
  static constexpr double eigen_tolerance = 1e-10;

  CirculantSampler(HurstParam h, UniformGrid grid);
  ~CirculantSampler();
  CirculantSampler(const CirculantSampler&) = delete;
  CirculantSampler& operator=(const CirculantSampler&) = delete;

  RealPath sample(const SeedSpec& seed, std::size_t component = 0) const;

  const UniformGrid& grid() const noexcept { return grid_; }
  const std::vector<double>& eigenvalues() const noexcept { return eigenvalues_; }
  std::size_t clamped_count() const noexcept { return clamped_; }

 private:
  struct Plan;

  HurstParam h_;
  UniformGrid grid_;
  std::vector<double> eigenvalues_;
  std::vector<double> scale_;  // sqrt(lambda_k / 2n)
  std::size_t clamped_ = 0;
  std::unique_ptr<Plan> plan_;
};

/// Eigenvalues of the minimal circulant embedding for n increments of step dt.
std::vector<double> circulant_eigenvalues(HurstParam h, std::size_t n, double dt);

/// One- and d-dimensional samplers behind a common interface; the d columns
/// use sub-streams 0..d-1 of the replication seed.
class FbmSampler {
 public:
  FbmSampler(HurstParam h, UniformGrid grid, SamplerKind kind = SamplerKind::circulant);

  RealPath sample(const SeedSpec& seed, std::size_t component = 0) const;
  MultiPath sample_multi(std::size_t dim, const SeedSpec& seed) const;

  HurstParam hurst() const noexcept { return h_; }
  const UniformGrid& grid() const noexcept { return grid_; }
  SamplerKind kind() const noexcept { return kind_; }

 private:
  HurstParam h_;
  UniformGrid grid_;
  SamplerKind kind_;
  std::shared_ptr<const CholeskySampler> cholesky_;
  std::shared_ptr<const CirculantSampler> circulant_;
};

RealPath sample_fbm_cholesky(HurstParam h, const UniformGrid& grid, const SeedSpec& seed);
RealPath sample_fbm_circulant(HurstParam h, const UniformGrid& grid, const SeedSpec& seed);
MultiPath sample_fbm_multi(HurstParam h, std::size_t dim, const UniformGrid& grid,
                           const SeedSpec& seed, SamplerKind kind = SamplerKind::circulant);

}  // namespace rvl
