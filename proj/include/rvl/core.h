#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace rvl {

/// Parameter outside the admissible region of an operation (H >= 1/2 for the
/// kernel, 2dH^2 <= 1 for the Theta variation, ...). Maps to exit status 2.
class GateError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Numerical breakdown: non-PSD covariance, failed embedding, non-finite
/// integrand values, quadrature that did not converge. Maps to exit status 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class HurstParam {
 public:
  explicit HurstParam(double h);

  double value() const noexcept { return h_; }
  bool rough() const noexcept { return h_ < 0.5; }

  /// Throws GateError unless H < 1/2.
  void require_rough(const char* what) const;

 private:
  double h_;
};

/// Partition t_i = iT/n of [0, T].
class UniformGrid {
 public:
  UniformGrid(double horizon, std::size_t n);

  double horizon() const noexcept { return horizon_; }
  std::size_t size() const noexcept { return n_; }
  double step() const noexcept { return horizon_ / static_cast<double>(n_); }

  double node(std::size_t i) const;
  std::vector<double> nodes() const;

  /// Index k with node(k) == t up to rounding, or throws.
  std::size_t index_of(double t) const;

  friend bool operator==(const UniformGrid&, const UniformGrid&) = default;

 private:
  double horizon_;
  std::size_t n_;
};

struct RealPath {
  UniformGrid grid;
  std::vector<double> values;  // n + 1 entries

  RealPath(UniformGrid g, std::vector<double> v);
  std::size_t size() const noexcept { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }
};

/// Row-major (n + 1) x d matrix of a d-dimensional path.
struct MultiPath {
  UniformGrid grid;
  std::size_t dim;
  std::vector<double> values;

  MultiPath(UniformGrid g, std::size_t d, std::vector<double> v);

  std::span<const double> row(std::size_t i) const {
    return {values.data() + i * dim, dim};
  }
  double at(std::size_t i, std::size_t j) const { return values[i * dim + j]; }
  RealPath column(std::size_t j) const;
};

/// Restriction of a path to the coarser grid of size n (n must divide the
/// path's grid size).
RealPath subsample(const RealPath& path, std::size_t n);
MultiPath subsample(const MultiPath& path, std::size_t n);

/// Seed of one replication. Sub-streams are keyed by a component index, so a
/// d-dimensional path uses components 0..d-1 and auxiliary draws use d, d+1...
struct SeedSpec {
  std::uint64_t master_seed = 0;
  std::uint64_t replication_index = 0;

  std::uint64_t stream_key(std::uint64_t component) const noexcept;
  std::mt19937_64 stream(std::uint64_t component = 0) const;
};

/// Diagnostic line on stderr; the library never prints anything else.
void log_warning(const std::string& message);

/// SplitMix64 finaliser.
std::uint64_t mix64(std::uint64_t x) noexcept;

}  // namespace rvl
