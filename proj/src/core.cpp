#include "rvl/core.h"

#include <cmath>
#include <iostream>
#include <string>

namespace rvl {

HurstParam::HurstParam(double h) : h_(h) {
  if (!(h > 0.0 && h < 1.0))
    throw GateError("Hurst parameter must lie in (0,1), got " + std::to_string(h));
}

void HurstParam::require_rough(const char* what) const {
  if (!(h_ < 0.5))
    throw GateError(std::string(what) + " requires H < 1/2 (got H = " +
                    std::to_string(h_) + ")");
}

UniformGrid::UniformGrid(double horizon, std::size_t n) : horizon_(horizon), n_(n) {
  if (!(horizon > 0.0) || !std::isfinite(horizon))
    throw std::invalid_argument("grid horizon must be positive and finite");
  if (n == 0) throw std::invalid_argument("grid must have at least one cell");
}

double UniformGrid::node(std::size_t i) const {
  if (i > n_) throw std::out_of_range("grid node index out of range");
  if (i == n_) return horizon_;
  return static_cast<double>(i) * horizon_ / static_cast<double>(n_);
}

std::vector<double> UniformGrid::nodes() const {
  std::vector<double> t(n_ + 1);
  for (std::size_t i = 0; i <= n_; ++i) t[i] = node(i);
  return t;
}

std::size_t UniformGrid::index_of(double t) const {
  const double x = t / horizon_ * static_cast<double>(n_);
  const double k = std::round(x);
  if (k < 0.0 || k > static_cast<double>(n_) || std::abs(x - k) > 1e-9)
    throw std::invalid_argument("time " + std::to_string(t) + " is not a grid node");
  return static_cast<std::size_t>(k);
}

RealPath::RealPath(UniformGrid g, std::vector<double> v) : grid(g), values(std::move(v)) {
  if (values.size() != grid.size() + 1)
    throw std::invalid_argument("path length must be n + 1");
}

MultiPath::MultiPath(UniformGrid g, std::size_t d, std::vector<double> v)
    : grid(g), dim(d), values(std::move(v)) {
  if (d == 0) throw std::invalid_argument("dimension must be at least 1");
  if (values.size() != (grid.size() + 1) * d)
    throw std::invalid_argument("multipath storage must be (n + 1) * d");
}

RealPath MultiPath::column(std::size_t j) const {
  if (j >= dim) throw std::out_of_range("column index out of range");
  std::vector<double> v(grid.size() + 1);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = at(i, j);
  return {grid, std::move(v)};
}

namespace {

std::size_t coarsening_stride(const UniformGrid& fine, std::size_t n) {
  if (n == 0 || fine.size() % n != 0)
    throw std::invalid_argument("coarse grid size must divide the path grid size");
  return fine.size() / n;
}

}  // namespace

RealPath subsample(const RealPath& path, std::size_t n) {
  const std::size_t stride = coarsening_stride(path.grid, n);
  std::vector<double> v(n + 1);
  for (std::size_t i = 0; i <= n; ++i) v[i] = path.values[i * stride];
  return {UniformGrid(path.grid.horizon(), n), std::move(v)};
}

MultiPath subsample(const MultiPath& path, std::size_t n) {
  const std::size_t stride = coarsening_stride(path.grid, n);
  std::vector<double> v((n + 1) * path.dim);
  for (std::size_t i = 0; i <= n; ++i)
    for (std::size_t j = 0; j < path.dim; ++j) v[i * path.dim + j] = path.at(i * stride, j);
  return {UniformGrid(path.grid.horizon(), n), path.dim, std::move(v)};
}

void log_warning(const std::string& message) {
  std::clog << "rvl: warning: " << message << '\n';
}

std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t SeedSpec::stream_key(std::uint64_t component) const noexcept {
  // Chained hashing keeps (a, b, c) and permutations of it on distinct keys.
  return mix64(mix64(mix64(master_seed) ^ replication_index) ^ (component * 0xd1342543de82ef95ULL));
}

std::mt19937_64 SeedSpec::stream(std::uint64_t component) const {
  std::seed_seq seq{static_cast<std::uint32_t>(stream_key(component)),
                    static_cast<std::uint32_t>(stream_key(component) >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace rvl
