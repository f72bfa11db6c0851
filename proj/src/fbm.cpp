#include "rvl/fbm.h"

#include <fftw3.h>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <mutex>
#include <sstream>

namespace rvl {

double covariance(HurstParam h, double t, double s) {
  if (t < 0.0 || s < 0.0) throw std::domain_error("covariance requires t, s >= 0");
  const double two_h = 2.0 * h.value();
  return 0.5 * (std::pow(t, two_h) + std::pow(s, two_h) - std::pow(std::abs(t - s), two_h));
}

double fgn_autocovariance(HurstParam h, std::size_t lag, double dt) {
  if (!(dt > 0.0)) throw std::domain_error("fgn_autocovariance requires dt > 0");
  const double two_h = 2.0 * h.value();
  const double k = static_cast<double>(lag);
  const double below = lag == 0 ? 1.0 : std::pow(k - 1.0, two_h);
  const double kernel = 0.5 * (std::pow(k + 1.0, two_h) + below - 2.0 * std::pow(k, two_h));
  return kernel * std::pow(dt, two_h);
}

const char* to_string(SamplerKind kind) {
  return kind == SamplerKind::cholesky ? "cholesky" : "circulant";
}

SamplerKind sampler_from_string(const std::string& name) {
  if (name == "cholesky") return SamplerKind::cholesky;
  if (name == "circulant") return SamplerKind::circulant;
  throw std::invalid_argument("unknown sampler '" + name + "' (expected cholesky|circulant)");
}

// ---------------------------------------------------------------------------
// Cholesky

CholeskySampler::CholeskySampler(HurstParam h, UniformGrid grid) : h_(h), grid_(grid) {
  const std::size_t n = grid.size();
  if (n > max_size)
    throw std::invalid_argument("Cholesky sampler limited to n <= " + std::to_string(max_size));

  Eigen::MatrixXd gram(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j)
      gram(i, j) = gram(j, i) = covariance(h, grid.node(i + 1), grid.node(j + 1));

  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  if (llt.info() != Eigen::Success) {
    const double jitter = 1e-12 * gram.trace() / static_cast<double>(n);
    log_warning("covariance matrix not positive definite; adding diagonal jitter " +
                std::to_string(jitter));
    gram.diagonal().array() += jitter;
    llt.compute(gram);
    jittered_ = true;
    if (llt.info() != Eigen::Success)
      throw NumericalError("Cholesky factorisation failed after jitter (n = " +
                           std::to_string(n) + ", H = " + std::to_string(h.value()) + ")");
  }

  const Eigen::MatrixXd lower = llt.matrixL();
  lower_.resize(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) lower_[i * n + j] = lower(i, j);
}

RealPath CholeskySampler::sample(const SeedSpec& seed, std::size_t component) const {
  const std::size_t n = grid_.size();
  auto gen = seed.stream(component);
  std::normal_distribution<double> normal;
  std::vector<double> z(n);
  for (auto& x : z) x = normal(gen);

  std::vector<double> v(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = lower_.data() + i * n;
    double acc = 0.0;
    for (std::size_t j = 0; j <= i; ++j) acc += row[j] * z[j];
    v[i + 1] = acc;
  }
  return {grid_, std::move(v)};
}

// ---------------------------------------------------------------------------
// Circulant embedding

namespace {

// FFTW planning is not thread-safe; execution with the new-array interface is.
std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

struct CirculantSampler::Plan {
  explicit Plan(std::size_t size) : size(size) {
    std::vector<std::complex<double>> scratch(size);
    auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
    std::lock_guard lock(fftw_planner_mutex());
    plan = fftw_plan_dft_1d(static_cast<int>(size), buf, buf, FFTW_FORWARD,
                            FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (plan == nullptr) throw NumericalError("FFTW planning failed");
  }
  ~Plan() {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(plan);
  }
  Plan(const Plan&) = delete;
  Plan& operator=(const Plan&) = delete;

  void forward(std::vector<std::complex<double>>& data) const {
    auto* buf = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(plan, buf, buf);
  }

  std::size_t size;
  fftw_plan plan = nullptr;
};

std::vector<double> circulant_eigenvalues(HurstParam h, std::size_t n, double dt) {
  if (n == 0) throw std::invalid_argument("circulant embedding needs n >= 1");
  const std::size_t m = 2 * n;
  std::vector<std::complex<double>> row(m);
  // c = (g0, g1, ..., g_{n-1}, g_n, g_{n-1}, ..., g1)
  for (std::size_t k = 0; k <= n; ++k) row[k] = fgn_autocovariance(h, k, dt);
  for (std::size_t k = n + 1; k < m; ++k) row[k] = row[m - k];

  std::vector<std::complex<double>> out(m);
  {
    auto* in = reinterpret_cast<fftw_complex*>(row.data());
    auto* o = reinterpret_cast<fftw_complex*>(out.data());
    fftw_plan p;
    {
      std::lock_guard lock(fftw_planner_mutex());
      p = fftw_plan_dft_1d(static_cast<int>(m), in, o, FFTW_FORWARD, FFTW_ESTIMATE);
    }
    fftw_execute(p);
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(p);
  }
  std::vector<double> eig(m);
  for (std::size_t k = 0; k < m; ++k) eig[k] = out[k].real();
  return eig;
}

CirculantSampler::CirculantSampler(HurstParam h, UniformGrid grid)
    : h_(h), grid_(grid), eigenvalues_(circulant_eigenvalues(h, grid.size(), grid.step())) {
  const std::size_t m = eigenvalues_.size();
  const auto [lo, hi] = std::minmax_element(eigenvalues_.begin(), eigenvalues_.end());
  const double tol = eigen_tolerance * *hi;
  if (*lo < -tol) {
    std::ostringstream msg;
    msg << "circulant embedding failed: minimum eigenvalue " << *lo << " below -" << tol;
    throw NumericalError(msg.str());
  }
  scale_.resize(m);
  for (std::size_t k = 0; k < m; ++k) {
    double lambda = eigenvalues_[k];
    if (lambda < 0.0) {
      lambda = 0.0;
      ++clamped_;
    }
    scale_[k] = std::sqrt(lambda / static_cast<double>(m));
  }
  if (clamped_ > 0)
    log_warning("clamped " + std::to_string(clamped_) +
                " slightly negative circulant eigenvalues to zero (min " + std::to_string(*lo) +
                ")");
  plan_ = std::make_unique<Plan>(m);
}

CirculantSampler::~CirculantSampler() = default;

RealPath CirculantSampler::sample(const SeedSpec& seed, std::size_t component) const {
  const std::size_t n = grid_.size();
  const std::size_t m = scale_.size();
  auto gen = seed.stream(component);
  std::normal_distribution<double> normal;

  std::vector<std::complex<double>> w(m);
  for (std::size_t k = 0; k < m; ++k) {
    const double re = normal(gen);
    const double im = normal(gen);
    w[k] = {scale_[k] * re, scale_[k] * im};
  }
  plan_->forward(w);

  // Real part of the first n entries has the fGn covariance.
  std::vector<double> v(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) v[i + 1] = v[i] + w[i].real();
  return {grid_, std::move(v)};
}

// ---------------------------------------------------------------------------

FbmSampler::FbmSampler(HurstParam h, UniformGrid grid, SamplerKind kind)
    : h_(h), grid_(grid), kind_(kind) {
  if (kind == SamplerKind::cholesky)
    cholesky_ = std::make_shared<const CholeskySampler>(h, grid);
  else
    circulant_ = std::make_shared<const CirculantSampler>(h, grid);
}

RealPath FbmSampler::sample(const SeedSpec& seed, std::size_t component) const {
  return cholesky_ ? cholesky_->sample(seed, component) : circulant_->sample(seed, component);
}

MultiPath FbmSampler::sample_multi(std::size_t dim, const SeedSpec& seed) const {
  if (dim == 0) throw std::invalid_argument("dimension must be at least 1");
  const std::size_t rows = grid_.size() + 1;
  std::vector<double> v(rows * dim);
  for (std::size_t j = 0; j < dim; ++j) {
    const RealPath col = sample(seed, j);
    for (std::size_t i = 0; i < rows; ++i) v[i * dim + j] = col.values[i];
  }
  return {grid_, dim, std::move(v)};
}

RealPath sample_fbm_cholesky(HurstParam h, const UniformGrid& grid, const SeedSpec& seed) {
  return CholeskySampler(h, grid).sample(seed);
}

RealPath sample_fbm_circulant(HurstParam h, const UniformGrid& grid, const SeedSpec& seed) {
  return CirculantSampler(h, grid).sample(seed);
}

MultiPath sample_fbm_multi(HurstParam h, std::size_t dim, const UniformGrid& grid,
                           const SeedSpec& seed, SamplerKind kind) {
  return FbmSampler(h, grid, kind).sample_multi(dim, seed);
}

}  // namespace rvl
