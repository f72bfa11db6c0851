#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace rvl {

/// Neumaier-compensated running sum; terms are added in call order.
class CompensatedSum {
 public:
  void add(double x) noexcept;
  double value() const noexcept { return sum_ + compensation_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

double compensated_sum(std::span<const double> xs) noexcept;

struct Aggregate {
  double mean = 0.0;
  std::optional<double> std_error;  // empty for a single value
  std::size_t count = 0;
};

/// Mean by compensated summation in index order, standard error by the
/// delete-one jackknife (requires at least two values).
Aggregate aggregate(std::span<const double> values);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

/// Ordinary least squares y = intercept + slope x; needs >= 3 points with
/// distinct abscissae.
LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

struct KsResult {
  double statistic = 0.0;  // sup |F_a - F_b|
  double p_value = 1.0;
};

/// Two-sample Kolmogorov-Smirnov test with the asymptotic Kolmogorov
/// distribution at effective size n_a n_b / (n_a + n_b) (Stephens'
/// small-sample correction of the argument).
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

/// Kolmogorov survival function Q(lambda) = 2 sum_{k>=1} (-1)^{k-1} e^{-2 k^2 lambda^2}.
double kolmogorov_survival(double lambda);

}  // namespace rvl
