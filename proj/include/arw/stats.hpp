#pragma once

#include <cstdint>
#include <span>

namespace arw::stats {

struct Interval95 {
  double lo = 0.0;
  double hi = 1.0;
};

/// Exact binomial (Clopper-Pearson) two-sided interval at level 1 - alpha.
Interval95 clopper_pearson(std::uint64_t successes, std::uint64_t trials, double alpha = 0.05);

/// Two-sided p-value of the pooled two-proportion z-test.
double two_proportion_pvalue(std::uint64_t x1, std::uint64_t n1, std::uint64_t x2, std::uint64_t n2);

/// Upper 1 - alpha/2 quantile of Student's t with `dof` degrees of freedom.
double t_quantile(double dof, double alpha = 0.05);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 1.0;
  double slope_se = 0.0;
  std::size_t points = 0;
};

/// Ordinary least squares y = intercept + slope * x.
LinearFit least_squares(std::span<const double> x, std::span<const double> y);

}  // namespace arw::stats
