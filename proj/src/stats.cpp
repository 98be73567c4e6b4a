#include "arw/stats.hpp"

#include <boost/math/distributions/beta.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <stdexcept>

namespace arw::stats {

Interval95 clopper_pearson(std::uint64_t successes, std::uint64_t trials, double alpha) {
  if (trials == 0) return {0.0, 1.0};
  if (successes > trials) throw std::invalid_argument("successes exceed trials");
  const auto x = static_cast<double>(successes);
  const auto n = static_cast<double>(trials);
  Interval95 ci;
  ci.lo = successes == 0 ? 0.0 : boost::math::quantile(boost::math::beta_distribution<>(x, n - x + 1), alpha / 2);
  ci.hi = successes == trials ? 1.0
                              : boost::math::quantile(boost::math::beta_distribution<>(x + 1, n - x), 1 - alpha / 2);
  return ci;
}

double two_proportion_pvalue(std::uint64_t x1, std::uint64_t n1, std::uint64_t x2, std::uint64_t n2) {
  if (n1 == 0 || n2 == 0) throw std::invalid_argument("two-proportion test needs non-empty samples");
  const double p1 = static_cast<double>(x1) / static_cast<double>(n1);
  const double p2 = static_cast<double>(x2) / static_cast<double>(n2);
  const double pooled = static_cast<double>(x1 + x2) / static_cast<double>(n1 + n2);
  const double var = pooled * (1 - pooled) * (1.0 / static_cast<double>(n1) + 1.0 / static_cast<double>(n2));
  if (var <= 0.0) return 1.0;
  const double z = (p1 - p2) / std::sqrt(var);
  return std::erfc(std::abs(z) / std::sqrt(2.0));
}

double t_quantile(double dof, double alpha) {
  return boost::math::quantile(boost::math::students_t_distribution<>(dof), 1 - alpha / 2);
}

LinearFit least_squares(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("least_squares: length mismatch");
  if (x.size() < 2) throw std::invalid_argument("least_squares: need at least two points");
  const auto n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) mx += x[i], my += y[i];
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("least_squares: x values must not all coincide");
  LinearFit f;
  f.points = x.size();
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ssr = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (f.intercept + f.slope * x[i]);
    ssr += r * r;
  }
  // A flat response is fitted exactly by a zero slope.
  f.r_squared = syy > 0.0 ? 1.0 - ssr / syy : 1.0;
  f.slope_se = x.size() > 2 ? std::sqrt(ssr / (n - 2) / sxx) : 0.0;
  return f;
}

}  // namespace arw::stats
