#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace levymc {

/// Streaming mean/variance accumulator (Welford).
class RunningStat {
 public:
  void add(double x) {
    ++n_;
    double delta = x - mean_;
    mean_ += delta / n_;
    m2_ += delta * (x - mean_);
  }
  long count() const { return n_; }
  double mean() const { return mean_; }
  double variance() const { return n_ > 1 ? m2_ / (n_ - 1) : 0.0; }
  double std_error() const { return n_ > 0 ? std::sqrt(variance() / n_) : 0.0; }

 private:
  long n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

inline LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
    syy += y[i] * y[i];
  }
  LinearFit f;
  double den = n * sxx - sx * sx;
  if (den == 0.0) return f;
  f.slope = (n * sxy - sx * sy) / den;
  f.intercept = (sy - f.slope * sx) / n;
  double ss_tot = syy - sy * sy / n;
  double ss_res = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double e = y[i] - (f.intercept + f.slope * x[i]);
    ss_res += e * e;
  }
  f.r_squared = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
  return f;
}

/// Fit log|y| against log(x); slope is the apparent power-law exponent.
inline LinearFit loglog_fit(std::span<const double> x, std::span<const double> y) {
  std::vector<double> lx(x.size()), ly(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    lx[i] = std::log(x[i]);
    ly[i] = std::log(std::abs(y[i]));
  }
  return linear_fit(lx, ly);
}

}  // namespace levymc
