#include "levymc/weights.hpp"

#include <cmath>

namespace levymc {

WeightKernel::WeightKernel(const CoefficientField& cf, double t, const Vec& x) {
  Mat sig = cf.sigma(t, x);
  Eigen::JacobiSVD<Mat> svd(sig, Eigen::ComputeFullU | Eigen::ComputeFullV);
  double smin = svd.singularValues().minCoeff();
  double smax = svd.singularValues().maxCoeff();
  condition_ = smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();
  if (!(smin > 1e-12 * smax) || smax == 0.0)
    throw NumericError("singular sigma at weight evaluation; condition estimate " +
                       std::to_string(condition_));
  sigma_inv_ = sig.inverse();
  sigma_inv_t_ = sigma_inv_.transpose();
}

double weight0() { return 1.0; }

Vec weight1(const CoefficientField& cf, double t, const Vec& x, double h, const Vec& w) {
  return WeightKernel(cf, t, x).h1(w, h);
}

Mat weight2(const CoefficientField& cf, double t, const Vec& x, double h, const Vec& w) {
  return WeightKernel(cf, t, x).h2(w, h);
}

DerivativeTriple estimate_derivatives_values(std::span<const double> psi_values,
                                             std::span<const OneStepSample> samples,
                                             const WeightKernel& kernel, double h) {
  const long n = static_cast<long>(samples.size());
  if (n == 0) throw ConfigError("estimate_derivatives: empty batch");
  if (psi_values.size() != samples.size())
    throw ConfigError("estimate_derivatives: psi values and batch sizes differ");
  const int d = kernel.dim();

  double s0 = 0.0, s0sq = 0.0;
  Vec s1 = Vec::Zero(d), s1sq = Vec::Zero(d);
  Mat s2 = Mat::Zero(d, d), s2sq = Mat::Zero(d, d);
  for (long j = 0; j < n; ++j) {
    const double v = psi_values[j];
    s0 += v;
    s0sq += v * v;
    Vec t1 = kernel.h1(samples[j].w, h) * v;
    s1 += t1;
    s1sq += t1.cwiseProduct(t1);
    Mat t2 = kernel.h2(samples[j].w, h) * v;
    s2 += t2;
    s2sq += t2.cwiseProduct(t2);
  }

  auto se = [n](double sum, double sumsq) {
    if (n < 2) return 0.0;
    double var = (sumsq - sum * sum / n) / (n - 1);
    return var > 0.0 ? std::sqrt(var / n) : 0.0;
  };

  DerivativeTriple out;
  out.d0 = s0 / n;
  out.d0_se = se(s0, s0sq);
  out.d1 = s1 / n;
  out.d1_se.resize(d);
  for (int i = 0; i < d; ++i) out.d1_se(i) = se(s1(i), s1sq(i));
  Mat raw = s2 / n;
  out.d2 = 0.5 * (raw + raw.transpose());
  out.d2_se.resize(d, d);
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c) out.d2_se(r, c) = se(s2(r, c), s2sq(r, c));
  return out;
}

}  // namespace levymc
