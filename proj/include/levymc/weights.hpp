#pragma once

#include <functional>
#include <span>

#include "levymc/jumpdiff.hpp"
#include "levymc/types.hpp"

namespace levymc {

/// Estimates of E[psi(t+h, X-hat)], its gradient and Hessian at (t, x),
/// with componentwise standard errors. d2 is symmetrized on construction.
struct DerivativeTriple {
  double d0 = 0.0;
  Vec d1;
  Mat d2;
  double d0_se = 0.0;
  Vec d1_se;
  Mat d2_se;
};

/// Weight functions attached to one (t, x): H0 = 1, H1 = (sigma^T)^{-1} w/h,
/// H2 = (sigma^T)^{-1} (w w^T - h I) / h^2 sigma^{-1}. sigma^{-1} is computed
/// once here and reused across the whole batch.
class WeightKernel {
 public:
  WeightKernel(const CoefficientField& cf, double t, const Vec& x);

  double h0() const { return 1.0; }
  Vec h1(const Vec& w, double h) const { return sigma_inv_t_ * (w / h); }
  Mat h2(const Vec& w, double h) const {
    Mat core = w * w.transpose();
    core.diagonal().array() -= h;
    return sigma_inv_t_ * (core / (h * h)) * sigma_inv_;
  }

  double condition() const { return condition_; }
  int dim() const { return static_cast<int>(sigma_inv_.rows()); }

 private:
  Mat sigma_inv_, sigma_inv_t_;
  double condition_ = 0.0;
};

/// Weight of order k at one sample; thin wrapper over WeightKernel for
/// call sites that want a single draw rather than a batch.
double weight0();
Vec weight1(const CoefficientField& cf, double t, const Vec& x, double h, const Vec& w);
Mat weight2(const CoefficientField& cf, double t, const Vec& x, double h, const Vec& w);

/// Batch estimator using precomputed psi values (one per sample):
/// dk = mean of psi_j * Hk(w_j). The Hessian estimate is symmetrized.
DerivativeTriple estimate_derivatives_values(std::span<const double> psi_values,
                                             std::span<const OneStepSample> samples,
                                             const WeightKernel& kernel, double h);

/// Convenience overload evaluating psi at each landing point.
template <class Psi>
DerivativeTriple estimate_derivatives(Psi&& psi, std::span<const OneStepSample> samples,
                                      const CoefficientField& cf, double t, const Vec& x,
                                      double h) {
  if (samples.empty()) throw ConfigError("estimate_derivatives: empty batch");
  WeightKernel kernel(cf, t, x);
  std::vector<double> vals(samples.size());
  for (std::size_t j = 0; j < samples.size(); ++j) vals[j] = psi(samples[j].landing);
  return estimate_derivatives_values(vals, samples, kernel, h);
}

}  // namespace levymc
