#pragma once

#include <functional>
#include <span>

#include "levymc/jumpdiff.hpp"
#include "levymc/types.hpp"

namespace levymc {

struct McqEstimate {
  double value = 0.0;
  double std_error = 0.0;
  long n_samples = 0;
};

/// Monte Carlo Quadrature estimator on precomputed phi values:
/// (1/h) * mean_j[ phi_j * sum_i zeta(Z_ij) ]. Estimates the Levy integral
/// of phi(x + eta(z)) zeta(z) against nu over the retained tail, smeared by
/// the one-step displacement of the simulated process.
McqEstimate nu_hat_values(std::span<const double> phi_values,
                          std::span<const OneStepSample> samples,
                          const std::function<double(double)>& zeta, double h);

template <class Phi>
McqEstimate nu_hat(Phi&& phi, const std::function<double(double)>& zeta,
                   std::span<const OneStepSample> samples, double h) {
  std::vector<double> vals(samples.size());
  for (std::size_t j = 0; j < samples.size(); ++j) vals[j] = phi(samples[j].landing);
  return nu_hat_values(vals, samples, zeta, h);
}

/// Deterministic oracle for the truncated integro-operator (d = 1):
///   I_kappa[phi](x) = int_{|z|>kappa} ( phi(x + s z) - phi(x)
///                     - 1_{|z|<=1} s z phi'(x) ) nu(dz)
/// by adaptive quadrature to the requested absolute tolerance. Lives here so
/// the CLI can emit side-by-side error tables against the MCQ estimate.
double levy_operator_quadrature(const std::function<double(const Vec&)>& phi,
                                const std::function<Vec(const Vec&)>& grad_phi,
                                const CoefficientField& cf, const LevyMeasure& m,
                                double kappa, double t, const Vec& x,
                                double abs_tol = 1e-9);

/// MCQ estimate of the same operator:
///   nu_hat(phi, 1) - phi(x) * lambda_kappa
///     - grad_phi(x) . s(t,x) * truncated_first_moment(kappa).
/// grad_phi is caller-supplied; inside the scheme it is the D1 estimate.
McqEstimate levy_operator_mcq(const std::function<double(const Vec&)>& phi,
                              const std::function<Vec(const Vec&)>& grad_phi,
                              const CoefficientField& cf, const LevyMeasure& m,
                              double kappa, double t, const Vec& x, double h,
                              std::span<const OneStepSample> samples);

}  // namespace levymc
