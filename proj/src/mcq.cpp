#include "levymc/mcq.hpp"

#include <cmath>

namespace levymc {

McqEstimate nu_hat_values(std::span<const double> phi_values,
                          std::span<const OneStepSample> samples,
                          const std::function<double(double)>& zeta, double h) {
  if (samples.empty()) throw ConfigError("nu_hat: empty batch");
  if (!(h > 0.0)) throw ConfigError("nu_hat: h must be positive");
  const long n = static_cast<long>(samples.size());
  double sum = 0.0, sumsq = 0.0;
  for (long j = 0; j < n; ++j) {
    double y = 0.0;
    for (double z : samples[j].marks) y += zeta(z);
    double term = phi_values[j] * y;
    sum += term;
    sumsq += term * term;
  }
  McqEstimate out;
  out.n_samples = n;
  out.value = sum / (n * h);
  if (n > 1) {
    double var = (sumsq - sum * sum / n) / (n - 1);
    out.std_error = var > 0.0 ? std::sqrt(var / n) / h : 0.0;
  }
  return out;
}

double levy_operator_quadrature(const std::function<double(const Vec&)>& phi,
                                const std::function<Vec(const Vec&)>& grad_phi,
                                const CoefficientField& cf, const LevyMeasure& m,
                                double kappa, double t, const Vec& x, double abs_tol) {
  if (x.size() != 1)
    throw ConfigError("levy_operator_quadrature: only d = 1 is supported");
  const double s = cf.eta_scale(t, x)(0);
  const double phi_x = phi(x);
  const double dphi_x = grad_phi(x)(0);

  auto shifted = [&](double z) { return phi(vec1(x(0) + s * z)); };

  // The |z| <= 1 indicator kinks the integrand, so the band splits there.
  QuadratureResult total;
  auto add = [&](QuadratureResult r) {
    total.value += r.value;
    total.error_estimate += r.error_estimate;
  };
  if (kappa < 1.0) {
    add(m.integrate_abs_band(
        [&](double z) { return shifted(z) - phi_x - s * z * dphi_x; }, kappa, 1.0));
    add(m.integrate_abs_band([&](double z) { return shifted(z) - phi_x; }, 1.0, kInf));
  } else {
    add(m.integrate_abs_band([&](double z) { return shifted(z) - phi_x; }, kappa, kInf));
  }
  if (!(total.error_estimate <= abs_tol))
    throw NumericError("levy_operator_quadrature did not converge: achieved " +
                       format_sci(total.error_estimate) + " > tolerance " +
                       format_sci(abs_tol));
  return total.value;
}

McqEstimate levy_operator_mcq(const std::function<double(const Vec&)>& phi,
                              const std::function<Vec(const Vec&)>& grad_phi,
                              const CoefficientField& cf, const LevyMeasure& m,
                              double kappa, double t, const Vec& x, double h,
                              std::span<const OneStepSample> samples) {
  McqEstimate nu = nu_hat(phi, [](double) { return 1.0; }, samples, h);
  double lam = m.tail_mass(kappa);
  double tfm = m.truncated_first_moment(kappa);
  Vec s = cf.eta_scale(t, x);
  McqEstimate out = nu;
  out.value = nu.value - phi(x) * lam - grad_phi(x).dot(s) * tfm;
  return out;
}

}  // namespace levymc
