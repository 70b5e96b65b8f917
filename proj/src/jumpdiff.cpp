#include "levymc/jumpdiff.hpp"

#include <cmath>

namespace levymc {

Vec compensated_drift(const CoefficientField& cf, const LevyMeasure& m, double kappa,
                      double t, const Vec& x) {
  Vec drift = cf.mu(t, x);
  if (cf.compensator_override) {
    return drift - cf.compensator_override(m, kappa, t, x);
  }
  double tfm = m.truncated_first_moment(kappa);
  if (tfm != 0.0) drift -= cf.eta_scale(t, x) * tfm;
  return drift;
}

Vec reconstruct_landing(const CoefficientField& cf, const LevyMeasure& m, double kappa,
                        double t, const Vec& x, double h, const Vec& w,
                        std::span<const double> marks) {
  Vec mu_k = compensated_drift(cf, m, kappa, t, x);
  Mat sig = cf.sigma(t, x);
  Vec s = cf.eta_scale(t, x);
  double msum = 0.0;
  for (double z : marks) msum += z;
  return landing_from(x, mu_k, sig, s, h, w, msum);
}

namespace {

// Draw order is fixed (Brownian, count, marks) so substreams reproduce.
OneStepSample draw_step(const Vec& x, const Vec& mu_k, const Mat& sig, const Vec& s,
                        const LevyMeasure& m, double kappa, double lambda_kappa,
                        double h, double sqrt_h, RngStream& rng, const Vec* mirror_w) {
  const int d = static_cast<int>(x.size());
  OneStepSample out;
  if (mirror_w) {
    out.w = -*mirror_w;
  } else {
    out.w.resize(d);
    for (int i = 0; i < d; ++i) out.w(i) = sqrt_h * rng.normal();
  }
  out.n_jumps = rng.poisson(lambda_kappa * h);
  double msum = 0.0;
  if (out.n_jumps > 0) {
    out.marks.reserve(out.n_jumps);
    for (int i = 0; i < out.n_jumps; ++i) {
      double z = m.sample_truncated_jump(kappa, rng);
      out.marks.push_back(z);
      msum += z;
    }
  }
  out.landing = landing_from(x, mu_k, sig, s, h, out.w, msum);
  return out;
}

}  // namespace

OneStepSample euler_step(const CoefficientField& cf, const LevyMeasure& m, double kappa,
                         double t, const Vec& x, double h, RngStream& rng) {
  if (!(h > 0.0)) throw ConfigError("euler_step: h must be positive");
  Vec mu_k = compensated_drift(cf, m, kappa, t, x);
  Mat sig = cf.sigma(t, x);
  Vec s = cf.eta_scale(t, x);
  double lam = m.tail_mass(kappa);
  return draw_step(x, mu_k, sig, s, m, kappa, lam, h, std::sqrt(h), rng, nullptr);
}

void simulate_batch(const CoefficientField& cf, const LevyMeasure& m, double kappa,
                    double t, const Vec& x, double h, long count, RngStream& rng,
                    std::vector<OneStepSample>& out, BatchOptions options) {
  if (count < 1) throw ConfigError("simulate_batch: count must be >= 1");
  if (!(h > 0.0)) throw ConfigError("simulate_batch: h must be positive");
  Vec mu_k = compensated_drift(cf, m, kappa, t, x);
  Mat sig = cf.sigma(t, x);
  Vec s = cf.eta_scale(t, x);
  double lam = m.tail_mass(kappa);
  double sqrt_h = std::sqrt(h);
  out.clear();
  out.reserve(count);
  for (long j = 0; j < count; ++j) {
    const Vec* mirror = nullptr;
    if (options.antithetic && (j % 2 == 1)) mirror = &out[j - 1].w;
    out.push_back(draw_step(x, mu_k, sig, s, m, kappa, lam, h, sqrt_h, rng, mirror));
  }
}

std::vector<OneStepSample> simulate_batch(const CoefficientField& cf,
                                          const LevyMeasure& m, double kappa, double t,
                                          const Vec& x, double h, long count,
                                          RngStream& rng, BatchOptions options) {
  std::vector<OneStepSample> out;
  simulate_batch(cf, m, kappa, t, x, h, count, rng, out, options);
  return out;
}

FieldCheck check_field(const CoefficientField& cf, const DomainSample& sample) {
  FieldCheck report;
  // |eta(z)|/(|z| ^ 1) probes; for separable eta this is |s| for |z| <= 1
  // and grows like |s| |z| beyond, so probe a representative band.
  const double z_probes[] = {0.05, 0.25, 0.5, 1.0, 2.0};
  for (const auto& [t, x] : sample) {
    Mat sig = cf.sigma(t, x);
    Eigen::JacobiSVD<Mat> svd(sig);
    double smin = svd.singularValues().minCoeff();
    double smax = svd.singularValues().maxCoeff();
    if (!(smin > 0.0))
      throw NumericError("sigma is singular on the domain sample");
    report.max_sigma_condition = std::max(report.max_sigma_condition, smax / smin);
    Vec s = cf.eta_scale(t, x);
    for (double z : z_probes) {
      double ratio = (s * z).norm() / std::min(z, 1.0);
      report.eta_ratio_bound = std::max(report.eta_ratio_bound, ratio);
    }
  }
  return report;
}

CoefficientField constant_field(const Vec& mu, const Mat& sigma, const Vec& eta_scale) {
  CoefficientField cf;
  cf.dim = static_cast<int>(mu.size());
  cf.mu = [mu](double, const Vec&) { return mu; };
  cf.sigma = [sigma](double, const Vec&) { return sigma; };
  cf.eta_scale = [eta_scale](double, const Vec&) { return eta_scale; };
  return cf;
}

CoefficientField constant_field_1d(double mu, double sigma, double eta_scale) {
  return constant_field(vec1(mu), mat1(sigma), vec1(eta_scale));
}

}  // namespace levymc
