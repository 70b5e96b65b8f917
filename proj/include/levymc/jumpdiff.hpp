#pragma once

#include <functional>
#include <span>
#include <vector>

#include "levymc/levy.hpp"
#include "levymc/rng.hpp"
#include "levymc/types.hpp"

namespace levymc {

/// Drift, diffusion and separable jump amplitude of the dominating linear
/// operator: eta(t, x, z) = eta_scale(t, x) * z. Fields must be defined on
/// the whole computational domain; sigma(t, x) must be invertible there.
struct CoefficientField {
  std::function<Vec(double, const Vec&)> mu;
  std::function<Mat(double, const Vec&)> sigma;
  std::function<Vec(double, const Vec&)> eta_scale;

  // Escape hatch for non-separable amplitudes: when set, this supplies the
  // full compensator integral of eta over {kappa < |z| <= 1} at (t, x) and
  // eta_scale is only used for the jump sum itself.
  std::function<Vec(const LevyMeasure&, double, double, const Vec&)> compensator_override;

  int dim = 1;
};

/// One Euler step with every random ingredient recorded. Weight and MCQ
/// computations read from this record instead of re-simulating.
struct OneStepSample {
  Vec w;                      // Brownian increment over [0, h]
  int n_jumps = 0;            // N_h^kappa
  std::vector<double> marks;  // i.i.d. normalized-tail draws, |Z_i| > kappa
  Vec landing;                // X-hat_h^{t,x,kappa}
};

inline double mark_sum(const OneStepSample& s) {
  double acc = 0.0;
  for (double z : s.marks) acc += z;
  return acc;
}

/// mu_kappa(t,x) = mu(t,x) - eta_scale(t,x) * int_{kappa<|z|<=1} z nu(dz).
Vec compensated_drift(const CoefficientField& cf, const LevyMeasure& m, double kappa,
                      double t, const Vec& x);

// Landing-point arithmetic shared by the simulator and reconstruction, so
// a sample's landing is reproducible bit-exactly from its other fields.
inline Vec landing_from(const Vec& x, const Vec& mu_kappa, const Mat& sigma,
                        const Vec& eta_scale, double h, const Vec& w, double msum) {
  return x + mu_kappa * h + sigma * w + eta_scale * msum;
}

Vec reconstruct_landing(const CoefficientField& cf, const LevyMeasure& m, double kappa,
                        double t, const Vec& x, double h, const Vec& w,
                        std::span<const double> marks);

OneStepSample euler_step(const CoefficientField& cf, const LevyMeasure& m, double kappa,
                         double t, const Vec& x, double h, RngStream& rng);

struct BatchOptions {
  bool antithetic = false;  // mirror the Brownian increment on odd draws
};

/// Independent one-step samples at (t, x); deterministic given the stream.
void simulate_batch(const CoefficientField& cf, const LevyMeasure& m, double kappa,
                    double t, const Vec& x, double h, long count, RngStream& rng,
                    std::vector<OneStepSample>& out, BatchOptions options = {});

std::vector<OneStepSample> simulate_batch(const CoefficientField& cf,
                                          const LevyMeasure& m, double kappa, double t,
                                          const Vec& x, double h, long count,
                                          RngStream& rng, BatchOptions options = {});

/// Domain spot-check report for a coefficient field.
struct FieldCheck {
  double max_sigma_condition = 0.0;  // max condition number of sigma over the sample
  double eta_ratio_bound = 0.0;      // max |eta(t,x,z)| / (|z| ^ 1) over probes
};

using DomainSample = std::vector<std::pair<double, Vec>>;

FieldCheck check_field(const CoefficientField& cf, const DomainSample& sample);

// Convenience constructors for constant-coefficient fields.
CoefficientField constant_field(const Vec& mu, const Mat& sigma, const Vec& eta_scale);
CoefficientField constant_field_1d(double mu, double sigma, double eta_scale);

}  // namespace levymc
