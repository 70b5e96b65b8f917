#include "levymc/hjb.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace levymc {

ProblemCheck check_problem(const ControlledProblem& p, const DomainSample& sample) {
  if (p.alpha_grid.empty() || p.beta_grid.empty())
    throw ConfigError("controlled problem: control grids must be nonempty");
  ProblemCheck out;
  out.field = check_field(p.dominating, sample);
  for (const auto& [t, x] : sample) {
    Mat sig = p.dominating.sigma(t, x);
    Mat a_dom = sig * sig.transpose();
    for (double alpha : p.alpha_grid) {
      for (double beta : p.beta_grid) {
        ControlCoeffs cc = p.coeffs(alpha, beta, t, x);
        double bound = cc.a.norm() + cc.b.norm() + std::abs(cc.c) + std::abs(cc.k);
        out.max_coeff_bound = std::max(out.max_coeff_bound, bound);
        Eigen::SelfAdjointEigenSolver<Mat> lower(cc.a);
        Eigen::SelfAdjointEigenSolver<Mat> upper(a_dom - cc.a);
        if (lower.eigenvalues().minCoeff() < -1e-10 ||
            upper.eigenvalues().minCoeff() < -1e-10)
          out.domination_ok = false;
      }
    }
  }
  return out;
}

Mat pseudo_inverse(const Mat& a, double tol) {
  const int d = static_cast<int>(a.rows());
  if (d == 1) {
    Mat out(1, 1);
    out(0, 0) = std::abs(a(0, 0)) > tol ? 1.0 / a(0, 0) : 0.0;
    return out;
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(a);
  Vec inv_vals = es.eigenvalues();
  for (int i = 0; i < d; ++i)
    inv_vals(i) = std::abs(inv_vals(i)) > tol ? 1.0 / inv_vals(i) : 0.0;
  return es.eigenvectors() * inv_vals.asDiagonal() * es.eigenvectors().transpose();
}

ThetaKappa theta_kappa(const ControlledProblem& p, const LevyMeasure& m, double kappa,
                       const DomainSample& sample) {
  if (sample.empty()) throw ConfigError("theta_kappa: empty domain sample");
  const double lam = m.tail_mass(kappa);
  const double tfm = m.truncated_first_moment(kappa);
  ThetaKappa out;
  out.per_control.assign(p.alpha_grid.size(),
                         std::vector<double>(p.beta_grid.size(), 0.0));
  for (std::size_t ai = 0; ai < p.alpha_grid.size(); ++ai) {
    for (std::size_t bi = 0; bi < p.beta_grid.size(); ++bi) {
      double sup = 0.0;
      for (const auto& [t, x] : sample) {
        ControlCoeffs cc = p.coeffs(p.alpha_grid[ai], p.beta_grid[bi], t, x);
        Vec b_kappa = cc.b - cc.s * tfm;
        double quad = 0.25 * b_kappa.dot(pseudo_inverse(cc.a) * b_kappa);
        sup = std::max(sup, std::abs(cc.c + lam + quad));
      }
      out.per_control[ai][bi] = sup;
      out.value = std::max(out.value, sup);
    }
  }
  return out;
}

namespace {

// inf{kappa : theta_kappa <= target} by bisection on the non-increasing map
// kappa |-> theta_kappa, returning the upper bracket end so the target is
// met at the returned point. Brackets expand geometrically first.
double theta_level_crossing(const ControlledProblem& p, const LevyMeasure& m,
                            double target, const DomainSample& sample) {
  auto theta_at = [&](double k) { return theta_kappa(p, m, k, sample).value; };

  if (m.is_finite() && theta_at(0.0) <= target) return 0.0;

  double lo = m.is_finite() ? 0.0 : 1e-10;
  double hi = 1.0;
  int expansions = 0;
  while (theta_at(hi) > target) {
    hi *= 2.0;
    if (++expansions > 60)
      throw NumericError("kappa selection: theta stays above target " +
                         std::to_string(target) + " out to kappa = " +
                         std::to_string(hi));
  }
  if (theta_at(lo) <= target) return lo;
  while (hi - lo > 1e-6) {
    double mid = 0.5 * (lo + hi);
    if (theta_at(mid) <= target)
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

}  // namespace

double select_kappa_convergence(const ControlledProblem& p, const LevyMeasure& m,
                                double h, const DomainSample& sample) {
  if (!(h > 0.0)) throw ConfigError("select_kappa_convergence: h must be positive");
  const double target = 1.0 / std::sqrt(h);
  if (m.is_finite() && theta_kappa(p, m, 0.0, sample).value <= target) return 0.0;
  double kappa_h = theta_level_crossing(p, m, target, sample) + h;
  double achieved = theta_kappa(p, m, kappa_h, sample).value;
  if (achieved > target)
    throw NumericError("select_kappa_convergence postcondition failed: theta = " +
                       std::to_string(achieved) + " > " + std::to_string(target));
  return kappa_h;
}

RateKappaResult select_kappa_rate(const ControlledProblem& p, const LevyMeasure& m,
                                  double h, const DomainSample& sample) {
  if (!(h > 0.0)) throw ConfigError("select_kappa_rate: h must be positive");
  RateKappaResult out;
  out.theta_target = std::pow(h, -3.0 / 8.0);
  out.moment_target = std::sqrt(h);
  double kappa = theta_level_crossing(p, m, out.theta_target, sample);
  out.kappa = kappa;
  out.theta_achieved = theta_kappa(p, m, kappa, sample).value;
  out.moment_achieved = m.small_jump_second_moment(kappa);
  // theta is non-increasing and the second moment non-decreasing in kappa,
  // so the theta-minimal kappa is feasible iff anything is.
  if (out.moment_achieved <= out.moment_target) {
    out.feasible = true;
  } else {
    out.failed_condition =
        "small-jump second moment: the smallest kappa meeting theta <= h^{-3/8} "
        "(kappa = " + std::to_string(kappa) + ") has second moment " +
        std::to_string(out.moment_achieved) + " > h^{1/2} = " +
        std::to_string(out.moment_target);
  }
  return out;
}

FEvaluation evaluate_F_detailed(const ControlledProblem& p, const LevyMeasure& m,
                                double kappa, double t, const Vec& x,
                                const DerivativeTriple& triple, const NuHatTable& nu_hats,
                                double theta, double T_minus_t) {
  const std::size_t na = p.alpha_grid.size();
  const std::size_t nb = p.beta_grid.size();
  if (nu_hats.size() != na)
    throw ConfigError("evaluate_F: nu_hat table is missing control entries");
  for (const auto& row : nu_hats)
    if (row.size() != nb)
      throw ConfigError("evaluate_F: nu_hat table is missing control entries");

  const double lam = m.tail_mass(kappa);
  const double tfm = m.truncated_first_moment(kappa);
  const double k_scale = std::exp(theta * T_minus_t);

  FEvaluation best;
  best.value = std::numeric_limits<double>::infinity();
  for (std::size_t ai = 0; ai < na; ++ai) {
    double inner = -std::numeric_limits<double>::infinity();
    int inner_bi = 0;
    for (std::size_t bi = 0; bi < nb; ++bi) {
      ControlCoeffs cc = p.coeffs(p.alpha_grid[ai], p.beta_grid[bi], t, x);
      double local = 0.5 * cc.a.cwiseProduct(triple.d2).sum() + cc.b.dot(triple.d1) +
                     (cc.c + theta) * triple.d0 + k_scale * cc.k;
      double nonlocal =
          nu_hats[ai][bi].value - triple.d0 * lam - triple.d1.dot(cc.s) * tfm;
      double value = local + nonlocal;
      if (value > inner) {
        inner = value;
        inner_bi = static_cast<int>(bi);
      }
    }
    if (inner < best.value) {
      best.value = inner;
      best.alpha_index = static_cast<int>(ai);
      best.beta_index = inner_bi;
    }
  }
  return best;
}

double evaluate_F(const ControlledProblem& p, const LevyMeasure& m, double kappa,
                  double t, const Vec& x, const DerivativeTriple& triple,
                  const NuHatTable& nu_hats) {
  return evaluate_F_detailed(p, m, kappa, t, x, triple, nu_hats).value;
}

double evaluate_F_monotonized(const ControlledProblem& p, const LevyMeasure& m,
                              double kappa, double t, const Vec& x,
                              const DerivativeTriple& triple, const NuHatTable& nu_hats,
                              const ThetaKappa& theta, double T_minus_t) {
  return evaluate_F_detailed(p, m, kappa, t, x, triple, nu_hats, theta.value, T_minus_t)
      .value;
}

}  // namespace levymc
