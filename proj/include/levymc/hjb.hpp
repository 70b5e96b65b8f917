#pragma once

#include <functional>
#include <string>
#include <vector>

#include "levymc/jumpdiff.hpp"
#include "levymc/levy.hpp"
#include "levymc/mcq.hpp"
#include "levymc/weights.hpp"

namespace levymc {

/// Coefficients of one controlled linear operator L^{a,b}: Hessian weight a
/// (symmetric PSD, dominated by sigma sigma^T), drift b, zeroth-order c,
/// source k, and separable jump amplitude s.
struct ControlCoeffs {
  Mat a;
  Vec b;
  double c = 0.0;
  double k = 0.0;
  Vec s;
};

/// Inf-sup family of Assumption-style controlled coefficients over finite
/// control grids. A singleton beta grid gives the concave (inf-only) case.
struct ControlledProblem {
  std::vector<double> alpha_grid;
  std::vector<double> beta_grid;
  std::function<ControlCoeffs(double alpha, double beta, double t, const Vec& x)> coeffs;
  CoefficientField dominating;
};

struct ProblemCheck {
  FieldCheck field;
  double max_coeff_bound = 0.0;  // sup over sample of |a|+|b|+|c|+|k|
  bool domination_ok = true;     // 0 <= a^{ab} <= sigma sigma^T in PSD order
};

ProblemCheck check_problem(const ControlledProblem& p, const DomainSample& sample);

/// theta_kappa: per control, the sup over the domain sample of
/// |c + lambda_kappa + (1/4) b_kappa^T (a)^- b_kappa| with
/// b_kappa = b - s * truncated_first_moment(kappa); the overall value is the
/// max across controls. Non-increasing in kappa.
struct ThetaKappa {
  double value = 0.0;
  std::vector<std::vector<double>> per_control;  // [alpha][beta]
};

ThetaKappa theta_kappa(const ControlledProblem& p, const LevyMeasure& m, double kappa,
                       const DomainSample& sample);

/// Moore-Penrose pseudo-inverse via eigendecomposition; eigenvalues below
/// tol are treated as zero (reciprocal-or-zero in d = 1).
Mat pseudo_inverse(const Mat& a, double tol = 1e-12);

/// Truncation level for the convergence regime:
/// kappa_h = inf{kappa : theta_kappa <= h^{-1/2}} + h, and exactly 0 when
/// the measure is finite and theta_0 already meets the target.
double select_kappa_convergence(const ControlledProblem& p, const LevyMeasure& m,
                                double h, const DomainSample& sample);

/// Rate-regime selection: smallest kappa with theta_kappa <= h^{-3/8} and
/// small-jump second moment <= h^{1/2}, or an explicit infeasibility report
/// naming the failing condition. Never falls back silently.
struct RateKappaResult {
  bool feasible = false;
  double kappa = 0.0;
  double theta_target = 0.0;
  double theta_achieved = 0.0;
  double moment_target = 0.0;
  double moment_achieved = 0.0;
  std::string failed_condition;  // empty when feasible
};

RateKappaResult select_kappa_rate(const ControlledProblem& p, const LevyMeasure& m,
                                  double h, const DomainSample& sample);

/// Per-control MCQ estimates feeding the nonlocal term of F, indexed
/// [alpha][beta]; shapes must match the control grids.
using NuHatTable = std::vector<std::vector<McqEstimate>>;

struct FEvaluation {
  double value = 0.0;
  int alpha_index = 0;
  int beta_index = 0;
};

/// Discretized nonlinearity:
///   min over alpha of max over beta of
///     1/2 a . d2 + b . d1 + (c + theta) d0 + e^{theta (T-t)} k
///     + [ nu_hat - d0 lambda_kappa - d1 . s * truncated_first_moment ].
/// theta = 0 recovers the plain operator bit-exactly. Reports the optimal
/// control indices alongside the value.
FEvaluation evaluate_F_detailed(const ControlledProblem& p, const LevyMeasure& m,
                                double kappa, double t, const Vec& x,
                                const DerivativeTriple& triple, const NuHatTable& nu_hats,
                                double theta = 0.0, double T_minus_t = 0.0);

double evaluate_F(const ControlledProblem& p, const LevyMeasure& m, double kappa,
                  double t, const Vec& x, const DerivativeTriple& triple,
                  const NuHatTable& nu_hats);

double evaluate_F_monotonized(const ControlledProblem& p, const LevyMeasure& m,
                              double kappa, double t, const Vec& x,
                              const DerivativeTriple& triple, const NuHatTable& nu_hats,
                              const ThetaKappa& theta, double T_minus_t);

}  // namespace levymc
