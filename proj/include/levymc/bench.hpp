#pragma once

#include <complex>
#include <memory>
#include <optional>
#include <string>

#include "levymc/fdoracle.hpp"
#include "levymc/scheme.hpp"

namespace levymc {

/// A named benchmark problem plus an oracle that never touches the scheme,
/// weight, or MCQ estimator code paths: truncated-symbol quadrature for
/// linear-symbol, a compound-Poisson conditioning series for merton-linear,
/// and a monotone implicit finite-difference solve for concave-hjb-toy.
struct BenchmarkProblem {
  std::string key;
  ControlledProblem problem;
  LevyMeasure measure = LevyMeasure::gaussian_jumps(0.0, 0.0, 1.0);
  std::function<double(const Vec&)> terminal;
  double T = 1.0;
  double wave_number = 1.0;  // u in g(x) = cos(u x)
  SpatialGrid grid;          // default box and spacing
  double interior_halfwidth = 1.0;
  KappaRule default_rule = KappaRule::Convergence;
  double fixed_kappa = 0.0;

  // fd-oracle resolution (concave-hjb-toy)
  int fd_refine_space = 10;
  int fd_steps = 250;
  mutable std::shared_ptr<FdResult> fd_cache;
};

BenchmarkProblem make_problem(const std::string& key);
std::vector<std::string> problem_keys();

/// Oracle solution value at (t, x). Errors out for portfolio-nu0, whose
/// target is the closed-form nonlinearity below rather than a surface.
double oracle_value(const BenchmarkProblem& prob, double t, const Vec& x);

/// Truncated Levy symbol Psi(u) by quadrature (eta(z) = z):
/// i u mu_kappa - sigma^2 u^2 / 2 + int_{|z|>kappa} (e^{iuz} - 1) nu(dz).
std::complex<double> levy_symbol(const LevyMeasure& m, double mu_kappa, double sigma,
                                 double u, double kappa);

/// sup_theta { theta b p + theta^2 a^2 gamma / 2 } for gamma < 0:
/// -(b p)^2 / (2 a^2 gamma), attained inside theta >= 0 when b p > 0.
double portfolio_closed_form_F(double b, double p, double a, double gamma);

/// Portfolio problem over a finite theta grid; beta carries theta.
BenchmarkProblem make_portfolio_problem(double a_mkt, double b_mkt, double theta_max,
                                        int theta_count);

/// Box-padding validation: the box must clear the interior region by at
/// least 4 * (sigma sqrt(T) + |s| T * capped-abs jump mass).
void check_box_padding(const ControlledProblem& p, const LevyMeasure& m, double kappa,
                       const SpatialGrid& grid, double interior_halfwidth, double T);

struct StudyTemplate {
  long samples_base = 500;        // M at the coarsest rung
  double samples_exponent = 2.0;  // M(h) = base * (h0 / h)^exponent
  double spacing_base = 0.15;     // node spacing at the coarsest rung
  double spacing_exponent = 0.75;
  std::uint64_t seed = 1;
  bool monotonized = false;
  std::optional<KappaRule> rule_override;
  bool fit_slope = true;  // off when the limit is exact and only MC noise remains
};

struct RateReport {
  std::vector<double> ladder;
  std::vector<double> errors;
  std::vector<double> kappas;
  std::vector<double> thetas;
  bool slope_fitted = false;
  double slope = 0.0;
  double slope_r2 = 0.0;
  double noise_floor = 0.0;
};

/// For each rung: select kappa by the configured rule, solve backward, and
/// record the max interior-node error at t = 0; then fit the log-log slope.
/// Validates that the ladder strictly decreases and that every kappa
/// satisfies its rule's postcondition.
RateReport run_convergence_study(const BenchmarkProblem& prob,
                                 std::span<const double> h_ladder,
                                 const StudyTemplate& tmpl);

}  // namespace levymc
