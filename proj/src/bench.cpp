#include "levymc/bench.hpp"

#include <algorithm>
#include <cmath>

#include "levymc/stats.hpp"

namespace levymc {

namespace {

SpatialGrid grid_for_spacing(double lo, double hi, double dx) {
  int count = std::max(2, 1 + static_cast<int>(std::ceil((hi - lo) / dx - 1e-9)));
  return SpatialGrid::uniform_1d(lo, hi, count);
}

ControlledProblem zero_control_problem(CoefficientField dominating) {
  ControlledProblem p;
  p.alpha_grid = {0.0};
  p.beta_grid = {0.0};
  int d = dominating.dim;
  p.coeffs = [d](double, double, double, const Vec&) {
    ControlCoeffs cc;
    cc.a = Mat::Zero(d, d);
    cc.b = Vec::Zero(d);
    cc.s = Vec::Zero(d);
    return cc;
  };
  p.dominating = std::move(dominating);
  return p;
}

std::function<double(const Vec&)> cos_terminal(double u) {
  return [u](const Vec& x) { return std::cos(u * x(0)); };
}

// Poisson-conditioning series for the constant-coefficient linear problem
// with Gaussian jump sizes and g(x) = cos(u x): conditionally on N = n the
// landing is Gaussian, so each term is closed-form.
double merton_series(const BenchmarkProblem& prob, double t, double x) {
  const LevyMeasure& m = prob.measure;
  const double tau = prob.T - t;
  if (tau <= 0.0) return prob.terminal(vec1(x));
  const double u = prob.wave_number;
  const double mu0 =
      prob.problem.dominating.mu(t, vec1(x))(0) - m.truncated_first_moment(0.0);
  const double sigma = prob.problem.dominating.sigma(t, vec1(x))(0, 0);
  const double lam = m.tail_mass(0.0);
  const double mj = m.jump_mean();
  const double sj = m.jump_stddev();

  const double rate = lam * tau;
  double weight = std::exp(-rate);
  double cumulative = weight;
  double value = 0.0;
  int n = 0;
  for (;;) {
    double mean = x + mu0 * tau + n * mj;
    double var = sigma * sigma * tau + n * sj * sj;
    value += weight * std::exp(-0.5 * u * u * var) * std::cos(u * mean);
    if (cumulative >= 1.0 - 1e-12) break;
    if (++n > 500)
      throw NumericError("merton series did not converge: Poisson tail " +
                         std::to_string(1.0 - cumulative) + " after 500 terms");
    weight *= rate / n;
    cumulative += weight;
  }
  return value;
}

const FdResult& fd_oracle(const BenchmarkProblem& prob) {
  if (!prob.fd_cache) {
    int nx = (prob.grid.counts[0] - 1) * prob.fd_refine_space + 1;
    SpatialGrid fine = SpatialGrid::uniform_1d(prob.grid.lo(0), prob.grid.hi(0), nx);
    prob.fd_cache = std::make_shared<FdResult>(
        solve_fd_concave(prob.problem, prob.measure, prob.fixed_kappa, prob.T,
                         prob.terminal, fine, prob.fd_steps));
  }
  return *prob.fd_cache;
}

}  // namespace

std::complex<double> levy_symbol(const LevyMeasure& m, double mu_kappa, double sigma,
                                 double u, double kappa) {
  double re_jump = 0.0, im_jump = 0.0;
  if (m.tail_mass(kappa) > 0.0) {
    re_jump = integrate_abs_band_checked(
        m, [u](double z) { return std::cos(u * z) - 1.0; }, kappa, kInf, 1e-10);
    im_jump = integrate_abs_band_checked(
        m, [u](double z) { return std::sin(u * z); }, kappa, kInf, 1e-10);
  }
  return {-0.5 * sigma * sigma * u * u + re_jump, u * mu_kappa + im_jump};
}

double portfolio_closed_form_F(double b, double p, double a, double gamma) {
  if (!(gamma < 0.0)) throw ConfigError("portfolio closed form requires gamma < 0");
  if (b * p <= 0.0) return 0.0;  // supremum sits at theta = 0
  return -(b * p) * (b * p) / (2.0 * a * a * gamma);
}

std::vector<std::string> problem_keys() {
  return {"linear-symbol", "merton-linear", "concave-hjb-toy", "portfolio-nu0"};
}

BenchmarkProblem make_problem(const std::string& key) {
  BenchmarkProblem prob;
  prob.key = key;
  if (key == "linear-symbol") {
    prob.measure = LevyMeasure::gaussian_jumps(0.3, 0.1, 0.25);
    prob.problem = zero_control_problem(constant_field_1d(0.1, 0.3, 1.0));
    prob.wave_number = 1.0;
    prob.terminal = cos_terminal(prob.wave_number);
    prob.T = 1.0;
    prob.grid = grid_for_spacing(-3.2, 3.2, 0.025);
    prob.interior_halfwidth = 1.0;
  } else if (key == "merton-linear") {
    prob.measure = LevyMeasure::gaussian_jumps(0.4, -0.1, 0.3);
    prob.problem = zero_control_problem(constant_field_1d(0.05, 0.25, 1.0));
    prob.wave_number = 1.0;
    prob.terminal = cos_terminal(prob.wave_number);
    prob.T = 1.0;
    prob.grid = grid_for_spacing(-3.4, 3.4, 0.025);
    prob.interior_halfwidth = 1.0;
  } else if (key == "concave-hjb-toy") {
    prob.measure = LevyMeasure::point_mass(0.5, 0.4);
    ControlledProblem p;
    p.alpha_grid = {0.0, 1.0};
    p.beta_grid = {0.0};
    p.dominating = constant_field_1d(0.0, 1.0, 1.0);
    p.coeffs = [](double alpha, double, double, const Vec&) {
      ControlCoeffs cc;
      cc.s = vec1(1.0);
      if (alpha < 0.5) {
        cc.a = mat1(0.2);
        cc.b = vec1(-0.3);
        cc.c = -0.2;
        cc.k = 0.0;
      } else {
        cc.a = mat1(0.6);
        cc.b = vec1(0.3);
        cc.c = 0.0;
        cc.k = 0.15;
      }
      return cc;
    };
    prob.problem = std::move(p);
    prob.wave_number = 1.0;
    prob.terminal = cos_terminal(prob.wave_number);
    prob.T = 0.5;
    prob.grid = grid_for_spacing(-4.4, 4.4, 0.05);
    prob.interior_halfwidth = 1.0;
    prob.default_rule = KappaRule::Fixed;
    prob.fixed_kappa = 0.0;
    prob.fd_refine_space = 10;
    prob.fd_steps = 250;
  } else if (key == "portfolio-nu0") {
    prob = make_portfolio_problem(1.0, 0.5, 3.0, 31);
  } else {
    throw ConfigError("unknown problem key '" + key + "'");
  }
  return prob;
}

BenchmarkProblem make_portfolio_problem(double a_mkt, double b_mkt, double theta_max,
                                        int theta_count) {
  BenchmarkProblem prob;
  prob.key = "portfolio-nu0";
  prob.measure = LevyMeasure::gaussian_jumps(0.0, 0.0, 1.0);  // nu = 0
  ControlledProblem p;
  p.alpha_grid = {0.0};
  p.beta_grid.resize(theta_count);
  for (int i = 0; i < theta_count; ++i)
    p.beta_grid[i] = theta_max * i / (theta_count - 1);
  p.dominating = constant_field_1d(0.0, theta_max * a_mkt, theta_max);
  p.coeffs = [a_mkt, b_mkt](double, double theta, double, const Vec&) {
    ControlCoeffs cc;
    cc.a = mat1(theta * theta * a_mkt * a_mkt);
    cc.b = vec1(theta * b_mkt);
    cc.s = vec1(theta);
    return cc;
  };
  prob.problem = std::move(p);
  prob.terminal = cos_terminal(1.0);
  prob.T = 1.0;
  prob.grid = grid_for_spacing(-3.0, 3.0, 0.1);
  prob.interior_halfwidth = 1.0;
  prob.default_rule = KappaRule::Fixed;
  return prob;
}

double oracle_value(const BenchmarkProblem& prob, double t, const Vec& x) {
  if (prob.key == "linear-symbol") {
    double kappa = prob.fixed_kappa;  // 0 for the finite benchmark measures
    double mu = prob.problem.dominating.mu(t, x)(0);
    double sigma = prob.problem.dominating.sigma(t, x)(0, 0);
    double mu_kappa = mu - prob.measure.truncated_first_moment(kappa);
    std::complex<double> psi =
        levy_symbol(prob.measure, mu_kappa, sigma, prob.wave_number, kappa);
    double tau = prob.T - t;
    return std::exp(tau * psi.real()) *
           std::cos(prob.wave_number * x(0) + tau * psi.imag());
  }
  if (prob.key == "merton-linear") return merton_series(prob, t, x(0));
  if (prob.key == "concave-hjb-toy") return fd_oracle(prob).value(t, x);
  throw ConfigError("problem '" + prob.key + "' has no surface oracle");
}

void check_box_padding(const ControlledProblem& p, const LevyMeasure& m, double kappa,
                       const SpatialGrid& grid, double interior_halfwidth, double T) {
  DomainSample sample = scheme_domain_sample(grid, T, 64);
  double sigma_sup = 0.0, s_sup = 0.0;
  for (const auto& [t, x] : sample) {
    sigma_sup = std::max(sigma_sup, p.dominating.sigma(t, x).norm());
    s_sup = std::max(s_sup, p.dominating.eta_scale(t, x).norm());
  }
  double spread = sigma_sup * std::sqrt(T) + s_sup * T * m.capped_abs_tail(kappa);
  double required = 4.0 * spread;
  for (int d = 0; d < grid.dim(); ++d) {
    double pad = std::min(-interior_halfwidth - grid.lo(d),
                          grid.hi(d) - interior_halfwidth);
    if (pad + 1e-12 < required)
      throw ConfigError("box padding " + std::to_string(pad) +
                        " is below the required 4x spread " +
                        std::to_string(required) +
                        "; enlarge the box or shrink the interior region");
  }
}

RateReport run_convergence_study(const BenchmarkProblem& prob,
                                 std::span<const double> h_ladder,
                                 const StudyTemplate& tmpl) {
  if (h_ladder.size() < 2) throw ConfigError("rate study: ladder needs >= 2 rungs");
  for (std::size_t i = 1; i < h_ladder.size(); ++i)
    if (!(h_ladder[i] < h_ladder[i - 1]))
      throw ConfigError("rate study: ladder must be strictly decreasing");

  const double h0 = h_ladder[0];
  RateReport report;
  for (double h : h_ladder) {
    SchemeConfig cfg;
    cfg.T = prob.T;
    cfg.n = static_cast<int>(std::llround(prob.T / h));
    if (std::abs(cfg.n * h - prob.T) > 1e-9 * prob.T)
      throw ConfigError("rate study: h = " + std::to_string(h) +
                        " does not divide T = " + std::to_string(prob.T));
    double dx = tmpl.spacing_base * std::pow(h / h0, tmpl.spacing_exponent);
    cfg.grid = grid_for_spacing(prob.grid.lo(0), prob.grid.hi(0), dx);
    cfg.samples_per_node = static_cast<long>(
        std::llround(tmpl.samples_base * std::pow(h0 / h, tmpl.samples_exponent)));
    cfg.kappa_rule = tmpl.rule_override.value_or(prob.default_rule);
    cfg.fixed_kappa = prob.fixed_kappa;
    cfg.monotonized = tmpl.monotonized;
    cfg.seed = tmpl.seed;

    ValueSurface surf = solve_backward(prob.problem, prob.measure, cfg, prob.terminal);

    DomainSample domain = scheme_domain_sample(cfg.grid, cfg.T);
    double theta = theta_kappa(prob.problem, prob.measure, surf.kappa, domain).value;
    // Re-assert the selection rule's postcondition on the recorded kappa.
    if (cfg.kappa_rule == KappaRule::Convergence && theta > 1.0 / std::sqrt(h))
      throw NumericError("rate study: kappa rule postcondition violated");
    if (cfg.kappa_rule == KappaRule::Rate) {
      if (theta > std::pow(h, -3.0 / 8.0) ||
          prob.measure.small_jump_second_moment(surf.kappa) > std::sqrt(h))
        throw NumericError("rate study: kappa rule postcondition violated");
    }

    double err = 0.0;
    for (long j = 0; j < cfg.grid.size(); ++j) {
      Vec x = cfg.grid.node(j);
      if (std::abs(x(0)) > prob.interior_halfwidth) continue;
      err = std::max(err, std::abs(surf.values[0][j] - oracle_value(prob, 0.0, x)));
    }
    report.ladder.push_back(h);
    report.errors.push_back(err);
    report.kappas.push_back(surf.kappa);
    report.thetas.push_back(theta);
  }

  report.noise_floor = *std::min_element(report.errors.begin(), report.errors.end());
  if (tmpl.fit_slope) {
    LinearFit fit = loglog_fit(report.ladder, report.errors);
    report.slope_fitted = true;
    report.slope = fit.slope;
    report.slope_r2 = fit.r_squared;
  }
  return report;
}

}  // namespace levymc
