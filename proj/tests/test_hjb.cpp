#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "levymc/bench.hpp"
#include "levymc/hjb.hpp"

using namespace levymc;

namespace {

// Singleton-control problem with constant coefficients.
ControlledProblem singleton(double a, double b, double c, double k, double s_ctrl,
                            double sigma_dom = 1.0) {
  ControlledProblem p;
  p.alpha_grid = {0.0};
  p.beta_grid = {0.0};
  p.dominating = constant_field_1d(0.0, sigma_dom, 1.0);
  p.coeffs = [=](double, double, double, const Vec&) {
    ControlCoeffs cc;
    cc.a = mat1(a);
    cc.b = vec1(b);
    cc.c = c;
    cc.k = k;
    cc.s = vec1(s_ctrl);
    return cc;
  };
  return p;
}

DomainSample origin_sample() { return {{0.0, vec1(0.0)}}; }

DerivativeTriple triple_of(double d0, double d1, double d2) {
  DerivativeTriple t;
  t.d0 = d0;
  t.d1 = vec1(d1);
  t.d2 = mat1(d2);
  t.d1_se = vec1(0.0);
  t.d2_se = mat1(0.0);
  return t;
}

NuHatTable zero_table(const ControlledProblem& p) {
  return NuHatTable(p.alpha_grid.size(),
                    std::vector<McqEstimate>(p.beta_grid.size()));
}

}  // namespace

TEST_CASE("theta_kappa worked values") {
  LevyMeasure m = LevyMeasure::power_tail(1.0, 1.0);

  SUBCASE("only the tail mass survives when b = c = 0") {
    ControlledProblem p = singleton(1.0, 0.0, 0.0, 0.0, 1.0);
    CHECK(theta_kappa(p, m, 0.5, origin_sample()).value == doctest::Approx(4.0));
  }

  SUBCASE("drift-over-diffusion quadratic term") {
    // a = 1, b = 2, c = 0, symmetric tail: 4 + (1/4) * 4 = 5
    ControlledProblem p = singleton(1.0, 2.0, 0.0, 0.0, 1.0);
    CHECK(theta_kappa(p, m, 0.5, origin_sample()).value == doctest::Approx(5.0));
  }

  SUBCASE("degenerate diffusion uses the pseudo-inverse") {
    ControlledProblem p = singleton(0.0, 0.0, 0.3, 0.0, 1.0);
    CHECK(theta_kappa(p, m, 0.5, origin_sample()).value == doctest::Approx(4.3));
  }

  SUBCASE("non-increasing in kappa") {
    ControlledProblem p = singleton(1.0, 1.0, 0.1, 0.0, 1.0);
    double prev = theta_kappa(p, m, 0.05, origin_sample()).value;
    for (double kappa : {0.1, 0.2, 0.5, 1.0}) {
      double cur = theta_kappa(p, m, kappa, origin_sample()).value;
      CHECK(cur <= prev + 1e-12);
      prev = cur;
    }
  }
}

TEST_CASE("convergence-rule kappa selection") {
  SUBCASE("finite measure already below target returns exactly zero") {
    LevyMeasure m = LevyMeasure::gaussian_jumps(1.0, 0.0, 0.3);
    ControlledProblem p = singleton(1.0, 0.0, 0.0, 0.0, 1.0);
    CHECK(select_kappa_convergence(p, m, 0.04, origin_sample()) == 0.0);
  }

  SUBCASE("power tail closed form: theta = 2/kappa, h = 0.01") {
    LevyMeasure m = LevyMeasure::power_tail(1.0, 1.0);
    ControlledProblem p = singleton(1.0, 0.0, 0.0, 0.0, 1.0);
    double kappa_h = select_kappa_convergence(p, m, 0.01, origin_sample());
    CHECK(kappa_h == doctest::Approx(0.21).epsilon(1e-4));
    CHECK(theta_kappa(p, m, kappa_h, origin_sample()).value <= 10.0);
  }

  SUBCASE("halving h does not increase kappa beyond the +h shift") {
    LevyMeasure m = LevyMeasure::power_tail(1.0, 1.0);
    ControlledProblem p = singleton(1.0, 0.5, 0.1, 0.0, 1.0);
    double prev = 0.0;
    bool first = true;
    for (double h : {0.16, 0.08, 0.04, 0.02, 0.01}) {
      double k = select_kappa_convergence(p, m, h, origin_sample()) - h;
      if (!first) CHECK(k <= prev + 1e-5);
      prev = k;
      first = false;
      CHECK(theta_kappa(p, m, k + h, origin_sample()).value <= 1.0 / std::sqrt(h));
    }
  }
}

TEST_CASE("rate-rule kappa selection") {
  SUBCASE("power tail c = 0.3 is feasible on the study ladder") {
    LevyMeasure m = LevyMeasure::power_tail(0.3, 1.0);
    ControlledProblem p = singleton(1.0, 0.0, 0.0, 0.0, 1.0);
    for (double h : {0.1, 0.05, 0.025, 0.0125}) {
      RateKappaResult r = select_kappa_rate(p, m, h, origin_sample());
      REQUIRE(r.feasible);
      CHECK(r.theta_achieved <= std::pow(h, -3.0 / 8.0));
      CHECK(r.moment_achieved <= std::sqrt(h));
      // closed form: theta = 0.6 / kappa, so kappa = 0.6 h^{3/8}
      CHECK(r.kappa == doctest::Approx(0.6 * std::pow(h, 3.0 / 8.0)).epsilon(1e-3));
      // Theta(sqrt(h)) scaling within a factor of 4
      CHECK(r.kappa >= 0.25 * std::sqrt(h));
      CHECK(r.kappa <= 4.0 * std::sqrt(h));
    }
  }

  SUBCASE("amplitude 1 at alpha = 1 is infeasible at h = 0.01") {
    LevyMeasure m = LevyMeasure::power_tail(1.0, 1.0);
    ControlledProblem p = singleton(1.0, 0.0, 0.0, 0.0, 1.0);
    RateKappaResult r = select_kappa_rate(p, m, 0.01, origin_sample());
    CHECK_FALSE(r.feasible);
    CHECK(r.failed_condition.find("second moment") != std::string::npos);
  }

  SUBCASE("finite measure selects kappa = 0") {
    LevyMeasure m = LevyMeasure::gaussian_jumps(1.0, 0.0, 0.3);
    ControlledProblem p = singleton(1.0, 0.0, 0.0, 0.0, 1.0);
    RateKappaResult r = select_kappa_rate(p, m, 0.04, origin_sample());
    REQUIRE(r.feasible);
    CHECK(r.kappa == 0.0);
  }
}

TEST_CASE("evaluate_F") {
  LevyMeasure empty_tail = LevyMeasure::point_mass(1.0, 0.5);  // kappa = 1
  const double kappa = 1.0;

  SUBCASE("all-zero coefficients give zero") {
    ControlledProblem p = singleton(0.0, 0.0, 0.0, 0.0, 0.0);
    double f = evaluate_F(p, empty_tail, kappa, 0.0, vec1(0.0), triple_of(1.0, 2.0, 3.0),
                          zero_table(p));
    CHECK(f == 0.0);
  }

  SUBCASE("pure second-order term: a = 1, d2 = 2 gives 1") {
    ControlledProblem p = singleton(1.0, 0.0, 0.0, 0.0, 0.0);
    double f = evaluate_F(p, empty_tail, kappa, 0.0, vec1(0.0), triple_of(0.0, 0.0, 2.0),
                          zero_table(p));
    CHECK(f == 1.0);
  }

  SUBCASE("monotone in d2 and in the nu-hat values") {
    ControlledProblem p;
    p.alpha_grid = {0.0, 1.0};
    p.beta_grid = {0.0, 1.0};
    p.dominating = constant_field_1d(0.0, 1.0, 1.0);
    p.coeffs = [](double alpha, double beta, double, const Vec&) {
      ControlCoeffs cc;
      cc.a = mat1(0.2 + 0.5 * alpha);
      cc.b = vec1(0.3 - 0.4 * beta);
      cc.c = -0.1 * alpha;
      cc.k = 0.05 * beta;
      cc.s = vec1(1.0);
      return cc;
    };
    RngStream rng(101);
    for (int trial = 0; trial < 100; ++trial) {
      DerivativeTriple t = triple_of(rng.normal(), rng.normal(), rng.normal());
      NuHatTable table = zero_table(p);
      for (auto& row : table)
        for (auto& cell : row) cell.value = rng.normal();
      double base = evaluate_F(p, empty_tail, kappa, 0.0, vec1(0.0), t, table);

      DerivativeTriple bumped = t;
      bumped.d2(0, 0) += 0.5;
      CHECK(evaluate_F(p, empty_tail, kappa, 0.0, vec1(0.0), bumped, table) >=
            base - 1e-12);

      NuHatTable lifted = table;
      for (auto& row : lifted)
        for (auto& cell : row) cell.value += 0.25;
      CHECK(evaluate_F(p, empty_tail, kappa, 0.0, vec1(0.0), t, lifted) >=
            base - 1e-12);
    }
  }

  SUBCASE("monotonized with theta = 0 coincides bit-exactly") {
    ControlledProblem p = singleton(0.7, 0.4, -0.2, 0.3, 1.0);
    DerivativeTriple t = triple_of(0.8, -0.3, 1.1);
    NuHatTable table = zero_table(p);
    table[0][0].value = 0.6;
    ThetaKappa zero_theta;
    double plain = evaluate_F(p, empty_tail, kappa, 0.0, vec1(0.0), t, table);
    double mono = evaluate_F_monotonized(p, empty_tail, kappa, 0.0, vec1(0.0), t, table,
                                         zero_theta, 0.7);
    CHECK(plain == mono);
  }

  SUBCASE("theta shifts the zeroth-order term by theta * d0") {
    ControlledProblem p = singleton(0.0, 0.0, 0.4, 0.0, 0.0);
    DerivativeTriple t = triple_of(1.0, 0.0, 0.0);
    ThetaKappa theta;
    theta.value = 0.5;
    double plain = evaluate_F(p, empty_tail, kappa, 0.0, vec1(0.0), t, zero_table(p));
    double mono = evaluate_F_monotonized(p, empty_tail, kappa, 0.0, vec1(0.0), t,
                                         zero_table(p), theta, 0.0);
    CHECK(mono - plain == doctest::Approx(0.5));
  }

  SUBCASE("k-term scales by exp(theta (T - t))") {
    ControlledProblem p = singleton(0.0, 0.0, 0.0, 0.3, 0.0);
    DerivativeTriple t = triple_of(0.0, 0.0, 0.0);
    ThetaKappa theta;
    theta.value = 0.5;
    double mono = evaluate_F_monotonized(p, empty_tail, kappa, 0.0, vec1(0.0), t,
                                         zero_table(p), theta, 1.0);
    CHECK(mono == doctest::Approx(0.3 * std::exp(0.5)));
  }

  SUBCASE("missing control entries are an error") {
    ControlledProblem p = singleton(1.0, 0.0, 0.0, 0.0, 1.0);
    NuHatTable empty;
    CHECK_THROWS_AS(
        evaluate_F(p, empty_tail, kappa, 0.0, vec1(0.0), triple_of(0, 0, 0), empty),
        ConfigError);
  }
}

TEST_CASE("portfolio grid supremum approaches the closed form quadratically") {
  // f(theta) = theta b p + theta^2 a^2 gamma / 2 is an exact parabola, so the
  // grid maximum sits within |a^2 gamma| delta^2 / 8 of the supremum.
  const double a = 1.0, b = 0.5, p_grad = 0.8, gamma = -0.9;
  double exact = portfolio_closed_form_F(b, p_grad, a, gamma);

  for (int count : {31, 61, 121}) {
    BenchmarkProblem prob = make_portfolio_problem(a, b, 3.0, count);
    DerivativeTriple t = triple_of(0.0, p_grad, gamma);
    NuHatTable table(1, std::vector<McqEstimate>(count));
    double f = evaluate_F(prob.problem, prob.measure, 0.0, 0.0, vec1(0.0), t, table);
    double delta = 3.0 / (count - 1);
    CHECK(f <= exact + 1e-12);
    CHECK(exact - f <= std::abs(a * a * gamma) * delta * delta / 8.0 + 1e-12);
  }
}

TEST_CASE("problem checks catch domination violations") {
  DomainSample sample = origin_sample();
  ControlledProblem good = singleton(0.8, 0.1, 0.0, 0.0, 1.0);  // a < sigma^2 = 1
  CHECK(check_problem(good, sample).domination_ok);

  ControlledProblem bad = singleton(1.5, 0.1, 0.0, 0.0, 1.0);
  CHECK_FALSE(check_problem(bad, sample).domination_ok);
}
