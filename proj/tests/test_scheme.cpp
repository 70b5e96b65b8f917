#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "levymc/scheme.hpp"

using namespace levymc;

namespace {

ControlledProblem zero_controls(CoefficientField dom) {
  ControlledProblem p;
  p.alpha_grid = {0.0};
  p.beta_grid = {0.0};
  int d = dom.dim;
  p.coeffs = [d](double, double, double, const Vec&) {
    ControlCoeffs cc;
    cc.a = Mat::Zero(d, d);
    cc.b = Vec::Zero(d);
    cc.s = Vec::Zero(d);
    return cc;
  };
  p.dominating = std::move(dom);
  return p;
}

LevyMeasure empty_tail_measure() { return LevyMeasure::point_mass(1.0, 0.5); }
constexpr double kEmptyTail = 1.0;  // kappa above the atom

}  // namespace

TEST_CASE("multilinear interpolation") {
  SpatialGrid g = SpatialGrid::uniform_1d(-1.0, 1.0, 5);  // spacing 0.5
  std::vector<double> vals = {1.0, 2.0, 4.0, 8.0, 16.0};

  CHECK(g.interpolate(vals, vec1(-0.5)) == 2.0);               // on a node
  CHECK(g.interpolate(vals, vec1(0.25)) == 6.0);               // midpoint mean
  CHECK(g.interpolate(vals, vec1(-3.0)) == 1.0);               // clamped left
  CHECK(g.interpolate(vals, vec1(42.0)) == 16.0);              // clamped right

  SUBCASE("bilinear in two dimensions") {
    SpatialGrid g2;
    g2.lo = Vec::Zero(2);
    g2.hi = Vec::Ones(2);
    g2.counts = {2, 2};
    // values indexed x-fastest: (0,0), (1,0), (0,1), (1,1)
    std::vector<double> v2 = {0.0, 1.0, 2.0, 5.0};
    Vec q(2);
    q << 0.5, 0.5;
    CHECK(g2.interpolate(v2, q) == doctest::Approx(2.0));
    q << 1.0, 1.0;
    CHECK(g2.interpolate(v2, q) == 5.0);
  }
}

TEST_CASE("single step with F = 0 matches direct Monte Carlo bit-exactly") {
  // Empty jump tail makes the nonlocal bracket exactly zero, so T reduces
  // to the one-step average of the interpolated terminal surface.
  CoefficientField dom = constant_field_1d(0.2, 0.8, 1.0);
  ControlledProblem p = zero_controls(dom);
  LevyMeasure m = empty_tail_measure();

  SchemeConfig cfg;
  cfg.T = 0.1;
  cfg.n = 1;
  cfg.grid = SpatialGrid::uniform_1d(-3.0, 3.0, 61);
  cfg.samples_per_node = 2000;
  cfg.fixed_kappa = kEmptyTail;
  cfg.seed = 5;

  auto g = [](const Vec& x) { return std::cos(x(0)); };
  ValueSurface surf = solve_backward(p, m, cfg, g);

  std::vector<double> terminal(cfg.grid.size());
  for (long j = 0; j < cfg.grid.size(); ++j) terminal[j] = g(cfg.grid.node(j));

  for (long node : {0L, 17L, 30L, 60L}) {
    RngStream rng = RngStream::derived(cfg.seed, 0, node);
    auto batch = simulate_batch(dom, m, kEmptyTail, 0.0, cfg.grid.node(node), 0.1,
                                cfg.samples_per_node, rng);
    double acc = 0.0;
    for (const auto& s : batch) acc += cfg.grid.interpolate(terminal, s.landing);
    acc /= cfg.samples_per_node;
    CHECK(surf.values[0][node] == acc);
  }
}

TEST_CASE("constant terminal data is preserved") {
  CoefficientField dom = constant_field_1d(0.0, 1.0, 1.0);
  ControlledProblem p;
  p.alpha_grid = {0.0};
  p.beta_grid = {0.0};
  p.dominating = dom;
  p.coeffs = [](double, double, double, const Vec&) {
    ControlCoeffs cc;  // nonzero Hessian weight, shared jump amplitude
    cc.a = mat1(0.5);
    cc.b = vec1(0.0);
    cc.s = vec1(1.0);
    return cc;
  };
  LevyMeasure m = LevyMeasure::gaussian_jumps(1.0, 0.0, 0.3);  // symmetric

  SchemeConfig cfg;
  cfg.T = 0.25;
  cfg.n = 5;
  cfg.grid = SpatialGrid::uniform_1d(-4.0, 4.0, 81);
  cfg.samples_per_node = 4000;
  cfg.seed = 9;

  ValueSurface surf = solve_backward(p, m, cfg, [](const Vec&) { return 2.0; });
  for (long j = 0; j < cfg.grid.size(); ++j)
    CHECK(std::abs(surf.values[0][j] - 2.0) < 0.05);
}

TEST_CASE("affine one-step identity with closed-form target") {
  // T[psi](x) = psi(x) + mu h p + h (b p + c psi-mean + k) for affine psi
  // and no jumps; checked against 30 independent substreams.
  const double mu = 0.3, sigma = 0.7, h = 0.05;
  const double a_c = 0.4, b_c = 0.6, c_c = -0.5, k_c = 0.2;
  const double slope = 1.5, icept = 0.25, x0 = 0.4;

  CoefficientField dom = constant_field_1d(mu, sigma, 1.0);
  ControlledProblem p;
  p.alpha_grid = {0.0};
  p.beta_grid = {0.0};
  p.dominating = dom;
  p.coeffs = [&](double, double, double, const Vec&) {
    ControlCoeffs cc;
    cc.a = mat1(a_c);
    cc.b = vec1(b_c);
    cc.c = c_c;
    cc.k = k_c;
    cc.s = Vec::Zero(1);
    return cc;
  };
  LevyMeasure m = empty_tail_measure();

  SpatialGrid grid = SpatialGrid::uniform_1d(-6.0, 6.0, 241);
  std::vector<double> next_vals(grid.size());
  for (long j = 0; j < grid.size(); ++j)
    next_vals[j] = icept + slope * grid.node(j)(0);
  SurfaceSlice next{&grid, next_vals};

  double psi_mean = icept + slope * (x0 + mu * h);
  double target = psi_mean + h * (b_c * slope + c_c * psi_mean + k_c);

  double acc = 0.0, acc2 = 0.0;
  const int reps = 30;
  for (int r = 0; r < reps; ++r) {
    RngStream rng = RngStream::derived(33, r, 0);
    double v = apply_T(next, p, m, kEmptyTail, 0.0, vec1(x0), 20000, h, 0.0, 0.0, rng);
    acc += v;
    acc2 += v * v;
  }
  double mean = acc / reps;
  double sd = std::sqrt((acc2 - acc * acc / reps) / (reps - 1));
  CHECK(std::abs(mean - target) <= 3.0 * sd / std::sqrt(static_cast<double>(reps)));
}

TEST_CASE("determinism and terminal fidelity") {
  CoefficientField dom = constant_field_1d(0.1, 0.6, 1.0);
  ControlledProblem p = zero_controls(dom);
  LevyMeasure m = LevyMeasure::gaussian_jumps(0.8, 0.1, 0.2);

  SchemeConfig cfg;
  cfg.T = 0.2;
  cfg.n = 4;
  cfg.grid = SpatialGrid::uniform_1d(-3.0, 3.0, 41);
  cfg.samples_per_node = 1500;
  cfg.seed = 77;

  auto g = [](const Vec& x) { return std::cos(1.3 * x(0)); };
  ValueSurface a = solve_backward(p, m, cfg, g);
  ValueSurface b = solve_backward(p, m, cfg, g);

  for (int i = 0; i <= cfg.n; ++i)
    for (long j = 0; j < cfg.grid.size(); ++j) REQUIRE(a.values[i][j] == b.values[i][j]);

  for (long j = 0; j < cfg.grid.size(); ++j)
    CHECK(a.values[cfg.n][j] == g(cfg.grid.node(j)));
}

TEST_CASE("monotonized run with theta = 0 coincides bit-exactly with plain") {
  CoefficientField dom = constant_field_1d(0.0, 1.0, 1.0);
  ControlledProblem p = zero_controls(dom);  // c = b = 0 and empty tail: theta = 0
  LevyMeasure m = empty_tail_measure();

  SchemeConfig cfg;
  cfg.T = 0.2;
  cfg.n = 2;
  cfg.grid = SpatialGrid::uniform_1d(-2.0, 2.0, 21);
  cfg.samples_per_node = 500;
  cfg.fixed_kappa = kEmptyTail;
  cfg.seed = 3;

  auto g = [](const Vec& x) { return std::sin(x(0)); };
  ValueSurface plain = solve_backward(p, m, cfg, g);
  cfg.monotonized = true;
  ValueSurface mono = solve_backward(p, m, cfg, g);
  CHECK(mono.theta == 0.0);
  for (long j = 0; j < cfg.grid.size(); ++j)
    CHECK(plain.values[0][j] == mono.values[0][j]);
}

TEST_CASE("non-finite values abort with the offending location") {
  CoefficientField dom = constant_field_1d(0.0, 1.0, 1.0);
  ControlledProblem p;
  p.alpha_grid = {0.0};
  p.beta_grid = {0.0};
  p.dominating = dom;
  p.coeffs = [](double, double, double, const Vec&) {
    ControlCoeffs cc;
    cc.a = mat1(0.0);
    cc.b = vec1(0.0);
    cc.k = std::numeric_limits<double>::quiet_NaN();
    cc.s = Vec::Zero(1);
    return cc;
  };
  LevyMeasure m = empty_tail_measure();

  SchemeConfig cfg;
  cfg.T = 0.1;
  cfg.n = 1;
  cfg.grid = SpatialGrid::uniform_1d(-1.0, 1.0, 5);
  cfg.samples_per_node = 50;
  cfg.fixed_kappa = kEmptyTail;

  try {
    solve_backward(p, m, cfg, [](const Vec&) { return 0.0; });
    FAIL("expected NumericError");
  } catch (const NumericError& e) {
    CHECK(std::string(e.what()).find("layer") != std::string::npos);
  }
}

TEST_CASE("enlarging the box leaves interior values in the noise band") {
  CoefficientField dom = constant_field_1d(0.1, 0.5, 1.0);
  ControlledProblem p = zero_controls(dom);
  LevyMeasure m = LevyMeasure::gaussian_jumps(0.5, 0.0, 0.25);

  auto solve_on = [&](double half) {
    SchemeConfig cfg;
    cfg.T = 0.25;
    cfg.n = 5;
    cfg.grid = SpatialGrid::uniform_1d(-half, half, static_cast<int>(40 * half) + 1);
    cfg.samples_per_node = 3000;
    cfg.seed = 12;
    return solve_backward(p, m, cfg, [](const Vec& x) { return std::cos(x(0)); });
  };

  ValueSurface small = solve_on(3.0);
  ValueSurface big = solve_on(4.5);
  for (long j = 0; j < small.grid.size(); ++j) {
    Vec x = small.grid.node(j);
    if (std::abs(x(0)) > 1.0) continue;
    CHECK(std::abs(small.values[0][j] - big.grid.interpolate(big.values[0], x)) < 0.05);
  }
}

TEST_CASE("two-dimensional diffusion smoke test") {
  Vec mu = Vec::Zero(2);
  Mat sigma(2, 2);
  sigma << 0.5, 0.0, 0.1, 0.4;
  CoefficientField dom = constant_field(mu, sigma, Vec::Zero(2));
  ControlledProblem p = zero_controls(dom);
  LevyMeasure m = empty_tail_measure();

  SchemeConfig cfg;
  cfg.T = 0.1;
  cfg.n = 2;
  cfg.grid.lo = Vec::Constant(2, -2.0);
  cfg.grid.hi = Vec::Constant(2, 2.0);
  cfg.grid.counts = {17, 17};
  cfg.samples_per_node = 400;
  cfg.fixed_kappa = kEmptyTail;
  cfg.seed = 2;

  // affine terminal data: expectation preserved up to noise
  auto g = [](const Vec& x) { return 0.3 + 0.5 * x(0) - 0.2 * x(1); };
  ValueSurface surf = solve_backward(p, m, cfg, g);
  long center = cfg.grid.size() / 2;  // node at the origin
  CHECK(std::abs(surf.values[0][center] - 0.3) < 0.05);
}
