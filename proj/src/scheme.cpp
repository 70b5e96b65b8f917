#include "levymc/scheme.hpp"

#include <algorithm>
#include <cmath>

#include "levymc/parallel.hpp"

namespace levymc {

Vec SpatialGrid::node(long flat) const {
  const int d = dim();
  Vec x(d);
  for (int k = 0; k < d; ++k) {
    long idx = flat % counts[k];
    flat /= counts[k];
    x(k) = lo(k) + idx * spacing(k);
  }
  return x;
}

double SpatialGrid::interpolate(std::span<const double> values, const Vec& x) const {
  const int d = dim();
  // Per-dimension cell index and weight, with clamping outside the box.
  int base_idx[kMaxDim];
  double frac[kMaxDim];
  for (int k = 0; k < d; ++k) {
    double u = (x(k) - lo(k)) / spacing(k);
    if (u <= 0.0) {
      base_idx[k] = 0;
      frac[k] = 0.0;
    } else if (u >= counts[k] - 1) {
      base_idx[k] = counts[k] - 2;
      frac[k] = 1.0;
    } else {
      base_idx[k] = static_cast<int>(u);
      frac[k] = u - base_idx[k];
    }
  }
  double acc = 0.0;
  const int corners = 1 << d;
  for (int c = 0; c < corners; ++c) {
    double weight = 1.0;
    long flat = 0;
    long stride = 1;
    for (int k = 0; k < d; ++k) {
      int offset = (c >> k) & 1;
      weight *= offset ? frac[k] : 1.0 - frac[k];
      flat += (base_idx[k] + offset) * stride;
      stride *= counts[k];
    }
    if (weight != 0.0) acc += weight * values[flat];
  }
  return acc;
}

SpatialGrid SpatialGrid::uniform_1d(double lo, double hi, int count) {
  SpatialGrid g;
  g.lo = vec1(lo);
  g.hi = vec1(hi);
  g.counts = {count};
  return g;
}

double apply_T_on_batch(const SurfaceSlice& next, const ControlledProblem& p,
                        const LevyMeasure& m, double kappa, double t, const Vec& x,
                        double h, double theta, double T_minus_t,
                        std::span<const OneStepSample> batch) {
  const long M = static_cast<long>(batch.size());
  if (M == 0) throw ConfigError("apply_T: empty batch");
  const CoefficientField& cf = p.dominating;
  WeightKernel kernel(cf, t, x);

  std::vector<double> psi_vals(M);
  std::vector<double> msums(M);
  for (long j = 0; j < M; ++j) {
    psi_vals[j] = next(batch[j].landing);
    msums[j] = mark_sum(batch[j]);
  }

  DerivativeTriple triple = estimate_derivatives_values(psi_vals, batch, kernel, h);

  const double tfm = m.truncated_first_moment(kappa);
  const Vec s_dom = cf.eta_scale(t, x);
  const Vec mu_x = cf.mu(t, x);
  const Mat sig_x = cf.sigma(t, x);

  auto one = [](double) { return 1.0; };
  McqEstimate shared_nu;
  bool shared_ready = false;

  NuHatTable table(p.alpha_grid.size(),
                   std::vector<McqEstimate>(p.beta_grid.size()));
  std::vector<double> rebuilt(M);
  for (std::size_t ai = 0; ai < p.alpha_grid.size(); ++ai) {
    for (std::size_t bi = 0; bi < p.beta_grid.size(); ++bi) {
      ControlCoeffs cc = p.coeffs(p.alpha_grid[ai], p.beta_grid[bi], t, x);
      if (cc.s == s_dom) {
        // Control shares the dominating jump amplitude: the batch landings
        // are already the right one-step process.
        if (!shared_ready) {
          shared_nu = nu_hat_values(psi_vals, batch, one, h);
          shared_ready = true;
        }
        table[ai][bi] = shared_nu;
      } else {
        // Rebuild landings with the control's amplitude (and its matching
        // compensator) from the shared Brownian increments and marks.
        Vec mu_k = mu_x - cc.s * tfm;
        for (long j = 0; j < M; ++j)
          rebuilt[j] =
              next(landing_from(x, mu_k, sig_x, cc.s, h, batch[j].w, msums[j]));
        table[ai][bi] = nu_hat_values(rebuilt, batch, one, h);
      }
    }
  }

  FEvaluation fe =
      evaluate_F_detailed(p, m, kappa, t, x, triple, table, theta, T_minus_t);
  return triple.d0 + h * fe.value;
}

double apply_T(const SurfaceSlice& next, const ControlledProblem& p,
               const LevyMeasure& m, double kappa, double t, const Vec& x,
               long samples, double h, double theta, double T_minus_t, RngStream& rng,
               bool antithetic) {
  static thread_local std::vector<OneStepSample> batch;
  simulate_batch(p.dominating, m, kappa, t, x, h, samples, rng, batch,
                 BatchOptions{antithetic});
  return apply_T_on_batch(next, p, m, kappa, t, x, h, theta, T_minus_t, batch);
}

DomainSample scheme_domain_sample(const SpatialGrid& grid, double T, long max_nodes) {
  DomainSample sample;
  const long n = grid.size();
  const long stride = std::max<long>(1, n / max_nodes);
  for (long i = 0; i < n; i += stride) {
    sample.emplace_back(0.0, grid.node(i));
    sample.emplace_back(T, grid.node(i));
  }
  return sample;
}

ValueSurface solve_backward(const ControlledProblem& p, const LevyMeasure& m,
                            const SchemeConfig& cfg,
                            const std::function<double(const Vec&)>& g) {
  if (cfg.n < 1) throw ConfigError("scheme: n must be >= 1");
  if (cfg.samples_per_node < 1) throw ConfigError("scheme: M must be >= 1");
  const double h = cfg.h();
  const long nodes = cfg.grid.size();

  DomainSample domain = scheme_domain_sample(cfg.grid, cfg.T);

  double kappa = cfg.fixed_kappa;
  switch (cfg.kappa_rule) {
    case KappaRule::Fixed:
      break;
    case KappaRule::Convergence:
      kappa = select_kappa_convergence(p, m, h, domain);
      break;
    case KappaRule::Rate: {
      RateKappaResult r = select_kappa_rate(p, m, h, domain);
      if (!r.feasible)
        throw NumericError("rate-rule kappa selection infeasible: " +
                           r.failed_condition);
      kappa = r.kappa;
      break;
    }
  }

  const double theta = cfg.monotonized ? theta_kappa(p, m, kappa, domain).value : 0.0;

  // Measured constants for the stability envelope.
  double c_sup = 0.0, k_sup = 0.0;
  for (const auto& [ts, xs] : domain) {
    for (double alpha : p.alpha_grid)
      for (double beta : p.beta_grid) {
        ControlCoeffs cc = p.coeffs(alpha, beta, ts, xs);
        c_sup = std::max(c_sup, std::abs(cc.c));
        k_sup = std::max(k_sup, std::abs(cc.k));
      }
  }

  ValueSurface surf;
  surf.grid = cfg.grid;
  surf.kappa = kappa;
  surf.theta = theta;
  surf.times.resize(cfg.n + 1);
  surf.values.assign(cfg.n + 1, std::vector<double>(nodes));
  for (int i = 0; i <= cfg.n; ++i) surf.times[i] = i * h;

  double g_sup = 0.0;
  for (long j = 0; j < nodes; ++j) {
    double gv = g(cfg.grid.node(j));
    surf.values[cfg.n][j] = gv;
    g_sup = std::max(g_sup, std::abs(gv));
  }

  const double envelope_growth = c_sup + theta;
  for (int layer = cfg.n - 1; layer >= 0; --layer) {
    const double t = surf.times[layer];
    const double T_minus_t = cfg.T - t;
    SurfaceSlice next = surf.slice(layer + 1);
    std::vector<double>& current = surf.values[layer];
    parallel_for(nodes, [&](long node) {
      RngStream rng = RngStream::derived(cfg.seed, static_cast<std::uint64_t>(layer),
                                         static_cast<std::uint64_t>(node));
      current[node] = apply_T(next, p, m, kappa, t, cfg.grid.node(node),
                              cfg.samples_per_node, h, theta, T_minus_t, rng,
                              cfg.antithetic);
    });
    double layer_sup = 0.0;
    for (long node = 0; node < nodes; ++node) {
      if (!std::isfinite(current[node]))
        throw NumericError("scheme aborted: non-finite value at layer " +
                           std::to_string(layer) + ", node " + std::to_string(node));
      layer_sup = std::max(layer_sup, std::abs(current[node]));
    }
    double bound = (k_sup * (cfg.T - t) + g_sup) *
                   std::exp(envelope_growth * (cfg.T - t));
    // 1.25 factor allows Monte Carlo slack on the Gronwall envelope.
    if (layer_sup > 1.25 * bound + 1e-9)
      throw NumericError("scheme aborted: stability envelope exceeded at layer " +
                         std::to_string(layer) + " (sup " + std::to_string(layer_sup) +
                         " > bound " + std::to_string(bound) + ")");
  }

  if (cfg.monotonized && theta != 0.0) {
    for (int i = 0; i <= cfg.n; ++i) {
      double scale = std::exp(-theta * (cfg.T - surf.times[i]));
      for (double& v : surf.values[i]) v *= scale;
    }
  }
  return surf;
}

}  // namespace levymc
