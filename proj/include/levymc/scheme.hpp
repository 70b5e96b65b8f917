#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "levymc/hjb.hpp"

namespace levymc {

/// Uniform node grid on an axis-aligned box.
struct SpatialGrid {
  Vec lo, hi;
  std::vector<int> counts;  // nodes per dimension, >= 2 each

  int dim() const { return static_cast<int>(counts.size()); }
  long size() const {
    long n = 1;
    for (int c : counts) n *= c;
    return n;
  }
  double spacing(int d) const { return (hi(d) - lo(d)) / (counts[d] - 1); }
  Vec node(long flat) const;

  /// Multilinear interpolation inside the box, constant (nearest-node)
  /// extrapolation outside.
  double interpolate(std::span<const double> values, const Vec& x) const;

  static SpatialGrid uniform_1d(double lo, double hi, int count);
};

/// Read-only view of one time layer.
struct SurfaceSlice {
  const SpatialGrid* grid = nullptr;
  std::span<const double> values;
  double operator()(const Vec& x) const { return grid->interpolate(values, x); }
};

enum class KappaRule { Fixed, Convergence, Rate };

struct SchemeConfig {
  double T = 1.0;
  int n = 10;  // time steps; h = T / n
  SpatialGrid grid;
  long samples_per_node = 1000;
  KappaRule kappa_rule = KappaRule::Fixed;
  double fixed_kappa = 0.0;
  bool monotonized = false;
  std::uint64_t seed = 0;
  bool antithetic = false;  // variance-reduction hook; defaults off

  double h() const { return T / n; }
};

/// Discrete solution surface v(t_i, node). Terminal layer equals g exactly;
/// for the monotonized variant the stored values are the rescaled
/// e^{-theta (T - t_i)} u(t_i, .) layers.
struct ValueSurface {
  SpatialGrid grid;
  std::vector<double> times;
  std::vector<std::vector<double>> values;  // [layer][node]
  double kappa = 0.0;
  double theta = 0.0;

  SurfaceSlice slice(int layer) const {
    return SurfaceSlice{&grid, std::span<const double>(values[layer])};
  }
};

/// One application of the scheme operator on a caller-supplied batch:
/// d0 + h * F(t, x, D_h psi, psi) with the derivative triple and per-control
/// nu-hat estimates all read from the same batch (common random numbers).
/// theta = 0 gives the plain operator, theta > 0 the monotonized one.
double apply_T_on_batch(const SurfaceSlice& next, const ControlledProblem& p,
                        const LevyMeasure& m, double kappa, double t, const Vec& x,
                        double h, double theta, double T_minus_t,
                        std::span<const OneStepSample> batch);

/// Simulates a fresh batch of M one-step samples at (t, x), then applies the
/// operator on it.
double apply_T(const SurfaceSlice& next, const ControlledProblem& p,
               const LevyMeasure& m, double kappa, double t, const Vec& x,
               long samples, double h, double theta, double T_minus_t, RngStream& rng,
               bool antithetic = false);

/// Backward induction from the terminal layer. Selects kappa per the
/// configured rule, runs the plain or monotonized operator, checks the
/// stability envelope each layer, and aborts on any non-finite node value
/// with its (layer, node) location. Within a layer nodes evaluate in
/// parallel; each (layer, node) owns a derived substream.
ValueSurface solve_backward(const ControlledProblem& p, const LevyMeasure& m,
                            const SchemeConfig& cfg,
                            const std::function<double(const Vec&)>& g);

/// Domain sample used for theta and kappa-rule sups: the spatial grid nodes
/// at t = 0 and t = T (subsampled when the grid is large).
DomainSample scheme_domain_sample(const SpatialGrid& grid, double T,
                                  long max_nodes = 256);

}  // namespace levymc
