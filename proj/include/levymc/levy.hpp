#pragma once

#include <functional>
#include <limits>

#include "levymc/rng.hpp"
#include "levymc/types.hpp"

namespace levymc {

enum class MeasureKind { FinitePointMass, FiniteGaussianJumps, PowerTail };

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
};

/// One-dimensional Levy measure with closed-form truncation functionals and
/// exact sampling of jumps above a cutoff kappa.
///
/// Kinds:
///   FinitePointMass      nu = lambda * delta_{z0}
///   FiniteGaussianJumps  nu = lambda * Normal(mean, stddev^2)
///   PowerTail            nu(dz) = c * |z|^(-1-alpha) dz, alpha in (0, 2)
///
/// The finite kinds admit kappa = 0; PowerTail has infinite total mass and
/// requires kappa > 0 wherever the retained intensity enters. Objects are
/// immutable after construction and safe to share across threads; sampling
/// takes an explicit stream.
class LevyMeasure {
 public:
  static LevyMeasure point_mass(double intensity, double jump_size);
  static LevyMeasure gaussian_jumps(double intensity, double mean, double stddev);
  static LevyMeasure power_tail(double amplitude, double alpha);

  MeasureKind kind() const { return kind_; }
  bool is_finite() const { return kind_ != MeasureKind::PowerTail; }
  bool has_density() const { return kind_ != MeasureKind::FinitePointMass; }

  /// Density of nu at z (kinds with a density only).
  double density(double z) const;

  /// lambda_kappa = nu({|z| > kappa}), the retained jump intensity.
  /// Non-increasing in kappa. Throws for kappa = 0 on PowerTail.
  double tail_mass(double kappa) const;

  /// Integral of z over {kappa < |z| <= 1}; the scalar compensator block.
  /// Zero whenever kappa >= 1 (empty region) and for symmetric kinds.
  double truncated_first_moment(double kappa) const;

  /// Integral of z^2 over {0 < |z| <= kappa}; gauges the truncation error.
  /// Vanishes as kappa -> 0 and is non-decreasing in kappa.
  double small_jump_second_moment(double kappa) const;

  /// Integral of (|z| ^ 1 capped at 1) over the tail {|z| > kappa}. Finite
  /// for every kind; used as a box-padding heuristic.
  double capped_abs_tail(double kappa) const;

  /// Draw from the normalized tail law 1_{|z|>kappa} nu(dz) / lambda_kappa.
  /// Inverse-CDF per half-line, sign by the half-line mass split.
  double sample_truncated_jump(double kappa, RngStream& rng) const;

  /// Integral of f against nu over the band {a < |z| <= b} (b may be +inf).
  /// Adaptive quadrature for density kinds, exact atom sums otherwise.
  /// The caller must split the band at any kink of f.
  QuadratureResult integrate_abs_band(const std::function<double(double)>& f,
                                      double a, double b) const;

  // Kind-specific parameters, exposed for oracles and reports.
  double intensity() const { return p0_; }  // finite kinds
  double atom() const { return p1_; }       // point-mass location
  double jump_mean() const { return p1_; }  // gaussian kind
  double jump_stddev() const { return p2_; }
  double amplitude() const { return p0_; }  // power tail c
  double alpha() const { return p2_; }      // power tail exponent

 private:
  LevyMeasure(MeasureKind kind, double p0, double p1, double p2)
      : kind_(kind), p0_(p0), p1_(p1), p2_(p2) {}

  MeasureKind kind_;
  double p0_, p1_, p2_;
};

/// integrate_abs_band with an absolute-tolerance gate; throws NumericError
/// carrying the achieved tolerance when quadrature does not converge.
double integrate_abs_band_checked(const LevyMeasure& m,
                                  const std::function<double(double)>& f,
                                  double a, double b, double abs_tol);

inline constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace levymc
