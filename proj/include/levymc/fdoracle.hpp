#pragma once

#include <functional>
#include <vector>

#include "levymc/hjb.hpp"
#include "levymc/scheme.hpp"

namespace levymc {

/// Monotone implicit finite-difference solution of the concave (inf-only)
/// problem on a fixed grid: upwind drift, centered diffusion, interpolated
/// jump shifts, backward Euler in time with policy iteration. Supports
/// d = 1 and atomic jump measures (or intensity zero); this keeps every
/// off-diagonal weight nonnegative, so the scheme is classically monotone.
/// Boundary handling is constant extrapolation, matching the Monte Carlo
/// scheme's localization.
struct FdResult {
  SpatialGrid grid;
  std::vector<double> stored_times;            // descending storage not needed; ascending
  std::vector<std::vector<double>> layers;     // one per stored time
  double value(double t, const Vec& x) const;  // linear in t between stored layers
};

FdResult solve_fd_concave(const ControlledProblem& p, const LevyMeasure& m, double kappa,
                          double T, const std::function<double(const Vec&)>& g,
                          const SpatialGrid& grid, int n_steps,
                          int max_policy_iters = 50);

}  // namespace levymc
