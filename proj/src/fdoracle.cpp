#include "levymc/fdoracle.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

namespace levymc {

namespace {

struct JumpShift {
  double lambda = 0.0;
  double displacement = 0.0;  // s * z0
  double compensator = 0.0;   // lambda * s * z0 * 1_{|z0|<=1}; folded into drift
};

// Row stencil of one control's operator at one node, as (column, weight)
// pairs for the off-diagonal part plus the diagonal weight.
struct Stencil {
  double diag = 0.0;
  int cols[6];
  double weights[6];
  int n = 0;
  double source = 0.0;

  void add(int col, double w, int self) {
    if (col == self) {
      diag += w;
      return;
    }
    for (int i = 0; i < n; ++i)
      if (cols[i] == col) {
        weights[i] += w;
        return;
      }
    cols[n] = col;
    weights[n] = w;
    ++n;
  }
};

}  // namespace

double FdResult::value(double t, const Vec& x) const {
  if (stored_times.empty()) throw NumericError("fd oracle: empty result");
  auto it = std::lower_bound(stored_times.begin(), stored_times.end(), t);
  std::size_t hi = std::min<std::size_t>(it - stored_times.begin(),
                                         stored_times.size() - 1);
  std::size_t lo = hi > 0 ? hi - 1 : 0;
  double vlo = grid.interpolate(layers[lo], x);
  if (lo == hi || stored_times[hi] == stored_times[lo]) return vlo;
  double vhi = grid.interpolate(layers[hi], x);
  double w = (t - stored_times[lo]) / (stored_times[hi] - stored_times[lo]);
  w = std::clamp(w, 0.0, 1.0);
  return (1.0 - w) * vlo + w * vhi;
}

FdResult solve_fd_concave(const ControlledProblem& p, const LevyMeasure& m, double kappa,
                          double T, const std::function<double(const Vec&)>& g,
                          const SpatialGrid& grid, int n_steps, int max_policy_iters) {
  if (grid.dim() != 1) throw ConfigError("fd oracle: only d = 1 is supported");
  if (p.beta_grid.size() != 1)
    throw ConfigError("fd oracle: concave problems only (singleton beta grid)");
  const double lam = m.tail_mass(kappa);
  if (lam > 0.0 && m.kind() != MeasureKind::FinitePointMass)
    throw ConfigError("fd oracle: jump measure must be atomic (or intensity zero)");

  const int nx = grid.counts[0];
  const long n_alpha = static_cast<long>(p.alpha_grid.size());
  const double dx = grid.spacing(0);
  const double dt = T / n_steps;
  const double beta = p.beta_grid[0];
  const double x_lo = grid.lo(0);

  // Interpolation clamp for a displaced point; constant beyond the box.
  auto shift_targets = [&](int j, double displacement, int& jl, double& wl, double& wr) {
    double xt = x_lo + j * dx + displacement;
    double u = (xt - x_lo) / dx;
    if (u <= 0.0) {
      jl = 0;
      wl = 1.0;
      wr = 0.0;
    } else if (u >= nx - 1) {
      jl = nx - 2;
      wl = 0.0;
      wr = 1.0;
    } else {
      jl = static_cast<int>(u);
      wl = 1.0 - (u - jl);
      wr = u - jl;
    }
  };

  // Builds the stencil of control alpha at node j and time t:
  //   A^a v = D_eff v_x + A_eff v_xx + c v + sum_jumps lam (I[v](x+dz) - v)
  // with the jump compensators folded into D_eff. Ghost nodes equal the
  // boundary node (constant extrapolation).
  auto build_stencil = [&](double t, int j, double alpha, const Vec& x) {
    ControlCoeffs cc = p.coeffs(alpha, beta, t, x);
    double sigma = p.dominating.sigma(t, x)(0, 0);
    double mu = p.dominating.mu(t, x)(0);
    double s_dom = p.dominating.eta_scale(t, x)(0);

    JumpShift jumps[2];
    int n_jumps = 0;
    if (lam > 0.0) {
      double z0 = m.atom();
      double comp = std::abs(z0) <= 1.0 ? lam * z0 : 0.0;
      jumps[n_jumps++] = {lam, s_dom * z0, s_dom * comp};
      jumps[n_jumps++] = {lam, cc.s(0) * z0, cc.s(0) * comp};
    }

    double a_eff = 0.5 * (sigma * sigma + cc.a(0, 0));
    double d_eff = mu + cc.b(0);
    for (int q = 0; q < n_jumps; ++q) d_eff -= jumps[q].compensator;

    Stencil st;
    st.source = cc.k;
    st.diag = cc.c;
    double diff = a_eff / (dx * dx);
    // Centered drift keeps second order when the off-diagonals stay
    // nonnegative; otherwise fall back to monotone upwinding.
    double dplus, dminus;
    if (diff >= std::abs(d_eff) / (2.0 * dx)) {
      dplus = d_eff / (2.0 * dx);
      dminus = -d_eff / (2.0 * dx);
    } else {
      dplus = std::max(d_eff, 0.0) / dx;
      dminus = std::max(-d_eff, 0.0) / dx;
    }
    int jm = std::max(j - 1, 0);
    int jp = std::min(j + 1, nx - 1);
    st.add(jp, diff + dplus, j);
    st.add(jm, diff + dminus, j);
    st.diag -= 2.0 * diff + dplus + dminus;
    for (int q = 0; q < n_jumps; ++q) {
      int jl;
      double wl, wr;
      shift_targets(j, jumps[q].displacement, jl, wl, wr);
      st.add(jl, jumps[q].lambda * wl, j);
      st.add(jl + 1, jumps[q].lambda * wr, j);
      st.diag -= jumps[q].lambda;
    }
    return st;
  };

  FdResult out;
  out.grid = grid;
  std::vector<double> v(nx), v_next(nx);
  for (int j = 0; j < nx; ++j) v[j] = g(grid.node(j));

  const int store_stride = std::max(1, n_steps / 200);
  std::vector<std::pair<double, std::vector<double>>> stored;
  stored.emplace_back(T, v);

  std::vector<int> policy(nx, 0);
  std::vector<Stencil> stencils(nx);

  using Triplet = Eigen::Triplet<double>;
  std::vector<Triplet> trips;

  for (int step = n_steps - 1; step >= 0; --step) {
    const double t = step * dt;
    bool converged = false;
    for (int it = 0; it < max_policy_iters; ++it) {
      // Policy update: pointwise argmin of the explicit operator value on
      // the current iterate.
      const std::vector<double>& ref = it == 0 ? v : v_next;
      bool changed = it == 0;  // always solve at least once per step
      for (int j = 0; j < nx; ++j) {
        Vec x = grid.node(j);
        double best = std::numeric_limits<double>::infinity();
        int best_a = policy[j];
        for (long ai = 0; ai < n_alpha; ++ai) {
          Stencil st = build_stencil(t, j, p.alpha_grid[ai], x);
          double val = st.diag * ref[j] + st.source;
          for (int q = 0; q < st.n; ++q) val += st.weights[q] * ref[st.cols[q]];
          if (val < best) {
            best = val;
            best_a = static_cast<int>(ai);
          }
        }
        if (best_a != policy[j]) {
          policy[j] = best_a;
          changed = true;
        }
      }
      if (!changed && it > 0) {
        converged = true;
        break;
      }

      // Implicit solve under the current policy: (I - dt A) v_new = v + dt k.
      trips.clear();
      Eigen::VectorXd rhs(nx);
      for (int j = 0; j < nx; ++j) {
        Vec x = grid.node(j);
        stencils[j] = build_stencil(t, j, p.alpha_grid[policy[j]], x);
        trips.emplace_back(j, j, 1.0 - dt * stencils[j].diag);
        for (int q = 0; q < stencils[j].n; ++q)
          trips.emplace_back(j, stencils[j].cols[q], -dt * stencils[j].weights[q]);
        rhs(j) = v[j] + dt * stencils[j].source;
      }
      Eigen::SparseMatrix<double> A(nx, nx);
      A.setFromTriplets(trips.begin(), trips.end());
      Eigen::SparseLU<Eigen::SparseMatrix<double>> solver;
      solver.compute(A);
      if (solver.info() != Eigen::Success)
        throw NumericError("fd oracle: sparse factorization failed");
      Eigen::VectorXd sol = solver.solve(rhs);
      if (solver.info() != Eigen::Success)
        throw NumericError("fd oracle: sparse solve failed");
      for (int j = 0; j < nx; ++j) v_next[j] = sol(j);
      converged = n_alpha == 1;
      if (converged) break;
    }
    if (!converged && n_alpha > 1) {
      double residual = 0.0;
      for (int j = 0; j < nx; ++j) residual = std::max(residual, std::abs(v_next[j] - v[j]));
      throw NumericError("fd oracle: policy iteration did not settle within " +
                         std::to_string(max_policy_iters) +
                         " sweeps; last correction " + std::to_string(residual));
    }
    v.swap(v_next);
    if (step % store_stride == 0 || step == 0) stored.emplace_back(t, v);
  }

  std::sort(stored.begin(), stored.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  for (auto& [time, layer] : stored) {
    out.stored_times.push_back(time);
    out.layers.push_back(std::move(layer));
  }
  return out;
}

}  // namespace levymc
