#include "radner/pde_solver.hpp"

#include "radner/errors.hpp"
#include "radner/tridiagonal.hpp"

#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>

namespace radner {

void TridiagonalSolver::factor(const VectorXd &lower, const VectorXd &diag, const VectorXd &upper) {
  const Index n = diag.size();
  lower_ = lower;
  upper_mod_.resize(n);
  denom_.resize(n);
  double prev_c = 0.0;
  for (Index k = 0; k < n; ++k) {
    const double a = k > 0 ? lower(k) : 0.0;
    const double den = diag(k) - a * prev_c;
    if (!(std::abs(den) > 1e-300))
      throw SchemeError("tridiagonal system is singular");
    denom_(k) = 1.0 / den;
    prev_c = k + 1 < n ? upper(k) * denom_(k) : 0.0;
    upper_mod_(k) = prev_c;
  }
}

void TridiagonalSolver::solve(Eigen::Ref<MatrixXd> rhs) const {
  const Index n = denom_.size();
  for (Index c = 0; c < rhs.cols(); ++c) {
    rhs(0, c) *= denom_(0);
    for (Index k = 1; k < n; ++k)
      rhs(k, c) = (rhs(k, c) - lower_(k) * rhs(k - 1, c)) * denom_(k);
    for (Index k = n - 2; k >= 0; --k)
      rhs(k, c) -= upper_mod_(k) * rhs(k + 1, c);
  }
}

namespace {

/// (I - dt A(t)) with the edge extrapolation rows, factored and cached while
/// the frozen coefficients stay unchanged.
class ImplicitOperator {
public:
  ImplicitOperator(const StateDynamics &dyn, const GridSpec &grid, double dt)
      : dyn_(dyn), grid_(grid), dt_(dt) {}

  void prepare(double t) {
    const Index nodes = grid_.num_nodes();
    const int d = grid_.dim();
    MatrixXd coeffs(nodes, d + d * d);
    for (Index p = 0; p < nodes; ++p) {
      const VectorXd x = grid_.node(p);
      const VectorXd lam = dyn_.drift(t, x);
      const MatrixXd sig = dyn_.diffusion(t, x);
      const MatrixXd cov = sig * sig.transpose();
      coeffs.row(p).head(d) = lam.transpose();
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
          coeffs(p, d + i * d + j) = cov(i, j);
    }
    if (coeffs.allFinite() == false)
      throw SchemeError("non-finite generator coefficients at t=" + std::to_string(t));
    if (coeffs_ && coeffs_->rows() == coeffs.rows() && *coeffs_ == coeffs)
      return;
    coeffs_ = coeffs;
    if (d == 1)
      assemble_1d();
    else
      assemble_2d();
  }

  /// rhs holds the full-lattice right-hand side; boundary rows are ignored.
  void solve(MatrixXd &rhs) const {
    if (grid_.dim() == 1) {
      const Index m = grid_.x_steps[0];
      MatrixXd inner = rhs.middleRows(1, m - 1);
      tri_.solve(inner);
      rhs.middleRows(1, m - 1) = inner;
      rhs.row(0) = 2.0 * rhs.row(1) - rhs.row(2);
      rhs.row(m) = 2.0 * rhs.row(m - 1) - rhs.row(m - 2);
      return;
    }
    MatrixXd b = rhs;
    for (Index p = 0; p < b.rows(); ++p)
      if (grid_.on_boundary(p))
        b.row(p).setZero();
    MatrixXd x(b.rows(), b.cols());
    for (Index c = 0; c < b.cols(); ++c) {
      x.col(c) = lu_.solve(b.col(c));
      if (lu_.info() != Eigen::Success)
        throw SchemeError("sparse solve failed");
    }
    rhs = x;
  }

private:
  void assemble_1d() {
    const Index m = grid_.x_steps[0];
    const double h = grid_.dx(0);
    VectorXd lo(m + 1), di(m + 1), up(m + 1);
    for (Index k = 1; k < m; ++k) {
      const double lam = (*coeffs_)(k, 0);
      const double s2 = (*coeffs_)(k, 1);
      lo(k) = -dt_ * (-lam / (2.0 * h) + 0.5 * s2 / (h * h));
      di(k) = 1.0 + dt_ * s2 / (h * h);
      up(k) = -dt_ * (lam / (2.0 * h) + 0.5 * s2 / (h * h));
    }
    // Eliminate u_0 = 2u_1 - u_2 and u_m = 2u_{m-1} - u_{m-2}.
    const Index n = m - 1;
    VectorXd L(n), D(n), U(n);
    for (Index k = 1; k < m; ++k) {
      L(k - 1) = lo(k);
      D(k - 1) = di(k);
      U(k - 1) = up(k);
    }
    D(0) += 2.0 * lo(1);
    U(0) -= lo(1);
    D(n - 1) += 2.0 * up(m - 1);
    L(n - 1) -= up(m - 1);
    tri_.factor(L, D, U);
  }

  void assemble_2d() {
    const Index nodes = grid_.num_nodes();
    const double h0 = grid_.dx(0);
    const double h1 = grid_.dx(1);
    const int m0 = grid_.x_steps[0];
    const int m1 = grid_.x_steps[1];
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(nodes) * 9);
    for (Index p = 0; p < nodes; ++p) {
      const auto mi = grid_.multi_index(p);
      const int i = mi[0];
      const int j = mi[1];
      if (i == 0 || i == m0) {
        const int s = i == 0 ? 1 : -1;
        trip.emplace_back(p, p, 1.0);
        trip.emplace_back(p, grid_.flat_index(i + s, j), -2.0);
        trip.emplace_back(p, grid_.flat_index(i + 2 * s, j), 1.0);
        continue;
      }
      if (j == 0 || j == m1) {
        const int s = j == 0 ? 1 : -1;
        trip.emplace_back(p, p, 1.0);
        trip.emplace_back(p, grid_.flat_index(i, j + s), -2.0);
        trip.emplace_back(p, grid_.flat_index(i, j + 2 * s), 1.0);
        continue;
      }
      const auto &c = coeffs_->row(p);
      const double l0 = c(0), l1 = c(1);
      const double c00 = c(2), c01 = c(3), c11 = c(5);
      // A u = l.Du + 1/2 c00 u_00 + c01 u_01 + 1/2 c11 u_11
      auto add = [&](int di, int dj, double w) {
        trip.emplace_back(p, grid_.flat_index(i + di, j + dj), -dt_ * w);
      };
      trip.emplace_back(p, p, 1.0);
      add(0, 0, -c00 / (h0 * h0) - c11 / (h1 * h1));
      add(1, 0, l0 / (2 * h0) + 0.5 * c00 / (h0 * h0));
      add(-1, 0, -l0 / (2 * h0) + 0.5 * c00 / (h0 * h0));
      add(0, 1, l1 / (2 * h1) + 0.5 * c11 / (h1 * h1));
      add(0, -1, -l1 / (2 * h1) + 0.5 * c11 / (h1 * h1));
      const double cross = c01 / (4.0 * h0 * h1);
      if (cross != 0.0) {
        add(1, 1, cross);
        add(-1, -1, cross);
        add(1, -1, -cross);
        add(-1, 1, -cross);
      }
    }
    Eigen::SparseMatrix<double> M(nodes, nodes);
    M.setFromTriplets(trip.begin(), trip.end());
    M.makeCompressed();
    lu_.compute(M);
    if (lu_.info() != Eigen::Success)
      throw SchemeError("implicit operator is not invertible");
  }

  const StateDynamics &dyn_;
  const GridSpec &grid_;
  double dt_;
  std::optional<MatrixXd> coeffs_;
  TridiagonalSolver tri_;
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu_;
};

void check_divergence(const MatrixXd &u, int n, double bound) {
  for (Index p = 0; p < u.rows(); ++p) {
    for (Index j = 0; j < u.cols(); ++j) {
      const double v = u(p, j);
      if (!std::isfinite(v) || std::abs(v) > bound) {
        std::ostringstream os;
        os << "solution diverged at time index " << n << ", node " << p << ", component " << j
           << " (value " << v << ", bound " << bound << ")";
        throw DivergenceError(n, p, static_cast<int>(j), v, os.str());
      }
    }
  }
}

MatrixXd node_gradient(const MatrixXd &grad_row_block, Index p, int J, int d) {
  MatrixXd g(J, d);
  for (int j = 0; j < J; ++j)
    for (int k = 0; k < d; ++k)
      g(j, k) = grad_row_block(p, j * d + k);
  return g;
}

void evaluate_source(const BackwardProblem &problem, const GridSpec &grid,
                     const std::vector<VectorXd> &nodes, double t, const MatrixXd &u,
                     const MatrixXd &grad, MatrixXd &out) {
  const int J = problem.components;
  const int d = grid.dim();
  VectorXd urow(J);
  VectorXd f(J);
  for (Index p = 0; p < u.rows(); ++p) {
    urow = u.row(p).transpose();
    problem.source(t, p, nodes[static_cast<std::size_t>(p)], urow, node_gradient(grad, p, J, d), f);
    out.row(p) = f.transpose();
  }
}

/// 1 / max row-sum of |df/du| over a sample of terminal nodes.
double estimate_stability_dt(const BackwardProblem &problem, const GridSpec &grid,
                             const std::vector<VectorXd> &nodes, double T, const MatrixXd &u,
                             const MatrixXd &grad) {
  const int J = problem.components;
  const int d = grid.dim();
  const Index n = u.rows();
  const Index stride = std::max<Index>(1, n / 64);
  double L = 0.0;
  VectorXd base(J), bumped(J), urow(J);
  for (Index p = 0; p < n; p += stride) {
    const MatrixXd g = node_gradient(grad, p, J, d);
    urow = u.row(p).transpose();
    problem.source(T, p, nodes[static_cast<std::size_t>(p)], urow, g, base);
    VectorXd rowsum = VectorXd::Zero(J);
    for (int j = 0; j < J; ++j) {
      const double h = 1e-6 * (1.0 + std::abs(urow(j)));
      VectorXd up = urow;
      up(j) += h;
      problem.source(T, p, nodes[static_cast<std::size_t>(p)], up, g, bumped);
      rowsum += ((bumped - base) / h).cwiseAbs();
    }
    L = std::max(L, rowsum.maxCoeff());
  }
  return L > 0.0 ? 1.0 / L : std::numeric_limits<double>::infinity();
}

} // namespace

SolutionGrid solve_semilinear(const StateDynamics &dyn, double horizon, const GridSpec &grid,
                              const BackwardProblem &problem, const SchemeParams &scheme) {
  grid.validate();
  if (dyn.dim != grid.dim())
    throw InvalidInput("state dimension does not match the lattice");
  const Index nodes = grid.num_nodes();
  const int J = problem.components;
  if (problem.terminal.rows() != nodes || problem.terminal.cols() != J)
    throw InvalidInput("terminal condition has the wrong shape");

  const int NT = grid.t_steps;
  const double dt = grid.dt(horizon);

  SolutionGrid sol;
  sol.grid = grid;
  sol.horizon = horizon;
  sol.components = J;
  sol.values.resize(static_cast<std::size_t>(NT) + 1);
  sol.gradients.resize(static_cast<std::size_t>(NT) + 1);
  sol.meta.blowup_bound = scheme.blowup_bound;
  sol.meta.inner_picard = scheme.inner_picard;
  sol.meta.inner_picard_max_iter = scheme.inner_picard_max_iter;
  sol.meta.inner_picard_tol = scheme.inner_picard_tol;

  std::vector<VectorXd> xs(static_cast<std::size_t>(nodes));
  for (Index p = 0; p < nodes; ++p)
    xs[static_cast<std::size_t>(p)] = grid.node(p);

  sol.values[static_cast<std::size_t>(NT)] = problem.terminal;
  sol.gradients[static_cast<std::size_t>(NT)] = lattice_gradient(grid, problem.terminal);
  check_divergence(problem.terminal, NT, scheme.blowup_bound);

  if (problem.source_depends_on_solution) {
    sol.meta.stability_dt = estimate_stability_dt(problem, grid, xs, horizon, problem.terminal,
                                                  sol.gradients[static_cast<std::size_t>(NT)]);
    sol.meta.stability_ok = dt <= sol.meta.stability_dt;
  } else {
    sol.meta.stability_dt = std::numeric_limits<double>::infinity();
  }

  ImplicitOperator op(dyn, grid, dt);
  MatrixXd f(nodes, J);
  MatrixXd f_prev(nodes, J);
  for (int n = NT - 1; n >= 0; --n) {
    const double t = grid.time(n, horizon);
    const double t_next = grid.time(n + 1, horizon);
    const auto &u_next = sol.values[static_cast<std::size_t>(n) + 1];
    const auto &g_next = sol.gradients[static_cast<std::size_t>(n) + 1];
    op.prepare(t);

    evaluate_source(problem, grid, xs, t_next, u_next, g_next, f);
    if (!problem.source_depends_on_solution) {
      evaluate_source(problem, grid, xs, t, u_next, g_next, f_prev);
      f = 0.5 * (f + f_prev);
    }
    MatrixXd u = u_next - dt * f;
    op.solve(u);
    MatrixXd grad = lattice_gradient(grid, u);

    if (scheme.inner_picard && problem.source_depends_on_solution) {
      for (int k = 0; k < scheme.inner_picard_max_iter; ++k) {
        evaluate_source(problem, grid, xs, t, u, grad, f);
        MatrixXd next = u_next - dt * f;
        op.solve(next);
        const double change = (next - u).cwiseAbs().maxCoeff();
        u = std::move(next);
        grad = lattice_gradient(grid, u);
        if (change <= scheme.inner_picard_tol)
          break;
      }
    }
    check_divergence(u, n, scheme.blowup_bound);
    sol.values[static_cast<std::size_t>(n)] = std::move(u);
    sol.gradients[static_cast<std::size_t>(n)] = std::move(grad);
  }
  return sol;
}

SolutionGrid solve_backward(const Economy &econ, const StateDynamics &dyn, const Driver &driver,
                            const GridSpec &grid, const SchemeParams &scheme) {
  grid.validate();
  const int J = econ.num_agents() + 1;
  BackwardProblem problem;
  problem.components = J;
  problem.terminal.resize(grid.num_nodes(), J);
  for (Index p = 0; p < grid.num_nodes(); ++p)
    problem.terminal.row(p) = driver.terminal(grid.node(p)).transpose();

  driver.reset_clamps();
  problem.source = [&](double t, Index, const VectorXd &x, const VectorXd &u, const MatrixXd &Du,
                       Eigen::Ref<VectorXd> out) {
    const MatrixXd z = Du * dyn.diffusion(t, x);
    driver.evaluate(t, x, point_data(econ, t, x), u, z, out);
  };
  SolutionGrid sol = solve_semilinear(dyn, econ.horizon, grid, problem, scheme);
  sol.meta.driver = driver.describe();
  sol.meta.exp_clamps = driver.clamps().count;
  return sol;
}

std::vector<MatrixXd> extract_Z(const SolutionGrid &sol, const StateDynamics &dyn) {
  const int J = sol.components;
  const int d = sol.dim();
  std::vector<MatrixXd> Z(sol.gradients.size());
  for (std::size_t n = 0; n < sol.gradients.size(); ++n) {
    const double t = sol.time(static_cast<int>(n));
    MatrixXd &zn = Z[n];
    zn.resize(sol.grid.num_nodes(), J * d);
    for (Index p = 0; p < sol.grid.num_nodes(); ++p) {
      const MatrixXd z = sol.gradient(static_cast<int>(n), p) * dyn.diffusion(t, sol.grid.node(p));
      for (int j = 0; j < J; ++j)
        for (int k = 0; k < d; ++k)
          zn(p, j * d + k) = z(j, k);
    }
  }
  return Z;
}

SolutionGrid solve_linear_expectation(const StateDynamics &dyn, double horizon,
                                      const std::vector<VectorXd> &source, const GridSpec &grid,
                                      const SchemeParams &scheme) {
  grid.validate();
  if (static_cast<int>(source.size()) != grid.t_steps + 1)
    throw InvalidInput("source must provide one slice per time level");
  for (const auto &s : source)
    if (s.size() != grid.num_nodes() || !s.allFinite())
      throw InvalidInput("source slice has the wrong size or non-finite entries");
  const double dt = grid.dt(horizon);

  BackwardProblem problem;
  problem.components = 1;
  problem.terminal = MatrixXd::Zero(grid.num_nodes(), 1);
  problem.source_depends_on_solution = false;
  problem.source = [&](double t, Index p, const VectorXd &, const VectorXd &, const MatrixXd &,
                       Eigen::Ref<VectorXd> out) {
    const auto n = static_cast<std::size_t>(std::lround(t / dt));
    out(0) = -source[n](p);
  };
  return solve_semilinear(dyn, horizon, grid, problem, scheme);
}

SolutionGrid solve_linear_expectation(const StateDynamics &dyn, double horizon,
                                      const ScalarField &source, const GridSpec &grid,
                                      const SchemeParams &scheme) {
  grid.validate();
  std::vector<VectorXd> tab(static_cast<std::size_t>(grid.t_steps) + 1);
  for (int n = 0; n <= grid.t_steps; ++n) {
    VectorXd &s = tab[static_cast<std::size_t>(n)];
    s.resize(grid.num_nodes());
    for (Index p = 0; p < grid.num_nodes(); ++p)
      s(p) = source(grid.time(n, horizon), grid.node(p));
  }
  return solve_linear_expectation(dyn, horizon, tab, grid, scheme);
}

NodeDifference compare_solutions(const SolutionGrid &a, const SolutionGrid &b, double tol) {
  if (a.values.size() != b.values.size() || a.components != b.components ||
      a.grid.num_nodes() != b.grid.num_nodes())
    throw InvalidInput("solutions live on different lattices");
  NodeDifference out;
  for (std::size_t n = 0; n < a.values.size(); ++n) {
    const MatrixXd diff = (a.values[n] - b.values[n]).cwiseAbs();
    for (Index p = 0; p < diff.rows(); ++p) {
      for (Index j = 0; j < diff.cols(); ++j) {
        const double v = diff(p, j);
        out.max_abs = std::max(out.max_abs, v);
        if (out.within && !(v <= tol)) {
          out.within = false;
          out.time_index = static_cast<int>(n);
          out.node = p;
          out.component = static_cast<int>(j);
        }
      }
    }
  }
  return out;
}

} // namespace radner
