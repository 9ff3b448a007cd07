#pragma once

#include "radner/drivers.hpp"
#include "radner/grid.hpp"
#include "radner/model.hpp"

#include <functional>
#include <vector>

namespace radner {

struct SchemeParams {
  double blowup_bound = 1e6;
  bool inner_picard = false;
  int inner_picard_max_iter = 5;
  double inner_picard_tol = 1e-10;
};

/// dt-coefficient f(t, x, u, Du) of u_t + A u = f at one lattice node.
using Nonlinearity = std::function<void(double t, Index node, const VectorXd &x, const VectorXd &u,
                                        const MatrixXd &Du, Eigen::Ref<VectorXd> out)>;

struct BackwardProblem {
  int components = 1;
  MatrixXd terminal; // nodes x components
  Nonlinearity source;
  // When false, the source ignores (u, Du) and is averaged over both ends of
  // each time step.
  bool source_depends_on_solution = true;
};

/// Implicit generator, explicit nonlinearity:
///   (I - dt A(t_n)) u^n = u^{n+1} - dt f(t_{n+1}, u^{n+1}, Du^{n+1}),
/// with u'' = 0 imposed at the lattice edges.
SolutionGrid solve_semilinear(const StateDynamics &dyn, double horizon, const GridSpec &grid,
                              const BackwardProblem &problem, const SchemeParams &scheme = {});

/// Solves u_t + A u + F(t, x, u, Du) = 0, u(T) = g with F = -f(t, x, u, Du Sigma),
/// so that Y = u(t, xi_t) and Z = Du Sigma solve the system with driver f.
SolutionGrid solve_backward(const Economy &econ, const StateDynamics &dyn, const Driver &driver,
                            const GridSpec &grid, const SchemeParams &scheme = {});

/// Z = Du Sigma on every node: [time] nodes x (J d), row 0 is sigma.
std::vector<MatrixXd> extract_Z(const SolutionGrid &sol, const StateDynamics &dyn);

/// w_t + A w + h = 0, w(T) = 0; `source[n]` holds h(t_n, .) on the nodes.
SolutionGrid solve_linear_expectation(const StateDynamics &dyn, double horizon,
                                      const std::vector<VectorXd> &source, const GridSpec &grid,
                                      const SchemeParams &scheme = {});

SolutionGrid solve_linear_expectation(const StateDynamics &dyn, double horizon,
                                      const ScalarField &source, const GridSpec &grid,
                                      const SchemeParams &scheme = {});

struct NodeDifference {
  double max_abs = 0.0;
  bool within = true;
  // First node (in time-major order) where the difference exceeds the tolerance.
  int time_index = -1;
  Index node = -1;
  int component = -1;
};

NodeDifference compare_solutions(const SolutionGrid &a, const SolutionGrid &b, double tol);

} // namespace radner
