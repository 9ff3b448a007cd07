#pragma once

#include "radner/drivers.hpp"
#include "radner/model.hpp"

#include <functional>
#include <vector>

namespace radner {

/// Quadrature for the kernel integrals on a (time x space) evaluation lattice.
/// The time integral uses s = t + r^2 with a midpoint rule in r; the space
/// integral uses x' = x + lambda r y with a trapezoid rule in y.
struct QuadPlan {
  int time_steps = 40;
  int space_nodes = 33;
  double window = 0.0; // half-width around x0; 0 selects 4 lambda sqrt(T)
  int r_nodes = 32;
  double y_range = 8.0; // kernel standard deviations
  int y_nodes = 65;
};

struct KernelSpec {
  double lambda = 1.0;
  double beta = 0.0; // 0 selects beta automatically
  QuadPlan quad;
};

/// Values and spatial derivatives of a J-component function on the lattice.
struct LatticeFunction {
  std::vector<double> times;
  VectorXd xs;
  int components = 0;
  std::vector<MatrixXd> values; // [time] nodes x J
  std::vector<MatrixXd> grads;  // [time] nodes x J

  double horizon() const { return times.back(); }
};

LatticeFunction make_lattice(const KernelSpec &spec, double horizon, double x0, int components);

/// (2 pi lambda^2 (s - t))^{-d/2} exp(-|x' - x|^2 / (2 lambda^2 (s - t))). Throws
/// std::domain_error unless t < s.
double heat_kernel(double lambda, double t, const VectorXd &x, double s, const VectorXd &xp);
double heat_kernel(double lambda, double t, double x, double s, double xp);

/// Nodes and weights of the trapezoid rule on [-range, range].
struct TrapezoidRule {
  VectorXd nodes;
  VectorXd weights;
};
TrapezoidRule trapezoid_rule(double range, int n);

/// PDE nonlinearity F(t, x, u, Du) of u_t + A u + F = 0 (d = 1).
using KernelNonlinearity = std::function<void(double t, double x, const VectorXd &u,
                                              const VectorXd &Du, Eigen::Ref<VectorXd> out)>;
using TerminalFunction = std::function<VectorXd(double x)>;

/// Phi[u](t, x) = int_t^T int F(s, x', u, Du) p(t, x; s, x') dx' ds and its x-derivative.
LatticeFunction apply_Phi(const LatticeFunction &u, const KernelNonlinearity &F,
                          const KernelSpec &spec);

/// Psi[g](t, x) = int g(x') p(t, x; T, x') dx' and its x-derivative on the lattice of `shape`.
LatticeFunction apply_Psi(const TerminalFunction &g, const LatticeFunction &shape,
                          const KernelSpec &spec);

/// Trapezoid in t of e^{-beta (T - t)} (||u(t)||_inf + ||Du(t)||_inf).
double weighted_norm(const LatticeFunction &u, double beta);

struct PicardOptions {
  double tol = 1e-10;
  int max_iter = 60;
  double contraction_threshold = 0.75;
  double max_beta = 1e9;
};

struct PicardTrace {
  double lipschitz = 0.0;     // measured |dF/du| + |dF/dDu|
  double beta = 0.0;          // final weight
  std::vector<double> betas;  // every weight tried
  std::vector<double> diff_norms; // weighted |u_{k+1} - u_k| at the final beta
  std::vector<double> factors;    // successive ratios of diff_norms
  double max_factor = 0.0;    // over ratios above the round-off floor
  double fixed_point_residual = 0.0;
  double sup_norm = 0.0;      // sup over t of ||u(t)||_inf
  int iterations = 0;
  bool converged = false;
};

struct PicardResult {
  LatticeFunction u;
  PicardTrace trace;

  /// u(0, x0) by linear interpolation in x.
  VectorXd at_origin(double x0) const;
};

PicardResult picard_solve(const KernelNonlinearity &F, const TerminalFunction &g, int components,
                          double horizon, double x0, const KernelSpec &spec,
                          const PicardOptions &options = {});

/// Oracle for the equilibrium system: F = -f(t, x, u, lambda Du). Requires d = 1,
/// Lambda = 0 and Sigma = lambda; throws UnsupportedOracle otherwise.
PicardResult picard_solve(const Economy &econ, const StateDynamics &dyn, const Driver &driver,
                          const KernelSpec &spec, const PicardOptions &options = {});

} // namespace radner
