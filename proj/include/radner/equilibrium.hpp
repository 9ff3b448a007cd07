#pragma once

#include "radner/grid.hpp"
#include "radner/model.hpp"

#include <cstdint>
#include <vector>

namespace radner {

/// Equilibrium market on the solution lattice.
struct MarketBundle {
  GridSpec grid;
  double horizon = 1.0;
  int agents = 0;
  std::vector<VectorXd> A;     // [time] nodes, exp(a)
  std::vector<VectorXd> mu;    // [time] nodes
  std::vector<MatrixXd> sigma; // [time] nodes x d
  std::vector<MatrixXd> Z;     // [time] nodes x (I d), agent i in columns i d .. i d + d - 1
};

/// mu = ba mu_e + |sigma|^2 / 2 - sum_i kappa^i |Z^i|^2 / 2.
double drift_formula(double ba_mu_e, const RowVectorXd &sigma, const MatrixXd &Z,
                     const VectorXd &kappas);

MarketBundle assemble_market(const SolutionGrid &sol, const Economy &econ,
                             const StateDynamics &dyn);

struct ClearingIdentity {
  double max_residual = 0.0; // max over nodes of |a + sum kappa Y - ba e|
  double terminal_residual = 0.0;
  int time_index = -1;
  Index node = -1;
};

ClearingIdentity clearing_identity(const SolutionGrid &sol, const Economy &econ);

/// Market coefficients and solution values at one (t, x).
struct MarketPoint {
  double A = 1.0;
  double mu = 0.0;
  RowVectorXd sigma;
  double a = 0.0;
  VectorXd Y;          // I
  VectorXd endowments; // I
  bool extrapolated = false;
};

MarketPoint market_at(const MarketBundle &bundle, const SolutionGrid &sol, const Economy &econ,
                      double t, const VectorXd &x);

/// X + (mu X + e - c) dt + X sigma dB for an arbitrary consumption rate c.
double wealth_step(double mu, const RowVectorXd &sigma, double X, double endowment,
                   double consumption, double dt, const VectorXd &dB);

/// Consumption (a + Y^i) / alpha^i + X / A.
double optimal_consumption(const MarketPoint &pt, double alpha, int i, double X);

/// One Euler step of the optimal wealth of agent i.
double wealth_sde_step(const MarketPoint &pt, const Economy &econ, int i, double X, double dt,
                       const VectorXd &dB);

/// A simulated path with every agent's optimal strategy.
struct StrategyPath {
  std::uint64_t path_id = 0;
  std::vector<double> times;   // n_steps + 1
  std::vector<VectorXd> state; // n_steps + 1
  VectorXd A, a, mu, e;        // n_steps + 1; e is the aggregate endowment
  VectorXd sigma_dB;           // n_steps, sigma(t_k) dB_k
  MatrixXd Y, endowments;      // (n_steps + 1) x I
  MatrixXd X, pi, c;           // (n_steps + 1) x I
};

struct ClearingReport {
  std::size_t path_count = 0;
  std::uint64_t seed = 0;
  double sup_pi = 0.0;          // max |sum pi - 1|
  double sup_c = 0.0;           // max |sum c - (e + 1)|
  double terminal_wealth = 0.0; // max |sum X_T - 1|
  double mean_pi = 0.0;         // means over paths of the per-path maxima
  double mean_c = 0.0;
  double mean_terminal = 0.0;
};

/// Per-path maxima, reduced in path order.
class ClearingAccumulator {
public:
  struct PathMaxima {
    double pi = 0.0;
    double c = 0.0;
    double terminal = 0.0;
  };

  static PathMaxima measure(const StrategyPath &path);
  void add(const PathMaxima &m);
  ClearingReport report(std::uint64_t seed) const;

private:
  ClearingReport r_;
};

ClearingReport clearing_residuals(const std::vector<StrategyPath> &paths, const Economy &econ,
                                  std::uint64_t seed = 0);

/// mu_V = -e^{-alpha c} + w (1 - log w) - alpha c w with w = exp(-alpha X / A - Y) / A.
double optimality_drift(double alpha, double c, double X, double A, double Y);

/// c = c_hat(X) + shift + wealth_slope X / A, wealth re-simulated so the
/// strategy stays self-financing.
struct ConsumptionPerturbation {
  double shift = 0.0;
  double wealth_slope = 0.0;
};

std::vector<ConsumptionPerturbation> default_perturbations();

/// Samples of mu_V along the path for agent i under the perturbed rule
/// (the optimal strategy when both parameters vanish).
std::vector<double> optimality_drift_check(const StrategyPath &path, const Economy &econ, int i,
                                           const ConsumptionPerturbation &rule = {});

} // namespace radner
