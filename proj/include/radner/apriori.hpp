#pragma once

#include "radner/grid.hpp"
#include "radner/model.hpp"

#include <vector>

namespace radner {

/// Sup norms of mu_e and of each e^i over the lattice (all nodes, at most
/// `max_time_levels` evenly spaced time levels).
struct LatticeSupNorms {
  double mu_e = 0.0;
  std::vector<double> endowment;
};

LatticeSupNorms lattice_sup_norms(const Economy &econ, const GridSpec &grid,
                                  int max_time_levels = 257);

/// a(t, x) >= -(T - t) ba ||mu_e|| - tol at every node.
struct LowerBoundCheck {
  double a_min = 0.0;
  double bound_at_a_min = 0.0;
  double worst_margin = 0.0; // min over nodes of a - bound, negative when violated
  int worst_time_index = -1;
  Index worst_node = -1;
  bool pass = false;
};

LowerBoundCheck check_a_lower_bound(const SolutionGrid &sol, const Economy &econ, double mu_e_sup,
                                    double tol = 1e-6);

/// Bound on |Y^i| from Gronwall's inequality:
///   (alpha ||e|| + T e^{2 C_a} + T e^{C_a} alpha ||e||) exp(e^{C_a} T),
/// with C_a = T ba ||mu_e|| the lower bound on a.
double gronwall_bound(double alpha, double endowment_sup, double horizon, double ba,
                      double mu_e_sup);

struct GronwallCheck {
  std::vector<double> Y_sup;
  std::vector<double> bound;
  bool pass = false;
};

GronwallCheck check_gronwall(const SolutionGrid &sol, const Economy &econ,
                             const LatticeSupNorms &norms);

/// phi(x) = (exp(2|x|) - 1 - 2|x|) / 4, phi'' - 2|phi'| = 1.
double phi(double x);
double phi_prime(double x);

/// Constant C with |h| <= C (1 + |Y^i|) for the Z-free part h of row i.
double z_free_growth_constant(double alpha, double endowment_sup, double horizon, double ba,
                              double mu_e_sup);

/// 2 (phi(y) + C T phi'(y) (1 + y)): bound on E[int_tau^T |Z^i|^2 | F_tau]
/// given ||Y^i|| <= y.
double bmo_analytic_bound(double y_sup, double C, double horizon);

/// Scale of the local truncation error the scheme commits on ba e, used to
/// normalize the clearing residual:
///   ba max(1, T) (1 + |e_tt| + |d_t mu_e| + |Lambda| |D^3 e| + |Sigma Sigma^T| |D^4 e|)
/// with sups over the lattice and derivatives by finite differences.
double clearing_scale(const Economy &econ, const StateDynamics &dyn, const GridSpec &grid,
                      double horizon);

} // namespace radner
