#include "helpers.hpp"

#include "radner/apriori.hpp"
#include "radner/pde_solver.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace radner;
using namespace radner::testing;

TEST(Phi, Values) {
  EXPECT_EQ(phi(0.0), 0.0);
  EXPECT_NEAR(phi(1.0), (std::exp(2.0) - 3.0) / 4.0, 1e-15);
  EXPECT_NEAR(phi(1.0), 1.097264, 1e-6);
  EXPECT_DOUBLE_EQ(phi(-1.0), phi(1.0));
}

TEST(Phi, DifferentialInequality) {
  // phi'' - 2 |phi'| = 1 for x > 0.
  for (double x : {0.1, 0.5, 1.0, 2.0}) {
    const double h = 1e-4;
    const double pp = (phi_prime(x + h) - phi_prime(x - h)) / (2 * h);
    EXPECT_NEAR(pp - 2.0 * std::abs(phi_prime(x)), 1.0, 1e-6);
    EXPECT_GE(phi_prime(x), 0.0);
  }
}

TEST(Gronwall, Formula) {
  // C_a = 0: (alpha e + T + T alpha e) exp(T).
  EXPECT_NEAR(gronwall_bound(2.0, 0.5, 1.0, 1.0, 0.0), (1.0 + 1.0 + 1.0) * std::exp(1.0), 1e-13);
  const double Ca = 0.5;
  const double expect = (1.0 + std::exp(2 * Ca) + std::exp(Ca)) * std::exp(std::exp(Ca));
  EXPECT_NEAR(gronwall_bound(1.0, 1.0, 1.0, 0.5, 1.0), expect, 1e-12);
}

TEST(BmoBound, NonNegativeAndMonotone) {
  EXPECT_EQ(bmo_analytic_bound(0.0, 1.0, 1.0), 0.0);
  EXPECT_LT(bmo_analytic_bound(0.5, 1.0, 1.0), bmo_analytic_bound(1.0, 1.0, 1.0));
  EXPECT_NEAR(bmo_analytic_bound(1.0, 2.0, 1.0),
              2.0 * (phi(1.0) + 2.0 * phi_prime(1.0) * 2.0), 1e-13);
}

TEST(LatticeNorms, ConstantEndowment) {
  const auto econ = economy({{1.0, "constant:0.3", 0.5}, {2.0, "constant:-0.7", 0.5}}, brownian());
  const auto n = lattice_sup_norms(econ, grid1d(10, 8));
  EXPECT_NEAR(n.mu_e, 0.0, 1e-12);
  EXPECT_DOUBLE_EQ(n.endowment[0], 0.3);
  EXPECT_DOUBLE_EQ(n.endowment[1], 0.7);
}

TEST(LowerBound, HoldsOnSolvedEconomy) {
  const auto dyn = brownian();
  const auto econ = economy({{1.0, "affine:0,-0.2", 0.5, 1.0}, {2.0, "constant:0.3", 0.5}}, dyn);
  const GridSpec g = grid1d(100, 20, 3.0);
  const auto sol = solve_backward(econ, dyn, Driver::full(econ), g);
  const auto norms = lattice_sup_norms(econ, g);
  const auto lb = check_a_lower_bound(sol, econ, norms.mu_e);
  EXPECT_TRUE(lb.pass);
  const auto gc = check_gronwall(sol, econ, norms);
  EXPECT_TRUE(gc.pass);
  ASSERT_EQ(gc.Y_sup.size(), 2u);
}

TEST(LowerBound, DetectsViolation) {
  const auto dyn = brownian();
  const auto econ = economy({{1.0, "zero", 1.0}}, dyn);
  auto sol = solve_backward(econ, dyn, Driver::full(econ), grid1d(20, 8));
  sol.values[5](3, 0) = -1.0;
  const auto lb = check_a_lower_bound(sol, econ, 0.0);
  EXPECT_FALSE(lb.pass);
  EXPECT_EQ(lb.worst_time_index, 5);
  EXPECT_EQ(lb.worst_node, 3);
}

TEST(ClearingScale, PositiveAndFinite) {
  const auto dyn = make_state_dynamics("zero", "exp_decay:1", 1, std::exp(1.0), VectorXd::Zero(1));
  const auto econ = economy({{1.0, "ou_income:1,0,0.5,1,0.5", 0.5}, {2.0, "constant:0.3", 0.5}}, dyn);
  const double s = clearing_scale(econ, dyn, grid1d(50, 20), 1.0);
  EXPECT_GT(s, 0.0);
  EXPECT_TRUE(std::isfinite(s));
}
