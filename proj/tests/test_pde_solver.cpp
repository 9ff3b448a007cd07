#include "helpers.hpp"

#include "radner/errors.hpp"
#include "radner/pde_solver.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace radner;
using namespace radner::testing;

namespace {

struct ClosedFormError {
  double a = 0.0;
  double y = 0.0;
};

// Sup over interior nodes of the error against log(1 + T - t).
ClosedFormError zero_endowment_error(int nt, int nx) {
  const auto dyn = brownian();
  const auto econ = economy({{1.0, "zero", 1.0}}, dyn);
  const auto sol = solve_backward(econ, dyn, Driver::full(econ), grid1d(nt, nx));
  ClosedFormError e;
  for (int n = 0; n <= nt; ++n) {
    const double exact = std::log1p(1.0 - sol.time(n));
    const MatrixXd &v = sol.values[static_cast<std::size_t>(n)];
    for (Index p = 1; p + 1 < v.rows(); ++p) {
      e.a = std::max(e.a, std::abs(v(p, 0) - exact));
      e.y = std::max(e.y, std::abs(v(p, 1) + exact));
    }
  }
  return e;
}

} // namespace

TEST(SolveBackward, ZeroEndowmentClosedForm) {
  const auto e = zero_endowment_error(400, 40);
  EXPECT_LT(e.a, 1e-3);
  EXPECT_LT(e.y, 1e-3);
}

TEST(SolveBackward, FirstOrderConvergence) {
  const auto coarse = zero_endowment_error(100, 20);
  const auto fine = zero_endowment_error(200, 40);
  EXPECT_GE(std::log2(coarse.a / fine.a), 0.9);
  EXPECT_GE(std::log2(coarse.y / fine.y), 0.9);
}

TEST(SolveBackward, ConstantEndowment) {
  const auto dyn = brownian();
  const auto econ = economy({{1.0, "constant:0.5", 0.4}, {3.0, "constant:0.1", 0.6}}, dyn);
  const auto sol = solve_backward(econ, dyn, Driver::full(econ), grid1d(400, 40));
  const MatrixXd &v0 = sol.values.front();
  for (Index p = 0; p < v0.rows(); ++p) {
    EXPECT_NEAR(v0(p, 0), std::log(2.0), 1e-3);
    EXPECT_NEAR(v0(p, 1), 0.5 - v0(p, 0), 1e-12);
    EXPECT_NEAR(v0(p, 2), 0.3 - v0(p, 0), 1e-12);
  }
}

TEST(SolveBackward, TerminalSliceExact) {
  const auto dyn = brownian();
  const auto econ = economy({{2.0, "affine:0.1,0.2", 1.0, 2.0}}, dyn);
  const Driver d = Driver::full(econ);
  const auto sol = solve_backward(econ, dyn, d, grid1d(50, 20));
  for (Index p = 0; p < sol.grid.num_nodes(); ++p)
    EXPECT_EQ((sol.values.back().row(p).transpose() - d.terminal(sol.grid.node(p))).norm(), 0.0);
}

TEST(SolveBackward, DivergenceReported) {
  const auto dyn = brownian();
  const auto econ = economy({{1.0, "zero", 1.0}}, dyn);
  SchemeParams scheme;
  scheme.blowup_bound = 0.1;
  try {
    solve_backward(econ, dyn, Driver::full(econ), grid1d(20, 8), scheme);
    FAIL() << "expected a divergence";
  } catch (const DivergenceError &e) {
    EXPECT_GE(e.time_index, 0);
    EXPECT_GE(e.node, 0);
  }
}

TEST(ExtractZ, ScalesByDiffusion) {
  const auto dyn2 = brownian(1, "constant:2");
  SolutionGrid sol;
  sol.grid = grid1d(2, 4);
  sol.components = 1;
  for (int n = 0; n <= 2; ++n) {
    MatrixXd v(5, 1);
    for (Index p = 0; p < 5; ++p)
      v(p, 0) = 1.5 * sol.grid.node(p)(0);
    sol.values.push_back(v);
    sol.gradients.push_back(lattice_gradient(sol.grid, v));
  }
  const auto Z = extract_Z(sol, dyn2);
  EXPECT_NEAR(Z[1](2, 0), 3.0, 1e-12);

  const auto decay = make_state_dynamics("zero", "exp_decay:1", 1, 1.0, VectorXd::Zero(1));
  for (auto &v : sol.values)
    v *= 2.0;
  for (auto &g : sol.gradients)
    g *= 2.0;
  const auto Zd = extract_Z(sol, decay);
  EXPECT_NEAR(Zd[0](2, 0), 3.0, 1e-12);
  EXPECT_NEAR(Zd[2](2, 0), 3.0 * std::exp(-1.0), 1e-12);
}

TEST(LinearExpectation, ZeroSource) {
  const auto dyn = brownian();
  const auto w = solve_linear_expectation(dyn, 1.0, [](double, const VectorXd &) { return 0.0; },
                                          grid1d(20, 8));
  for (const auto &v : w.values)
    EXPECT_EQ(v.cwiseAbs().maxCoeff(), 0.0);
}

TEST(LinearExpectation, ConstantSource) {
  const auto dyn = brownian();
  const auto w = solve_linear_expectation(dyn, 1.0, [](double, const VectorXd &) { return 1.0; },
                                          grid1d(200, 16));
  for (int n = 0; n <= 200; ++n)
    EXPECT_NEAR(w.values[static_cast<std::size_t>(n)].maxCoeff(), 1.0 - w.time(n), 1e-4);
}

TEST(LinearExpectation, LinearSource) {
  const auto dyn = brownian();
  const auto w = solve_linear_expectation(
      dyn, 1.0, [](double t, const VectorXd &) { return 2.0 * (1.0 - t); }, grid1d(200, 16));
  for (int n = 0; n <= 200; ++n) {
    const double r = 1.0 - w.time(n);
    EXPECT_NEAR(w.values[static_cast<std::size_t>(n)](8, 0), r * r, 1e-3);
  }
}

TEST(CompareSolutions, ReportsFirstDisagreement) {
  const auto dyn = brownian();
  const auto econ = economy({{1.0, "zero", 1.0}}, dyn);
  const auto a = solve_backward(econ, dyn, Driver::full(econ), grid1d(20, 8));
  auto b = a;
  b.values[3](4, 1) += 1e-6;
  const auto same = compare_solutions(a, a, 0.0);
  EXPECT_TRUE(same.within);
  const auto diff = compare_solutions(a, b, 1e-8);
  EXPECT_FALSE(diff.within);
  EXPECT_EQ(diff.time_index, 3);
  EXPECT_EQ(diff.node, 4);
  EXPECT_EQ(diff.component, 1);
}

TEST(SolveBackward, TwoDimensional) {
  const auto dyn = brownian(2);
  const auto econ = economy({{1.0, "zero", 1.0}}, dyn);
  GridSpec g;
  g.t_steps = 100;
  g.x_min = VectorXd::Constant(2, -2.0);
  g.x_max = VectorXd::Constant(2, 2.0);
  g.x_steps = {8, 8};
  const auto sol = solve_backward(econ, dyn, Driver::full(econ), g);
  EXPECT_NEAR(sol.values.front()(40, 0), std::log(2.0), 5e-3);
}
