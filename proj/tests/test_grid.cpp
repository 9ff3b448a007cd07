#include "helpers.hpp"

#include "radner/errors.hpp"
#include "radner/tridiagonal.hpp"

#include <gtest/gtest.h>

using namespace radner;
using namespace radner::testing;

TEST(GridSpec, NodesAndSpacing) {
  const GridSpec g = grid1d(10, 8, 2.0);
  EXPECT_EQ(g.num_nodes(), 9);
  EXPECT_DOUBLE_EQ(g.dx(0), 0.5);
  EXPECT_DOUBLE_EQ(g.node(0)(0), -2.0);
  EXPECT_DOUBLE_EQ(g.node(8)(0), 2.0);
  EXPECT_DOUBLE_EQ(g.time(5, 2.0), 1.0);
  EXPECT_TRUE(g.on_boundary(0));
  EXPECT_FALSE(g.on_boundary(4));
}

TEST(GridSpec, TwoDimensionalIndexing) {
  GridSpec g;
  g.t_steps = 4;
  g.x_min = VectorXd::Constant(2, -1.0);
  g.x_max = VectorXd::Constant(2, 1.0);
  g.x_steps = {4, 2};
  EXPECT_EQ(g.num_nodes(), 15);
  const Index flat = g.flat_index(3, 2);
  const auto mi = g.multi_index(flat);
  EXPECT_EQ(mi[0], 3);
  EXPECT_EQ(mi[1], 2);
  EXPECT_DOUBLE_EQ(g.node(flat)(0), 0.5);
  EXPECT_DOUBLE_EQ(g.node(flat)(1), 1.0);
}

TEST(GridSpec, RejectsBadSpecs) {
  GridSpec g = grid1d(1, 8);
  EXPECT_THROW(g.validate(), InvalidInput);
  g = grid1d(4, 8);
  g.x_max(0) = -5.0;
  EXPECT_THROW(g.validate(), InvalidInput);
}

TEST(LatticeGradient, ExactForQuadratics) {
  const GridSpec g = grid1d(2, 16, 2.0);
  MatrixXd v(g.num_nodes(), 2);
  for (Index p = 0; p < g.num_nodes(); ++p) {
    const double x = g.node(p)(0);
    v(p, 0) = 3.0 * x - 1.0;
    v(p, 1) = x * x;
  }
  const MatrixXd d = lattice_gradient(g, v);
  for (Index p = 0; p < g.num_nodes(); ++p) {
    const double x = g.node(p)(0);
    EXPECT_NEAR(d(p, 0), 3.0, 1e-12);
    EXPECT_NEAR(d(p, 1), 2.0 * x, 1e-12);
  }
}

TEST(Interpolator, BilinearAndClamped) {
  const GridSpec g = grid1d(2, 4, 1.0);
  std::vector<MatrixXd> field(3, MatrixXd(g.num_nodes(), 1));
  for (int n = 0; n <= 2; ++n)
    for (Index p = 0; p < g.num_nodes(); ++p)
      field[static_cast<std::size_t>(n)](p, 0) = n + g.node(p)(0);
  const GridInterpolator interp(g, 1.0);
  const auto w = interp.locate(0.25, VectorXd::Constant(1, 0.3));
  EXPECT_FALSE(w.extrapolated);
  EXPECT_NEAR(interp.interpolate(field, w, 0), 0.5 + 0.3, 1e-14);
  const auto out = interp.locate(0.5, VectorXd::Constant(1, 3.0));
  EXPECT_TRUE(out.extrapolated);
  EXPECT_NEAR(interp.interpolate(field, out, 0), 1.0 + 1.0, 1e-14);
}

TEST(Tridiagonal, SolvesSystem) {
  const Index n = 6;
  VectorXd lo = VectorXd::Constant(n, -1.0), di = VectorXd::Constant(n, 4.0),
           up = VectorXd::Constant(n, -1.0);
  VectorXd x(n);
  x << 1, 2, 3, 4, 5, 6;
  VectorXd rhs(n);
  for (Index i = 0; i < n; ++i)
    rhs(i) = di(i) * x(i) + (i > 0 ? lo(i) * x(i - 1) : 0.0) + (i + 1 < n ? up(i) * x(i + 1) : 0.0);
  const TridiagonalSolver solver(lo, di, up);
  MatrixXd b(n, 2);
  b.col(0) = rhs;
  b.col(1) = 2.0 * rhs;
  solver.solve(b);
  EXPECT_LT((b.col(0) - x).cwiseAbs().maxCoeff(), 1e-13);
  EXPECT_LT((b.col(1) - 2.0 * x).cwiseAbs().maxCoeff(), 1e-13);
}
