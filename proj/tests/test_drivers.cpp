#include "helpers.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace radner;
using namespace radner::testing;

namespace {

MatrixXd z2(int rows, int dim = 1) { return MatrixXd::Zero(rows, dim); }

} // namespace

TEST(Truncation, IotaAndQ) {
  EXPECT_DOUBLE_EQ(iota(-5.0, 1.0), -1.0);
  EXPECT_DOUBLE_EQ(iota(0.3, 1.0), 0.3);
  RowVectorXd z(2);
  z << 2.0, 0.0;
  EXPECT_DOUBLE_EQ(q_trunc(z, 1.0), 2.0);
  EXPECT_DOUBLE_EQ(q_trunc(z, 5.0), 4.0);
}

TEST(DriverFull, ZeroInputs) {
  const auto econ = economy({{1.0, "zero", 1.0}}, brownian());
  const VectorXd f = driver_full(econ, input(VectorXd::Zero(2), z2(2)));
  EXPECT_DOUBLE_EQ(f(0), -1.0);
  EXPECT_DOUBLE_EQ(f(1), 1.0);
}

TEST(DriverFull, QuadraticTermsEnterBothRows) {
  const auto econ = economy({{1.0, "zero", 1.0}}, brownian(2));
  MatrixXd z = z2(2, 2);
  z(1, 0) = 2.0;
  const VectorXd f = driver_full(econ, input(VectorXd::Zero(2), z, 0.0, VectorXd::Zero(2)));
  EXPECT_DOUBLE_EQ(f(0), -3.0);
  EXPECT_DOUBLE_EQ(f(1), 3.0);
}

TEST(DriverFull, EndowmentShift) {
  const auto econ = economy({{2.0, "constant:1", 1.0}}, brownian());
  const VectorXd f = driver_full(econ, input(VectorXd::Zero(2), z2(2)));
  EXPECT_DOUBLE_EQ(f(1), -1.0);
}

TEST(DriverTruncated, InactiveEqualsFull) {
  const auto econ = economy({{1.0, "affine:0,0.5", 0.5}, {2.0, "constant:0.2", 0.5}}, brownian());
  VectorXd y(3);
  y << 0.3, -0.2, 0.1;
  MatrixXd z(3, 1);
  z << 0.4, -0.5, 0.6;
  const auto in = input(y, z, 0.2, VectorXd::Constant(1, 0.1));
  const VectorXd full = driver_full(econ, in);
  EXPECT_LT((driver_truncated(econ, {2.0, {}}, in) - full).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((driver_intermediate(econ, {2.0, 2.0}, in) - full).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(DriverTruncated, ClampsExponent) {
  const auto econ = economy({{1.0, "zero", 1.0}}, brownian());
  VectorXd y(2);
  y << -5.0, 0.0;
  const VectorXd f = driver_truncated(econ, {1.0, {}}, input(y, z2(2)));
  EXPECT_NEAR(f(0), -std::exp(1.0), 1e-12);
}

TEST(DriverTruncated, QuadraticTruncation) {
  const auto econ = economy({{1.0, "zero", 1.0}}, brownian(2));
  MatrixXd z = z2(2, 2);
  z(1, 0) = 2.0;
  const VectorXd f = driver_truncated(econ, {1.0, {}}, input(VectorXd::Zero(2), z, 0.0, VectorXd::Zero(2)));
  // 1/2 q_1((2,0)) = 1 replaces 1/2 |z|^2 = 2.
  EXPECT_DOUBLE_EQ(f(1), 1.0 + 1.0);
  EXPECT_DOUBLE_EQ(f(0), -1.0 - 1.0);
}

TEST(DriverIntermediate, InnerClampOnly) {
  const auto econ = economy({{1.0, "zero", 1.0}}, brownian());
  VectorXd y(2);
  y << -5.0, 0.0;
  const VectorXd f = driver_intermediate(econ, {10.0, 1.0}, input(y, z2(2)));
  EXPECT_NEAR(f(0), -std::exp(1.0), 1e-12);
}

TEST(DriverIntermediate, MixedClamps) {
  const auto econ = economy({{1.0, "zero", 1.0}}, brownian());
  VectorXd y(2);
  y << 0.1, 0.2;
  MatrixXd z(2, 1);
  z << 0.0, 2.0;
  const VectorXd f = driver_intermediate(econ, {1.0, 0.5}, input(y, z));
  const double ea = std::exp(-0.1);
  EXPECT_NEAR(f(1), 0.5 * 2.0 + ea * (1.0 + 0.1 + 0.2), 1e-14);
}

TEST(BfSplit, ReproducesDriverAndCertifies) {
  const auto econ = economy({{1.0, "affine:0,0.3", 0.5}, {3.0, "constant:0.2", 0.5}}, brownian());
  const TruncationLevel level{3.0, 2.0};
  const EconomyBounds bounds = declared_bounds(econ, 0.0);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-4.0, 4.0);
  for (int k = 0; k < 200; ++k) {
    VectorXd y(3);
    MatrixXd z(3, 1);
    for (int j = 0; j < 3; ++j) {
      y(j) = u(rng);
      z(j, 0) = u(rng);
    }
    const auto in = input(y, z, 0.5, VectorXd::Constant(1, 0.2 * u(rng)));
    const BfSplit s = bf_split(econ, level, bounds, in);
    const VectorXd f = driver_intermediate(econ, level, in);
    EXPECT_LE((s.f1 + s.f2 - f).cwiseAbs().maxCoeff(), 1e-12 * (1.0 + f.cwiseAbs().maxCoeff()));
    EXPECT_TRUE(s.f1_bounded);
    EXPECT_TRUE(s.f2_triangular);
  }
}

TEST(BfSplit, ZeroGradientHasNoQuadraticPart) {
  const auto econ = economy({{1.0, "zero", 1.0}}, brownian());
  const BfSplit s = bf_split(econ, {2.0, 2.0}, declared_bounds(econ, 0.0),
                             input(VectorXd::Zero(2), z2(2)));
  EXPECT_DOUBLE_EQ(s.f2.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_DOUBLE_EQ(s.f1(0), -1.0);
  EXPECT_DOUBLE_EQ(s.f1(1), 1.0);
}

TEST(DriverTruncated, LipschitzCertificate) {
  const auto econ = economy({{1.0, "constant:0.5", 0.5}, {2.0, "constant:-0.3", 0.5}}, brownian());
  const double N = 1.5;
  const double L = truncated_lipschitz_constant(econ, N, declared_bounds(econ, 0.0));
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int k = 0; k < 500; ++k) {
    VectorXd y1(3), y2(3);
    MatrixXd z1(3, 1), z2m(3, 1);
    for (int j = 0; j < 3; ++j) {
      y1(j) = u(rng);
      z1(j, 0) = u(rng);
      y2(j) = y1(j) + 0.1 * u(rng);
      z2m(j, 0) = z1(j, 0) + 0.1 * u(rng);
    }
    const VectorXd f1 = driver_truncated(econ, {N, {}}, input(y1, z1));
    const VectorXd f2 = driver_truncated(econ, {N, {}}, input(y2, z2m));
    const double dist = (y2 - y1).norm() + (z2m - z1).norm();
    EXPECT_LE((f2 - f1).norm(), L * dist * (1 + 1e-12));
  }
}

TEST(Driver, AggregationIdentity) {
  // The drift of F = a + sum kappa Y - ba e is e^{-a} F, so it vanishes on F = 0.
  const auto dyn = brownian();
  const auto econ = economy({{1.0, "affine:0.2,0.5", 0.5}, {2.0, "constant:0.3", 0.5}}, dyn);
  const double t = 0.3;
  const VectorXd x = VectorXd::Constant(1, 0.4);
  const double e = econ.aggregate_endowment(t, x);
  const double se = econ.sigma_e(t, x)(0);
  VectorXd y(3);
  y << 0.6, 0.1, 0.0;
  y(2) = (econ.ba * e - y(0) - econ.kappas(0) * y(1)) / econ.kappas(1);
  MatrixXd z(3, 1);
  z << 0.2, -0.4, 0.0;
  z(2, 0) = (econ.ba * se - z(0, 0) - econ.kappas(0) * z(1, 0)) / econ.kappas(1);
  const VectorXd f = driver_full(econ, input(y, z, t, x));
  const double driftF = f(0) + econ.kappas(0) * f(1) + econ.kappas(1) * f(2) - econ.ba * econ.mu_e(t, x);
  const double F = y(0) + econ.kappas(0) * y(1) + econ.kappas(1) * y(2) - econ.ba * e;
  EXPECT_NEAR(F, 0.0, 1e-14);
  EXPECT_NEAR(driftF, 0.0, 1e-12);
}

TEST(Driver, TerminalCondition) {
  const auto econ = economy({{2.0, "constant:0.5", 0.5}, {1.0, "affine:0,1", 0.5}}, brownian());
  const Driver d = Driver::full(econ);
  const VectorXd g = d.terminal(VectorXd::Constant(1, 3.0));
  EXPECT_DOUBLE_EQ(g(0), 0.0);
  EXPECT_DOUBLE_EQ(g(1), 1.0);
  EXPECT_DOUBLE_EQ(g(2), 3.0);
  const Driver t = Driver::truncated(econ, 2.0);
  EXPECT_DOUBLE_EQ(t.terminal(VectorXd::Constant(1, 3.0))(2), 2.0);
  EXPECT_EQ(t.describe(), "truncated(N=2)");
}
