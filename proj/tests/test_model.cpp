#include "helpers.hpp"

#include "radner/errors.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace radner;
using namespace radner::testing;

TEST(DerivedConstants, SingleAgent) {
  const std::vector<double> a{1.0};
  const auto c = derived_constants(a);
  EXPECT_DOUBLE_EQ(c.ba, 1.0);
  EXPECT_DOUBLE_EQ(c.kappas(0), 1.0);
}

TEST(DerivedConstants, Heterogeneous) {
  const std::vector<double> a{1.0, 2.0};
  const auto c = derived_constants(a);
  EXPECT_NEAR(c.ba, 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(c.kappas(0), 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(c.kappas(1), 1.0 / 3.0, 1e-15);
}

TEST(DerivedConstants, Equal) {
  const std::vector<double> a{2.0, 2.0};
  const auto c = derived_constants(a);
  EXPECT_DOUBLE_EQ(c.ba, 1.0);
  EXPECT_DOUBLE_EQ(c.kappas(0), 0.5);
  EXPECT_DOUBLE_EQ(c.kappas(1), 0.5);
  EXPECT_NEAR(c.kappas.sum(), 1.0, 1e-15);
}

TEST(DerivedConstants, RejectsNonPositive) {
  const std::vector<double> a{1.0, 0.0};
  EXPECT_THROW(derived_constants(a), InvalidInput);
}

TEST(StateDynamics, DecayingVolatilityPasses) {
  const StateDynamics dyn = make_state_dynamics("zero", "exp_decay:1", 1, std::exp(1.0),
                                                VectorXd::Zero(1));
  SamplePlan plan;
  const auto r = validate_state_dynamics(dyn, plan);
  EXPECT_TRUE(r.pass());
  EXPECT_NEAR(r.min_ellipticity, std::exp(-1.0), 1e-3);
}

TEST(StateDynamics, UnboundedDriftFails) {
  const StateDynamics dyn =
      make_state_dynamics("affine:0,1", "constant:1", 1, 10.0, VectorXd::Zero(1));
  SamplePlan plan;
  plan.x_min = -100.0;
  plan.x_max = 100.0;
  const auto r = validate_state_dynamics(dyn, plan);
  EXPECT_FALSE(r.bounded);
  EXPECT_FALSE(r.pass());
}

TEST(StateDynamics, DegenerateDiffusionFails) {
  const StateDynamics dyn = make_state_dynamics("zero", "constant:0", 1, 1.0, VectorXd::Zero(1));
  const auto r = validate_state_dynamics(dyn, SamplePlan{});
  EXPECT_FALSE(r.elliptic);
}

TEST(EndowmentDecomposition, ConstantHasNoDynamics) {
  const auto dyn = brownian();
  const auto econ = economy({{1.0, "constant:0.7", 1.0}}, dyn);
  const VectorXd x = VectorXd::Constant(1, 0.3);
  EXPECT_NEAR(econ.mu_e(0.2, x), 0.0, 1e-12);
  EXPECT_NEAR(econ.sigma_e(0.2, x)(0), 0.0, 1e-12);
}

TEST(EndowmentDecomposition, IdentityMap) {
  const auto dyn = brownian();
  const auto econ = economy({{1.0, "affine:0,1", 1.0}}, dyn);
  const VectorXd x = VectorXd::Constant(1, 0.4);
  EXPECT_NEAR(econ.mu_e(0.5, x), 0.0, 1e-9);
  EXPECT_NEAR(econ.sigma_e(0.5, x)(0), 1.0, 1e-9);
}

TEST(EndowmentDecomposition, PureTimeDrift) {
  const auto dyn = brownian();
  SmoothField f;
  f.value = [](double t, const VectorXd &) { return t; };
  const auto dec = endowment_decomposition(f, dyn);
  const VectorXd x = VectorXd::Constant(1, -0.2);
  EXPECT_NEAR(dec.mu_e(0.5, x), 1.0, 1e-6);
  EXPECT_NEAR(dec.sigma_e(0.5, x)(0), 0.0, 1e-8);
}

TEST(EndowmentDecomposition, QuadraticMatchesIto) {
  // e = x^2 under dxi = 2 dB: mu_e = 0.5 * 2 * 4 = 4, sigma_e = 2x * 2.
  const auto dyn = brownian(1, "constant:2");
  SmoothField f;
  f.value = [](double, const VectorXd &x) { return x(0) * x(0); };
  const auto dec = endowment_decomposition(f, dyn);
  const VectorXd x = VectorXd::Constant(1, 0.75);
  EXPECT_NEAR(dec.mu_e(0.1, x), 4.0, 1e-5);
  EXPECT_NEAR(dec.sigma_e(0.1, x)(0), 3.0, 1e-6);
}

TEST(Economy, UnitSupplyRequired) {
  const auto dyn = brownian();
  const auto good = economy({{1.0, "zero", 0.25}, {2.0, "zero", 0.75}}, dyn);
  EXPECT_NO_THROW(require_unit_supply(good));
  const auto bad = economy({{1.0, "zero", 0.5}, {2.0, "zero", 0.6}}, dyn);
  EXPECT_THROW(require_unit_supply(bad), InvalidInput);
}

TEST(Economy, AggregateEndowment) {
  const auto dyn = brownian();
  const auto econ = economy({{1.0, "constant:0.5", 0.5}, {2.0, "affine:1,2", 0.5}}, dyn);
  const VectorXd x = VectorXd::Constant(1, 0.25);
  EXPECT_NEAR(econ.aggregate_endowment(0.0, x), 0.5 + 1.5, 1e-15);
  EXPECT_NEAR(econ.ba, 2.0 / 3.0, 1e-15);
}

TEST(OuTransform, VolatilityAndConstant) {
  SmoothField tanh_e = make_endowment("affine:0,1", 1);
  const auto out = ou_transform(2.0, 0.0, 0.5, 1.0, tanh_e, 1.0);
  const VectorXd x = VectorXd::Zero(1);
  EXPECT_NEAR(out.dynamics.diffusion(0.5, x)(0, 0), std::exp(-1.0), 1e-15);
  EXPECT_NEAR(out.dynamics.regularity_K, std::exp(2.0), 1e-12);
  EXPECT_NEAR(out.endowment(0.0, x), 0.5, 1e-15);
  EXPECT_THROW(ou_transform(0.0, 0.0, 0.0, 1.0, tanh_e), InvalidInput);
}
