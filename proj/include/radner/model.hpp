#pragma once

#include "radner/types.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace radner {

/// Drift and diffusion of the state process d xi = Lambda dt + Sigma dB.
struct StateDynamics {
  int dim = 1;
  VectorField drift;
  MatrixField diffusion;
  double regularity_K = 1.0;
  VectorXd x0;

  // Set when Lambda == 0 and Sigma == lambda * I for all (t, x).
  std::optional<double> constant_sigma;
};

/// A scalar field on [0,T] x R^d with optional closed-form derivatives.
/// Empty derivative slots fall back to central differences.
struct SmoothField {
  ScalarField value;
  ScalarField time_derivative;
  RowField gradient;   // 1 x d
  MatrixField hessian; // d x d

  double operator()(double t, const VectorXd &x) const { return value(t, x); }
  bool has_closed_form() const { return time_derivative && gradient && hessian; }
};

struct AgentSpec {
  double risk_aversion = 1.0;
  SmoothField endowment;
  double initial_holding = 0.0;
  double endowment_bound = 1.0; // declared M_e
};

struct DerivedConstants {
  double ba = 0.0;
  VectorXd kappas;
};

/// ba = (sum 1/alpha^i)^{-1} and kappa^i = ba / alpha^i.
DerivedConstants derived_constants(std::span<const double> alphas);

struct FiniteDifferenceOptions {
  double first_order_step = 1e-5;  // h = step * (1 + |x|)
  double second_order_step = 1e-4; // used for the Hessian
};

/// Drift and volatility of e(t, xi_t): mu_e = e_t + A e, sigma_e = De Sigma.
struct EndowmentDecomposition {
  ScalarField mu_e;
  RowField sigma_e;
};

EndowmentDecomposition endowment_decomposition(const SmoothField &aggregate,
                                               const StateDynamics &dyn,
                                               FiniteDifferenceOptions fd = {});

/// Generator A u = Du Lambda + 1/2 tr(D^2 u Sigma Sigma^T) applied to a field.
double apply_generator(const SmoothField &field, const StateDynamics &dyn, double t,
                       const VectorXd &x, FiniteDifferenceOptions fd = {});

RowVectorXd field_gradient(const SmoothField &field, double t, const VectorXd &x,
                           FiniteDifferenceOptions fd = {});
MatrixXd field_hessian(const SmoothField &field, double t, const VectorXd &x,
                       FiniteDifferenceOptions fd = {});
double field_time_derivative(const SmoothField &field, double t, const VectorXd &x,
                             FiniteDifferenceOptions fd = {});

struct Economy {
  std::vector<AgentSpec> agents;
  double ba = 0.0;
  VectorXd kappas;
  double horizon = 1.0;
  SmoothField aggregate_endowment;
  ScalarField mu_e;
  RowField sigma_e;

  int num_agents() const { return static_cast<int>(agents.size()); }
  double alpha(int i) const { return agents[static_cast<std::size_t>(i)].risk_aversion; }
  double endowment(int i, double t, const VectorXd &x) const {
    return agents[static_cast<std::size_t>(i)].endowment(t, x);
  }
};

Economy make_economy(std::vector<AgentSpec> agents, double horizon, const StateDynamics &dyn,
                     FiniteDifferenceOptions fd = {});

/// Throws InvalidInput unless sum pi_0^i == 1 (to 1e-12).
void require_unit_supply(const Economy &econ);

/// Probes for sampling-based regularity checks.
struct SamplePlan {
  double t_min = 0.0;
  double t_max = 1.0;
  double x_min = -1.0;
  double x_max = 1.0;
  int n_points = 256;
  int n_directions = 8;
  int dim = 1; // used by validate_endowments
  std::uint64_t seed = 12345;
};

struct RegularityReport {
  double max_drift = 0.0;
  double max_diffusion = 0.0;
  double max_drift_lipschitz = 0.0;
  double max_diffusion_modulus = 0.0; // |dSigma| / (sqrt|dt| + |dx|)
  double min_ellipticity = 0.0;       // min |Sigma z| / |z|
  int singular_points = 0;
  bool bounded = false;
  bool lipschitz = false;
  bool elliptic = false;

  bool pass() const { return bounded && lipschitz && elliptic; }
};

RegularityReport validate_state_dynamics(const StateDynamics &dyn, const SamplePlan &plan);

struct EndowmentReport {
  std::vector<double> max_abs;       // per agent, sampled
  std::vector<double> holder_ratio;  // sup |e(T,x)-e(T,x')| / |x-x'|^exponent
  std::vector<bool> within_bound;

  bool pass() const;
};

EndowmentReport validate_endowments(const Economy &econ, const SamplePlan &plan,
                                    double holder_exponent);

struct OuTransform {
  StateDynamics dynamics;
  SmoothField endowment;
};

/// Rewrites a bounded function of an OU factor eta as a function of the
/// bounded-coefficient state d xi = exp(-theta t) dB, xi_0 = 0.
/// `endow` is a field over (t, eta) with eta one-dimensional.
OuTransform ou_transform(double theta, double eta_bar, double eta0, double sigma_eta,
                         const SmoothField &endow, double horizon = 1.0);

} // namespace radner
