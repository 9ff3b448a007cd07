#pragma once

#include "radner/model.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace radner {

/// Built-in function keys:
///   "zero", "constant:<v>", "affine:<a>,<b>", "gaussian_bump:<center>,<width>,<height>",
///   "ou_income:<theta>,<eta_bar>,<eta0>,<sigma_eta>[,<scale>]",
/// plus "exp_decay:<theta>" for diffusions. Endowments carry closed-form
/// derivatives.
struct RegistryKey {
  std::string name;
  std::vector<double> params;
};

RegistryKey parse_registry_key(std::string_view key);

/// affine:a,b is a + b * sum_k x_k; ou_income is scale * tanh(eta) with eta the
/// OU factor expressed through the exp_decay state (see ou_transform).
SmoothField make_endowment(std::string_view key, int dim);

/// Returns true when the key names an endowment that is constant in (t, x);
/// `value` receives the constant.
bool is_constant_endowment(std::string_view key, double *value = nullptr);

/// constant:v is v in every component; affine:a,b is a + b x_k componentwise.
VectorField make_drift(std::string_view key, int dim);

/// constant:v is v I; exp_decay:theta (or ou_income:theta,...) is exp(-theta t) I;
/// affine:a,b is (a + b t) I.
MatrixField make_diffusion(std::string_view key, int dim);

StateDynamics make_state_dynamics(std::string_view drift_key, std::string_view diffusion_key,
                                  int dim, double K, const VectorXd &x0);

} // namespace radner
