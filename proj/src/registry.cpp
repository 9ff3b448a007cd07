#include "radner/registry.hpp"

#include "radner/errors.hpp"

#include <charconv>
#include <cmath>
#include <string>

namespace radner {

namespace {

double parse_number(std::string_view text, std::string_view key) {
  std::string s(text);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception &) {
    used = 0;
  }
  if (used == 0 || used != s.size() || !std::isfinite(v))
    throw InvalidInput("bad numeric parameter '" + s + "' in key '" + std::string(key) + "'");
  return v;
}

void expect_params(const RegistryKey &k, std::size_t lo, std::size_t hi, std::string_view key) {
  if (k.params.size() < lo || k.params.size() > hi)
    throw InvalidInput("wrong number of parameters in key '" + std::string(key) + "'");
}

SmoothField constant_field(double c) {
  SmoothField f;
  f.value = [c](double, const VectorXd &) { return c; };
  f.time_derivative = [](double, const VectorXd &) { return 0.0; };
  f.gradient = [](double, const VectorXd &x) -> RowVectorXd { return RowVectorXd::Zero(x.size()); };
  f.hessian = [](double, const VectorXd &x) -> MatrixXd {
    return MatrixXd::Zero(x.size(), x.size());
  };
  return f;
}

} // namespace

RegistryKey parse_registry_key(std::string_view key) {
  RegistryKey out;
  const auto colon = key.find(':');
  out.name = std::string(key.substr(0, colon));
  if (out.name.empty())
    throw InvalidInput("empty function key");
  if (colon == std::string_view::npos)
    return out;
  std::string_view rest = key.substr(colon + 1);
  while (true) {
    const auto comma = rest.find(',');
    out.params.push_back(parse_number(rest.substr(0, comma), key));
    if (comma == std::string_view::npos)
      break;
    rest = rest.substr(comma + 1);
  }
  return out;
}

bool is_constant_endowment(std::string_view key, double *value) {
  const RegistryKey k = parse_registry_key(key);
  if (k.name == "zero" && k.params.empty()) {
    if (value)
      *value = 0.0;
    return true;
  }
  if (k.name == "constant" && k.params.size() == 1) {
    if (value)
      *value = k.params[0];
    return true;
  }
  return false;
}

SmoothField make_endowment(std::string_view key, int dim) {
  const RegistryKey k = parse_registry_key(key);
  if (k.name == "zero") {
    expect_params(k, 0, 0, key);
    return constant_field(0.0);
  }
  if (k.name == "constant") {
    expect_params(k, 1, 1, key);
    return constant_field(k.params[0]);
  }
  if (k.name == "affine") {
    expect_params(k, 2, 2, key);
    const double a = k.params[0];
    const double b = k.params[1];
    SmoothField f;
    f.value = [a, b](double, const VectorXd &x) { return a + b * x.sum(); };
    f.time_derivative = [](double, const VectorXd &) { return 0.0; };
    f.gradient = [b](double, const VectorXd &x) -> RowVectorXd {
      return RowVectorXd::Constant(x.size(), b);
    };
    f.hessian = [](double, const VectorXd &x) -> MatrixXd {
      return MatrixXd::Zero(x.size(), x.size());
    };
    return f;
  }
  if (k.name == "gaussian_bump") {
    expect_params(k, 3, 3, key);
    const double c = k.params[0];
    const double w = k.params[1];
    const double h = k.params[2];
    if (!(w > 0.0))
      throw InvalidInput("gaussian_bump width must be positive");
    SmoothField f;
    f.value = [=](double, const VectorXd &x) {
      return h * std::exp(-(x.array() - c).square().sum() / (2.0 * w * w));
    };
    f.time_derivative = [](double, const VectorXd &) { return 0.0; };
    f.gradient = [=](double, const VectorXd &x) -> RowVectorXd {
      const VectorXd r = x.array() - c;
      const double v = h * std::exp(-r.squaredNorm() / (2.0 * w * w));
      return -v / (w * w) * r.transpose();
    };
    f.hessian = [=](double, const VectorXd &x) -> MatrixXd {
      const VectorXd r = x.array() - c;
      const double v = h * std::exp(-r.squaredNorm() / (2.0 * w * w));
      const double w2 = w * w;
      return v * (r * r.transpose() / (w2 * w2) -
                  MatrixXd::Identity(x.size(), x.size()) / w2);
    };
    return f;
  }
  if (k.name == "ou_income") {
    expect_params(k, 4, 5, key);
    if (dim != 1)
      throw InvalidInput("ou_income endowments require a one-dimensional state");
    const double scale = k.params.size() == 5 ? k.params[4] : 1.0;
    SmoothField base;
    base.value = [scale](double, const VectorXd &eta) { return scale * std::tanh(eta(0)); };
    base.time_derivative = [](double, const VectorXd &) { return 0.0; };
    base.gradient = [scale](double, const VectorXd &eta) -> RowVectorXd {
      const double th = std::tanh(eta(0));
      return RowVectorXd::Constant(1, scale * (1.0 - th * th));
    };
    base.hessian = [scale](double, const VectorXd &eta) -> MatrixXd {
      const double th = std::tanh(eta(0));
      return MatrixXd::Constant(1, 1, -2.0 * scale * th * (1.0 - th * th));
    };
    return ou_transform(k.params[0], k.params[1], k.params[2], k.params[3], base).endowment;
  }
  throw InvalidInput("unknown endowment key '" + std::string(key) + "'");
}

VectorField make_drift(std::string_view key, int dim) {
  const RegistryKey k = parse_registry_key(key);
  if (k.name == "zero") {
    expect_params(k, 0, 0, key);
    return [dim](double, const VectorXd &) -> VectorXd { return VectorXd::Zero(dim); };
  }
  if (k.name == "constant") {
    expect_params(k, 1, 1, key);
    const double v = k.params[0];
    return [dim, v](double, const VectorXd &) -> VectorXd { return VectorXd::Constant(dim, v); };
  }
  if (k.name == "affine") {
    expect_params(k, 2, 2, key);
    const double a = k.params[0];
    const double b = k.params[1];
    return [a, b](double, const VectorXd &x) -> VectorXd { return (a + b * x.array()).matrix(); };
  }
  throw InvalidInput("unsupported drift key '" + std::string(key) + "'");
}

MatrixField make_diffusion(std::string_view key, int dim) {
  const RegistryKey k = parse_registry_key(key);
  if (k.name == "zero") {
    expect_params(k, 0, 0, key);
    return [dim](double, const VectorXd &) -> MatrixXd { return MatrixXd::Zero(dim, dim); };
  }
  if (k.name == "constant") {
    expect_params(k, 1, 1, key);
    const double v = k.params[0];
    return [dim, v](double, const VectorXd &) -> MatrixXd {
      return v * MatrixXd::Identity(dim, dim);
    };
  }
  if (k.name == "exp_decay" || k.name == "ou_income") {
    if (k.name == "exp_decay")
      expect_params(k, 1, 1, key);
    else
      expect_params(k, 1, 5, key);
    const double theta = k.params[0];
    return [dim, theta](double t, const VectorXd &) -> MatrixXd {
      return std::exp(-theta * t) * MatrixXd::Identity(dim, dim);
    };
  }
  if (k.name == "affine") {
    expect_params(k, 2, 2, key);
    const double a = k.params[0];
    const double b = k.params[1];
    return [dim, a, b](double t, const VectorXd &) -> MatrixXd {
      return (a + b * t) * MatrixXd::Identity(dim, dim);
    };
  }
  throw InvalidInput("unsupported diffusion key '" + std::string(key) + "'");
}

StateDynamics make_state_dynamics(std::string_view drift_key, std::string_view diffusion_key,
                                  int dim, double K, const VectorXd &x0) {
  if (dim < 1)
    throw InvalidInput("state dimension must be positive");
  if (x0.size() != dim)
    throw InvalidInput("x0 has the wrong dimension");
  StateDynamics dyn;
  dyn.dim = dim;
  dyn.drift = make_drift(drift_key, dim);
  dyn.diffusion = make_diffusion(diffusion_key, dim);
  dyn.regularity_K = K;
  dyn.x0 = x0;

  const RegistryKey dk = parse_registry_key(drift_key);
  const RegistryKey sk = parse_registry_key(diffusion_key);
  const bool zero_drift = dk.name == "zero" || (dk.name == "constant" && dk.params[0] == 0.0);
  if (zero_drift && sk.name == "constant")
    dyn.constant_sigma = sk.params[0];
  return dyn;
}

} // namespace radner
