#include "radner/model.hpp"

#include "radner/errors.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace radner {

namespace {

constexpr double kRelTol = 1e-12;

double checked(double value, const char *what, double t, const VectorXd &x) {
  if (!std::isfinite(value)) {
    std::ostringstream os;
    os << "non-finite " << what << " of the endowment at t=" << t << ", x=" << x.transpose();
    throw SingularEndowment(os.str());
  }
  return value;
}

bool within(double value, double bound) { return value <= bound * (1.0 + kRelTol) + kRelTol; }

} // namespace

DerivedConstants derived_constants(std::span<const double> alphas) {
  if (alphas.empty())
    throw InvalidInput("at least one agent is required");
  double inv_sum = 0.0;
  for (double a : alphas) {
    if (!(a > 0.0) || !std::isfinite(a))
      throw InvalidInput("risk aversion must be positive and finite, got " + std::to_string(a));
    inv_sum += 1.0 / a;
  }
  DerivedConstants out;
  out.ba = 1.0 / inv_sum;
  out.kappas.resize(static_cast<Index>(alphas.size()));
  for (std::size_t i = 0; i < alphas.size(); ++i)
    out.kappas(static_cast<Index>(i)) = out.ba / alphas[i];
  return out;
}

double field_time_derivative(const SmoothField &field, double t, const VectorXd &x,
                             FiniteDifferenceOptions fd) {
  if (field.time_derivative)
    return checked(field.time_derivative(t, x), "time derivative", t, x);
  const double h = fd.first_order_step * (1.0 + std::abs(t));
  return checked((field(t + h, x) - field(t - h, x)) / (2.0 * h), "time derivative", t, x);
}

RowVectorXd field_gradient(const SmoothField &field, double t, const VectorXd &x,
                           FiniteDifferenceOptions fd) {
  if (field.gradient) {
    RowVectorXd g = field.gradient(t, x);
    for (Index k = 0; k < g.size(); ++k)
      checked(g(k), "gradient", t, x);
    return g;
  }
  RowVectorXd g(x.size());
  VectorXd xp = x;
  VectorXd xm = x;
  for (Index k = 0; k < x.size(); ++k) {
    const double h = fd.first_order_step * (1.0 + std::abs(x(k)));
    xp(k) = x(k) + h;
    xm(k) = x(k) - h;
    g(k) = checked((field(t, xp) - field(t, xm)) / (2.0 * h), "gradient", t, x);
    xp(k) = x(k);
    xm(k) = x(k);
  }
  return g;
}

MatrixXd field_hessian(const SmoothField &field, double t, const VectorXd &x,
                       FiniteDifferenceOptions fd) {
  const Index d = x.size();
  if (field.hessian) {
    MatrixXd hess = field.hessian(t, x);
    for (Index i = 0; i < hess.size(); ++i)
      checked(hess.data()[i], "Hessian", t, x);
    return hess;
  }
  MatrixXd hess(d, d);
  const double f0 = field(t, x);
  VectorXd h(d);
  for (Index k = 0; k < d; ++k)
    h(k) = fd.second_order_step * (1.0 + std::abs(x(k)));

  VectorXd p = x;
  for (Index k = 0; k < d; ++k) {
    p(k) = x(k) + h(k);
    const double fp = field(t, p);
    p(k) = x(k) - h(k);
    const double fm = field(t, p);
    p(k) = x(k);
    hess(k, k) = checked((fp - 2.0 * f0 + fm) / (h(k) * h(k)), "Hessian", t, x);
  }
  for (Index k = 0; k < d; ++k) {
    for (Index l = k + 1; l < d; ++l) {
      auto at = [&](double sk, double sl) {
        VectorXd q = x;
        q(k) += sk * h(k);
        q(l) += sl * h(l);
        return field(t, q);
      };
      const double mixed =
          (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4.0 * h(k) * h(l));
      hess(k, l) = hess(l, k) = checked(mixed, "Hessian", t, x);
    }
  }
  return hess;
}

double apply_generator(const SmoothField &field, const StateDynamics &dyn, double t,
                       const VectorXd &x, FiniteDifferenceOptions fd) {
  const RowVectorXd grad = field_gradient(field, t, x, fd);
  const MatrixXd sigma = dyn.diffusion(t, x);
  const MatrixXd hess = field_hessian(field, t, x, fd);
  return grad.dot(dyn.drift(t, x)) + 0.5 * (hess * sigma * sigma.transpose()).trace();
}

EndowmentDecomposition endowment_decomposition(const SmoothField &aggregate,
                                               const StateDynamics &dyn,
                                               FiniteDifferenceOptions fd) {
  EndowmentDecomposition out;
  out.mu_e = [aggregate, dyn, fd](double t, const VectorXd &x) {
    return field_time_derivative(aggregate, t, x, fd) + apply_generator(aggregate, dyn, t, x, fd);
  };
  out.sigma_e = [aggregate, dyn, fd](double t, const VectorXd &x) -> RowVectorXd {
    return field_gradient(aggregate, t, x, fd) * dyn.diffusion(t, x);
  };
  return out;
}

Economy make_economy(std::vector<AgentSpec> agents, double horizon, const StateDynamics &dyn,
                     FiniteDifferenceOptions fd) {
  if (!(horizon > 0.0))
    throw InvalidInput("horizon T must be positive");
  std::vector<double> alphas;
  alphas.reserve(agents.size());
  for (const auto &a : agents) {
    if (!a.endowment.value)
      throw InvalidInput("agent endowment is not set");
    alphas.push_back(a.risk_aversion);
  }
  const DerivedConstants dc = derived_constants(alphas);

  Economy econ;
  econ.agents = std::move(agents);
  econ.ba = dc.ba;
  econ.kappas = dc.kappas;
  econ.horizon = horizon;

  std::vector<SmoothField> parts;
  bool closed_form = true;
  for (const auto &a : econ.agents) {
    parts.push_back(a.endowment);
    closed_form = closed_form && a.endowment.has_closed_form();
  }
  SmoothField &agg = econ.aggregate_endowment;
  agg.value = [parts](double t, const VectorXd &x) {
    double s = 0.0;
    for (const auto &p : parts)
      s += p(t, x);
    return s;
  };
  if (closed_form) {
    agg.time_derivative = [parts](double t, const VectorXd &x) {
      double s = 0.0;
      for (const auto &p : parts)
        s += p.time_derivative(t, x);
      return s;
    };
    agg.gradient = [parts](double t, const VectorXd &x) -> RowVectorXd {
      RowVectorXd g = RowVectorXd::Zero(x.size());
      for (const auto &p : parts)
        g += p.gradient(t, x);
      return g;
    };
    agg.hessian = [parts](double t, const VectorXd &x) -> MatrixXd {
      MatrixXd h = MatrixXd::Zero(x.size(), x.size());
      for (const auto &p : parts)
        h += p.hessian(t, x);
      return h;
    };
  }

  EndowmentDecomposition dec = endowment_decomposition(agg, dyn, fd);
  econ.mu_e = std::move(dec.mu_e);
  econ.sigma_e = std::move(dec.sigma_e);
  return econ;
}

void require_unit_supply(const Economy &econ) {
  double total = 0.0;
  for (const auto &a : econ.agents)
    total += a.initial_holding;
  if (std::abs(total - 1.0) > 1e-12) {
    std::ostringstream os;
    os << "initial holdings must sum to one, got " << total;
    throw InvalidInput(os.str());
  }
}

RegularityReport validate_state_dynamics(const StateDynamics &dyn, const SamplePlan &plan) {
  std::mt19937_64 rng(plan.seed);
  std::uniform_real_distribution<double> ut(plan.t_min, plan.t_max);
  std::uniform_real_distribution<double> ux(plan.x_min, plan.x_max);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal;

  RegularityReport r;
  r.min_ellipticity = std::numeric_limits<double>::infinity();
  const double span = plan.x_max - plan.x_min;
  const double t_span = plan.t_max - plan.t_min;

  auto draw_x = [&] {
    VectorXd x(dyn.dim);
    for (int k = 0; k < dyn.dim; ++k)
      x(k) = ux(rng);
    return x;
  };

  for (int p = 0; p < plan.n_points; ++p) {
    double t = ut(rng);
    if (p == 0)
      t = plan.t_min;
    else if (p == 1)
      t = plan.t_max;
    const VectorXd x = draw_x();

    const VectorXd lam = dyn.drift(t, x);
    const MatrixXd sig = dyn.diffusion(t, x);
    r.max_drift = std::max(r.max_drift, lam.norm());
    r.max_diffusion = std::max(r.max_diffusion, sig.norm());

    bool singular = !sig.allFinite();
    if (!singular) {
      Eigen::JacobiSVD<MatrixXd> svd(sig);
      const double smin = svd.singularValues().minCoeff();
      if (!(smin > 1e-300))
        singular = true;
      for (int k = 0; k < plan.n_directions; ++k) {
        VectorXd z(dyn.dim);
        for (int j = 0; j < dyn.dim; ++j)
          z(j) = normal(rng);
        if (z.norm() == 0.0)
          continue;
        r.min_ellipticity = std::min(r.min_ellipticity, (sig * z).norm() / z.norm());
      }
      r.min_ellipticity = std::min(r.min_ellipticity, smin);
    }
    if (singular) {
      ++r.singular_points;
      r.min_ellipticity = 0.0;
    }

    // Difference quotients against a nearby probe.
    const double scale = std::pow(10.0, -3.0 * unit(rng));
    VectorXd dx(dyn.dim);
    for (int k = 0; k < dyn.dim; ++k)
      dx(k) = (unit(rng) - 0.5) * span * scale;
    const double dt = (unit(rng) - 0.5) * t_span * scale;
    const VectorXd x2 = x + dx;
    const double t2 = std::clamp(t + dt, plan.t_min, plan.t_max);
    if (dx.norm() > 0.0)
      r.max_drift_lipschitz =
          std::max(r.max_drift_lipschitz, (dyn.drift(t, x2) - lam).norm() / dx.norm());
    const double denom = std::sqrt(std::abs(t2 - t)) + dx.norm();
    if (denom > 0.0)
      r.max_diffusion_modulus =
          std::max(r.max_diffusion_modulus, (dyn.diffusion(t2, x2) - sig).norm() / denom);
  }

  const double K = dyn.regularity_K;
  r.bounded = within(r.max_drift, K) && within(r.max_diffusion, K);
  r.lipschitz = within(r.max_drift_lipschitz, K) && within(r.max_diffusion_modulus, K);
  r.elliptic = r.singular_points == 0 && r.min_ellipticity * (1.0 + kRelTol) >= 1.0 / K;
  return r;
}

bool EndowmentReport::pass() const {
  return std::all_of(within_bound.begin(), within_bound.end(), [](bool b) { return b; });
}

EndowmentReport validate_endowments(const Economy &econ, const SamplePlan &plan,
                                    double holder_exponent) {
  if (!(holder_exponent > 0.0 && holder_exponent <= 1.0))
    throw InvalidInput("Hoelder exponent must lie in (0, 1]");
  std::mt19937_64 rng(plan.seed);
  std::uniform_real_distribution<double> ut(plan.t_min, plan.t_max);
  std::uniform_real_distribution<double> ux(plan.x_min, plan.x_max);

  const int I = econ.num_agents();
  EndowmentReport rep;
  rep.max_abs.assign(static_cast<std::size_t>(I), 0.0);
  rep.holder_ratio.assign(static_cast<std::size_t>(I), 0.0);

  for (int p = 0; p < plan.n_points; ++p) {
    const double t = ut(rng);
    VectorXd x(plan.dim), x2(plan.dim);
    for (int k = 0; k < plan.dim; ++k) {
      x(k) = ux(rng);
      x2(k) = ux(rng);
    }
    for (int i = 0; i < I; ++i) {
      const auto idx = static_cast<std::size_t>(i);
      rep.max_abs[idx] = std::max(rep.max_abs[idx], std::abs(econ.endowment(i, t, x)));
      const double dist = (x - x2).norm();
      if (dist > 0.0) {
        const double T = econ.horizon;
        const double q = std::abs(econ.endowment(i, T, x) - econ.endowment(i, T, x2)) /
                         std::pow(dist, holder_exponent);
        rep.holder_ratio[idx] = std::max(rep.holder_ratio[idx], q);
      }
    }
  }
  for (int i = 0; i < I; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    rep.within_bound.push_back(within(rep.max_abs[idx], econ.agents[idx].endowment_bound));
  }
  return rep;
}

OuTransform ou_transform(double theta, double eta_bar, double eta0, double sigma_eta,
                         const SmoothField &endow, double horizon) {
  if (!(theta > 0.0) || !(sigma_eta > 0.0))
    throw InvalidInput("ou_transform requires theta > 0 and sigma_eta > 0");

  OuTransform out;
  StateDynamics &dyn = out.dynamics;
  dyn.dim = 1;
  dyn.x0 = VectorXd::Zero(1);
  dyn.drift = [](double, const VectorXd &) -> VectorXd { return VectorXd::Zero(1); };
  dyn.diffusion = [theta](double t, const VectorXd &) -> MatrixXd {
    return MatrixXd::Constant(1, 1, std::exp(-theta * t));
  };
  // |Sigma| <= 1, |Sigma z| >= exp(-theta T)|z|, and the time modulus of
  // exp(-theta t) against sqrt|dt| never exceeds sqrt(theta).
  dyn.regularity_K = std::max({std::exp(theta * horizon), 1.0, std::sqrt(theta)});

  auto level = [=](double t, const VectorXd &x) {
    VectorXd eta(1);
    eta(0) = eta_bar + (eta0 - eta_bar) * std::exp(-theta * t) + sigma_eta * x(0);
    return eta;
  };
  SmoothField &f = out.endowment;
  f.value = [endow, level](double t, const VectorXd &x) { return endow(t, level(t, x)); };
  if (endow.has_closed_form()) {
    f.time_derivative = [=](double t, const VectorXd &x) {
      const VectorXd eta = level(t, x);
      const double drift = -theta * (eta0 - eta_bar) * std::exp(-theta * t);
      return endow.time_derivative(t, eta) + endow.gradient(t, eta)(0) * drift;
    };
    f.gradient = [=](double t, const VectorXd &x) -> RowVectorXd {
      return sigma_eta * endow.gradient(t, level(t, x));
    };
    f.hessian = [=](double t, const VectorXd &x) -> MatrixXd {
      return sigma_eta * sigma_eta * endow.hessian(t, level(t, x));
    };
  }
  return out;
}

} // namespace radner
