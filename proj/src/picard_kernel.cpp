#include "radner/picard_kernel.hpp"

#include "radner/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace radner {

namespace {

constexpr double kScaleLimit = 1e12;

/// Linear interpolation of a lattice table at (s, x), x clamped to the window.
class TableInterpolator {
public:
  TableInterpolator(const LatticeFunction &lat, const std::vector<MatrixXd> &table)
      : lat_(lat), table_(table), dt_(lat.times[1] - lat.times[0]),
        dx_(lat.xs(1) - lat.xs(0)), nt_(static_cast<int>(lat.times.size()) - 1),
        nx_(static_cast<int>(lat.xs.size()) - 1) {}

  void add(double s, double x, double weight, Eigen::Ref<VectorXd> acc) const {
    double ts = std::clamp(s / dt_, 0.0, static_cast<double>(nt_));
    const int n = std::min(static_cast<int>(ts), nt_ - 1);
    const double th = ts - n;
    double xs = std::clamp((x - lat_.xs(0)) / dx_, 0.0, static_cast<double>(nx_));
    const int i = std::min(static_cast<int>(xs), nx_ - 1);
    const double ph = xs - i;
    const auto &a = table_[static_cast<std::size_t>(n)];
    const auto &b = table_[static_cast<std::size_t>(n) + 1];
    acc += weight * ((1 - th) * ((1 - ph) * a.row(i) + ph * a.row(i + 1)) +
                     th * ((1 - ph) * b.row(i) + ph * b.row(i + 1)))
                        .transpose();
  }

private:
  const LatticeFunction &lat_;
  const std::vector<MatrixXd> &table_;
  double dt_, dx_;
  int nt_, nx_;
};

std::vector<MatrixXd> evaluate_table(const LatticeFunction &u, const KernelNonlinearity &F) {
  const int J = u.components;
  std::vector<MatrixXd> table(u.times.size());
  VectorXd out(J);
  for (std::size_t n = 0; n < u.times.size(); ++n) {
    table[n].resize(u.xs.size(), J);
    for (Index p = 0; p < u.xs.size(); ++p) {
      F(u.times[n], u.xs(p), u.values[n].row(p).transpose(), u.grads[n].row(p).transpose(), out);
      table[n].row(p) = out.transpose();
    }
  }
  return table;
}

void check_scale(const LatticeFunction &f) {
  for (std::size_t n = 0; n < f.times.size(); ++n) {
    const bool ok = f.values[n].allFinite() && f.grads[n].allFinite() &&
                    f.values[n].cwiseAbs().maxCoeff() < kScaleLimit &&
                    f.grads[n].cwiseAbs().maxCoeff() < kScaleLimit;
    if (!ok) {
      std::ostringstream os;
      os << "kernel quadrature overflowed at t=" << f.times[n]
         << "; shrink the evaluation window or the horizon";
      throw OracleScaleError(os.str());
    }
  }
}

/// Per-time sup norm of values plus sup norm of gradients, over components.
std::vector<double> slice_norms(const LatticeFunction &u) {
  std::vector<double> out(u.times.size());
  for (std::size_t n = 0; n < u.times.size(); ++n)
    out[n] = u.values[n].cwiseAbs().maxCoeff() + u.grads[n].cwiseAbs().maxCoeff();
  return out;
}

double weighted(const std::vector<double> &times, const std::vector<double> &norms, double beta) {
  const double T = times.back();
  double acc = 0.0;
  for (std::size_t n = 0; n + 1 < times.size(); ++n) {
    const double w0 = std::exp(-beta * (T - times[n])) * norms[n];
    const double w1 = std::exp(-beta * (T - times[n + 1])) * norms[n + 1];
    acc += 0.5 * (times[n + 1] - times[n]) * (w0 + w1);
  }
  return acc;
}

LatticeFunction difference(const LatticeFunction &a, const LatticeFunction &b) {
  LatticeFunction d = a;
  for (std::size_t n = 0; n < a.times.size(); ++n) {
    d.values[n] -= b.values[n];
    d.grads[n] -= b.grads[n];
  }
  return d;
}

LatticeFunction sum(const LatticeFunction &a, const LatticeFunction &b) {
  LatticeFunction d = a;
  for (std::size_t n = 0; n < a.times.size(); ++n) {
    d.values[n] += b.values[n];
    d.grads[n] += b.grads[n];
  }
  return d;
}

double measure_lipschitz(const LatticeFunction &u, const KernelNonlinearity &F) {
  const int J = u.components;
  VectorXd base(J), bumped(J);
  double L = 0.0;
  for (std::size_t n = 0; n < u.times.size(); ++n) {
    for (Index p = 0; p < u.xs.size(); ++p) {
      const VectorXd y = u.values[n].row(p).transpose();
      const VectorXd g = u.grads[n].row(p).transpose();
      F(u.times[n], u.xs(p), y, g, base);
      VectorXd rowsum = VectorXd::Zero(J);
      for (int j = 0; j < J; ++j) {
        const double hy = 1e-6 * (1.0 + std::abs(y(j)));
        VectorXd yb = y;
        yb(j) += hy;
        F(u.times[n], u.xs(p), yb, g, bumped);
        rowsum += ((bumped - base) / hy).cwiseAbs();
        const double hg = 1e-6 * (1.0 + std::abs(g(j)));
        VectorXd gb = g;
        gb(j) += hg;
        F(u.times[n], u.xs(p), y, gb, bumped);
        rowsum += ((bumped - base) / hg).cwiseAbs();
      }
      L = std::max(L, rowsum.maxCoeff());
    }
  }
  return L;
}

} // namespace

LatticeFunction make_lattice(const KernelSpec &spec, double horizon, double x0, int components) {
  const QuadPlan &q = spec.quad;
  if (!(spec.lambda > 0.0))
    throw InvalidInput("kernel scale lambda must be positive");
  if (q.time_steps < 1 || q.space_nodes < 2 || q.r_nodes < 1 || q.y_nodes < 3 ||
      !(q.y_range > 0.0))
    throw InvalidInput("invalid quadrature plan");
  LatticeFunction u;
  u.components = components;
  for (int n = 0; n <= q.time_steps; ++n)
    u.times.push_back(horizon * n / q.time_steps);
  const double w = q.window > 0.0 ? q.window : 4.0 * spec.lambda * std::sqrt(horizon);
  u.xs = VectorXd::LinSpaced(q.space_nodes, x0 - w, x0 + w);
  u.values.assign(u.times.size(), MatrixXd::Zero(q.space_nodes, components));
  u.grads = u.values;
  return u;
}

double heat_kernel(double lambda, double t, const VectorXd &x, double s, const VectorXd &xp) {
  if (!(t < s))
    throw std::domain_error("heat kernel requires t < s");
  const double v = lambda * lambda * (s - t);
  const double d = static_cast<double>(x.size());
  return std::pow(2.0 * std::numbers::pi * v, -0.5 * d) * std::exp(-(xp - x).squaredNorm() / (2.0 * v));
}

double heat_kernel(double lambda, double t, double x, double s, double xp) {
  if (!(t < s))
    throw std::domain_error("heat kernel requires t < s");
  const double v = lambda * lambda * (s - t);
  return std::exp(-(xp - x) * (xp - x) / (2.0 * v)) / std::sqrt(2.0 * std::numbers::pi * v);
}

TrapezoidRule trapezoid_rule(double range, int n) {
  TrapezoidRule r;
  r.nodes = VectorXd::LinSpaced(n, -range, range);
  const double h = 2.0 * range / (n - 1);
  r.weights = VectorXd::Constant(n, h);
  r.weights(0) = r.weights(n - 1) = 0.5 * h;
  return r;
}

LatticeFunction apply_Phi(const LatticeFunction &u, const KernelNonlinearity &F,
                          const KernelSpec &spec) {
  const QuadPlan &q = spec.quad;
  const double lam = spec.lambda;
  const int J = u.components;
  const std::vector<MatrixXd> table = evaluate_table(u, F);
  const TableInterpolator interp(u, table);
  const TrapezoidRule rule = trapezoid_rule(q.y_range, q.y_nodes);
  VectorXd density(q.y_nodes);
  for (int k = 0; k < q.y_nodes; ++k)
    density(k) = rule.weights(k) * std::exp(-0.5 * rule.nodes(k) * rule.nodes(k)) /
                 std::sqrt(2.0 * std::numbers::pi);

  const double T = u.horizon();
  LatticeFunction out = u;
  VectorXd mean(J), first(J);
  for (std::size_t n = 0; n < u.times.size(); ++n) {
    const double t = u.times[n];
    const double R = std::sqrt(std::max(T - t, 0.0));
    const double hr = R / q.r_nodes;
    for (Index p = 0; p < u.xs.size(); ++p) {
      const double x = u.xs(p);
      VectorXd val = VectorXd::Zero(J);
      VectorXd grad = VectorXd::Zero(J);
      if (R > 0.0) {
        for (int m = 0; m < q.r_nodes; ++m) {
          const double r = (m + 0.5) * hr;
          const double s = t + r * r;
          mean.setZero();
          first.setZero();
          for (int k = 0; k < q.y_nodes; ++k) {
            const double y = rule.nodes(k);
            interp.add(s, x + lam * r * y, density(k), mean);
            interp.add(s, x + lam * r * y, density(k) * y, first);
          }
          // ds = 2 r dr; d/dx of the kernel contributes y / (lambda r).
          val += 2.0 * r * hr * mean;
          grad += (2.0 / lam) * hr * first;
        }
      }
      out.values[n].row(p) = val.transpose();
      out.grads[n].row(p) = grad.transpose();
    }
  }
  check_scale(out);
  return out;
}

LatticeFunction apply_Psi(const TerminalFunction &g, const LatticeFunction &shape,
                          const KernelSpec &spec) {
  const QuadPlan &q = spec.quad;
  const double lam = spec.lambda;
  const int J = shape.components;
  const TrapezoidRule rule = trapezoid_rule(q.y_range, q.y_nodes);
  const double T = shape.horizon();
  LatticeFunction out = shape;
  for (std::size_t n = 0; n < shape.times.size(); ++n) {
    const double sd = lam * std::sqrt(std::max(T - shape.times[n], 0.0));
    for (Index p = 0; p < shape.xs.size(); ++p) {
      const double x = shape.xs(p);
      VectorXd val = VectorXd::Zero(J);
      VectorXd grad = VectorXd::Zero(J);
      if (sd > 0.0) {
        for (int k = 0; k < q.y_nodes; ++k) {
          const double y = rule.nodes(k);
          const double w =
              rule.weights(k) * std::exp(-0.5 * y * y) / std::sqrt(2.0 * std::numbers::pi);
          const VectorXd gv = g(x + sd * y);
          val += w * gv;
          grad += (w * y / sd) * gv;
        }
      } else {
        const double h = 1e-5 * (1.0 + std::abs(x));
        val = g(x);
        grad = (g(x + h) - g(x - h)) / (2.0 * h);
      }
      out.values[n].row(p) = val.transpose();
      out.grads[n].row(p) = grad.transpose();
    }
  }
  check_scale(out);
  return out;
}

double weighted_norm(const LatticeFunction &u, double beta) {
  if (u.times.size() < 2)
    return 0.0;
  return weighted(u.times, slice_norms(u), beta);
}

VectorXd PicardResult::at_origin(double x0) const {
  const VectorXd &xs = u.xs;
  const double h = xs(1) - xs(0);
  const double s = std::clamp((x0 - xs(0)) / h, 0.0, static_cast<double>(xs.size() - 1));
  const Index i = std::min<Index>(static_cast<Index>(s), xs.size() - 2);
  const double th = s - static_cast<double>(i);
  return ((1 - th) * u.values[0].row(i) + th * u.values[0].row(i + 1)).transpose();
}

PicardResult picard_solve(const KernelNonlinearity &F, const TerminalFunction &g, int components,
                          double horizon, double x0, const KernelSpec &spec,
                          const PicardOptions &options) {
  if (!(horizon > 0.0))
    throw InvalidInput("horizon must be positive");
  if (spec.beta < 0.0)
    throw InvalidInput("beta must be positive");
  const bool auto_beta = spec.beta == 0.0;

  PicardResult res;
  PicardTrace &tr = res.trace;
  const LatticeFunction shape = make_lattice(spec, horizon, x0, components);
  const LatticeFunction psi = apply_Psi(g, shape, spec);
  const std::vector<double> &times = shape.times;

  LatticeFunction u = psi;
  tr.lipschitz = measure_lipschitz(u, F);
  double beta = auto_beta ? std::max(1.0, 4.0 * tr.lipschitz * tr.lipschitz) : spec.beta;
  tr.betas.push_back(beta);

  std::vector<std::vector<double>> diffs; // per-iteration slice norms

  // Ratios whose numerator or denominator sits at round-off are not informative.
  auto floor_at = [&](double b) { return 1e-13 * std::max(1.0, weighted_norm(u, b)); };
  auto max_factor = [&](double b) {
    double worst = 0.0;
    const double fl = floor_at(b);
    for (std::size_t k = 1; k < diffs.size(); ++k) {
      const double num = weighted(times, diffs[k], b);
      const double den = weighted(times, diffs[k - 1], b);
      if (den > fl && num > fl)
        worst = std::max(worst, num / den);
    }
    return worst;
  };

  for (int it = 0; it < options.max_iter; ++it) {
    LatticeFunction next = sum(apply_Phi(u, F, spec), psi);
    diffs.push_back(slice_norms(difference(next, u)));
    u = std::move(next);
    tr.iterations = it + 1;
    tr.lipschitz = std::max(tr.lipschitz, measure_lipschitz(u, F));

    if (auto_beta) {
      while (max_factor(beta) > options.contraction_threshold && 2.0 * beta <= options.max_beta) {
        beta *= 2.0;
        tr.betas.push_back(beta);
      }
    }
    if (weighted(times, diffs.back(), beta) <= options.tol) {
      tr.converged = true;
      break;
    }
  }

  tr.beta = beta;
  for (const auto &d : diffs)
    tr.diff_norms.push_back(weighted(times, d, beta));
  for (std::size_t k = 1; k < tr.diff_norms.size(); ++k)
    tr.factors.push_back(tr.diff_norms[k - 1] > 0.0 ? tr.diff_norms[k] / tr.diff_norms[k - 1]
                                                    : 0.0);
  tr.max_factor = max_factor(beta);
  for (const auto &v : u.values)
    tr.sup_norm = std::max(tr.sup_norm, v.cwiseAbs().maxCoeff());

  const LatticeFunction again = sum(apply_Phi(u, F, spec), psi);
  tr.fixed_point_residual = weighted_norm(difference(again, u), beta);

  if (!tr.converged || tr.max_factor > options.contraction_threshold) {
    std::ostringstream os;
    os << "Picard iteration did not contract: measured factor " << tr.max_factor << " at beta "
       << beta << " after " << tr.iterations << " iterations";
    throw NonContraction(tr.max_factor, 4.0 * beta, os.str());
  }
  res.u = std::move(u);
  return res;
}

PicardResult picard_solve(const Economy &econ, const StateDynamics &dyn, const Driver &driver,
                          const KernelSpec &spec, const PicardOptions &options) {
  if (dyn.dim != 1 || !dyn.constant_sigma)
    throw UnsupportedOracle(
        "the kernel oracle needs a one-dimensional state with zero drift and constant diffusion");
  if (std::abs(*dyn.constant_sigma - spec.lambda) > 1e-14 * std::max(1.0, spec.lambda))
    throw InvalidInput("kernel scale does not match the state diffusion");
  const int J = econ.num_agents() + 1;
  const double lam = spec.lambda;

  KernelNonlinearity F = [&econ, &driver, lam, J](double t, double x, const VectorXd &u,
                                                  const VectorXd &Du, Eigen::Ref<VectorXd> out) {
    VectorXd xv(1);
    xv(0) = x;
    const MatrixXd z = lam * Du;
    VectorXd f(J);
    driver.evaluate(t, xv, point_data(econ, t, xv), u, z, f);
    out = -f;
  };
  TerminalFunction g = [&driver](double x) {
    VectorXd xv(1);
    xv(0) = x;
    return driver.terminal(xv);
  };
  return picard_solve(F, g, J, econ.horizon, dyn.x0(0), spec, options);
}

} // namespace radner
