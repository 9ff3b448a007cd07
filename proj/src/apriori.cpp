#include "radner/apriori.hpp"

#include "radner/errors.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <cmath>

namespace radner {

namespace {

std::vector<int> time_levels(int t_steps, int max_levels) {
  std::vector<int> out;
  const int levels = std::max(2, std::min(t_steps + 1, max_levels));
  for (int k = 0; k < levels; ++k) {
    const int n = static_cast<int>(std::lround(static_cast<double>(k) * t_steps / (levels - 1)));
    if (out.empty() || out.back() != n)
      out.push_back(n);
  }
  return out;
}

std::vector<Index> node_sample(const GridSpec &grid, int per_dim) {
  std::vector<Index> out;
  const int d = grid.dim();
  std::array<std::vector<int>, 2> axes;
  for (int k = 0; k < d; ++k) {
    const int last = grid.x_steps[static_cast<std::size_t>(k)];
    const int m = std::min(last, per_dim - 1);
    for (int q = 0; q <= m; ++q) {
      const int i = static_cast<int>(std::lround(static_cast<double>(q) * last / m));
      auto &ax = axes[static_cast<std::size_t>(k)];
      if (ax.empty() || ax.back() != i)
        ax.push_back(i);
    }
  }
  if (d == 1) {
    for (int i : axes[0])
      out.push_back(grid.flat_index(i));
  } else {
    for (int j : axes[1])
      for (int i : axes[0])
        out.push_back(grid.flat_index(i, j));
  }
  return out;
}

} // namespace

LatticeSupNorms lattice_sup_norms(const Economy &econ, const GridSpec &grid, int max_time_levels) {
  grid.validate();
  LatticeSupNorms out;
  out.endowment.assign(static_cast<std::size_t>(econ.num_agents()), 0.0);
  for (int n : time_levels(grid.t_steps, max_time_levels)) {
    const double t = grid.time(n, econ.horizon);
    for (Index p = 0; p < grid.num_nodes(); ++p) {
      const VectorXd x = grid.node(p);
      out.mu_e = std::max(out.mu_e, std::abs(econ.mu_e(t, x)));
      for (int i = 0; i < econ.num_agents(); ++i) {
        auto &s = out.endowment[static_cast<std::size_t>(i)];
        s = std::max(s, std::abs(econ.endowment(i, t, x)));
      }
    }
  }
  return out;
}

LowerBoundCheck check_a_lower_bound(const SolutionGrid &sol, const Economy &econ, double mu_e_sup,
                                    double tol) {
  LowerBoundCheck c;
  c.a_min = std::numeric_limits<double>::infinity();
  c.worst_margin = std::numeric_limits<double>::infinity();
  for (std::size_t n = 0; n < sol.values.size(); ++n) {
    const double t = sol.time(static_cast<int>(n));
    const double bound = -(sol.horizon - t) * econ.ba * mu_e_sup;
    const auto col = sol.values[n].col(0);
    for (Index p = 0; p < col.size(); ++p) {
      if (col(p) < c.a_min) {
        c.a_min = col(p);
        c.bound_at_a_min = bound;
      }
      const double margin = col(p) - bound;
      if (margin < c.worst_margin) {
        c.worst_margin = margin;
        c.worst_time_index = static_cast<int>(n);
        c.worst_node = p;
      }
    }
  }
  c.pass = c.worst_margin >= -tol;
  return c;
}

double gronwall_bound(double alpha, double endowment_sup, double horizon, double ba,
                      double mu_e_sup) {
  const double Ca = horizon * ba * mu_e_sup;
  const double ae = alpha * endowment_sup;
  return (ae + horizon * std::exp(2.0 * Ca) + horizon * std::exp(Ca) * ae) *
         std::exp(std::exp(Ca) * horizon);
}

GronwallCheck check_gronwall(const SolutionGrid &sol, const Economy &econ,
                             const LatticeSupNorms &norms) {
  const int I = econ.num_agents();
  GronwallCheck g;
  g.Y_sup.assign(static_cast<std::size_t>(I), 0.0);
  for (const auto &v : sol.values)
    for (int i = 0; i < I; ++i) {
      auto &s = g.Y_sup[static_cast<std::size_t>(i)];
      s = std::max(s, v.col(i + 1).cwiseAbs().maxCoeff());
    }
  g.pass = true;
  for (int i = 0; i < I; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    g.bound.push_back(
        gronwall_bound(econ.alpha(i), norms.endowment[idx], econ.horizon, econ.ba, norms.mu_e));
    g.pass = g.pass && g.Y_sup[idx] <= g.bound[idx];
  }
  return g;
}

double phi(double x) {
  const double a = std::abs(x);
  return (std::expm1(2.0 * a) - 2.0 * a) / 4.0;
}

double phi_prime(double x) {
  const double a = std::abs(x);
  return std::copysign(std::expm1(2.0 * a) / 2.0, x);
}

double z_free_growth_constant(double alpha, double endowment_sup, double horizon, double ba,
                              double mu_e_sup) {
  // |e^{-a}(1 + a)| <= e^{2 a^-} and |e^{-a}(Y - alpha e)| <= e^{a^-}(|Y| + alpha ||e||).
  const double Ca = horizon * ba * mu_e_sup;
  return std::max(std::exp(2.0 * Ca) + std::exp(Ca) * alpha * endowment_sup, std::exp(Ca));
}

double bmo_analytic_bound(double y_sup, double C, double horizon) {
  const double y = std::abs(y_sup);
  return 2.0 * (phi(y) + C * horizon * phi_prime(y) * (1.0 + y));
}

double clearing_scale(const Economy &econ, const StateDynamics &dyn, const GridSpec &grid,
                      double horizon) {
  grid.validate();
  const int d = grid.dim();
  const double ht = 1e-3 * std::max(1.0, horizon);
  const auto &e = econ.aggregate_endowment;
  double ett = 0.0, dmu = 0.0, lam = 0.0, cov = 0.0, d3 = 0.0, d4 = 0.0;
  for (int n : time_levels(grid.t_steps, 33)) {
    const double t = std::clamp(grid.time(n, horizon), ht, horizon - ht);
    for (Index p : node_sample(grid, 65)) {
      const VectorXd x = grid.node(p);
      const double e0 = e(t, x);
      ett = std::max(ett, std::abs((e(t + ht, x) - 2.0 * e0 + e(t - ht, x)) / (ht * ht)));
      dmu = std::max(dmu, std::abs((econ.mu_e(t + ht, x) - econ.mu_e(t - ht, x)) / (2.0 * ht)));
      lam = std::max(lam, dyn.drift(t, x).norm());
      const MatrixXd s = dyn.diffusion(t, x);
      cov = std::max(cov, (s * s.transpose()).norm());
      for (int k = 0; k < d; ++k) {
        const double h = 0.05 * std::max(1.0, grid.dx(k) / 0.05);
        auto at = [&](double m) {
          VectorXd y = x;
          y(k) += m * h;
          return e(t, y);
        };
        const double p1 = at(1), m1 = at(-1), p2 = at(2), m2 = at(-2);
        d3 = std::max(d3, std::abs((p2 - 2.0 * p1 + 2.0 * m1 - m2) / (2.0 * h * h * h)));
        d4 = std::max(d4, std::abs((p2 - 4.0 * p1 + 6.0 * e0 - 4.0 * m1 + m2) / (h * h * h * h)));
      }
    }
  }
  return econ.ba * std::max(1.0, horizon) * (1.0 + ett + dmu + lam * d3 + cov * d4);
}

} // namespace radner
