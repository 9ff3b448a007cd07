#include "radner/equilibrium.hpp"

#include "radner/errors.hpp"
#include "radner/pde_solver.hpp"

#include <algorithm>
#include <cmath>

namespace radner {

double drift_formula(double ba_mu_e, const RowVectorXd &sigma, const MatrixXd &Z,
                     const VectorXd &kappas) {
  double quad = 0.0;
  for (Index i = 0; i < kappas.size(); ++i)
    quad += kappas(i) * Z.row(i).squaredNorm();
  return ba_mu_e + 0.5 * sigma.squaredNorm() - 0.5 * quad;
}

MarketBundle assemble_market(const SolutionGrid &sol, const Economy &econ,
                             const StateDynamics &dyn) {
  const int I = econ.num_agents();
  const int d = sol.dim();
  if (sol.components != I + 1)
    throw InvalidInput("solution does not match the economy");
  const std::vector<MatrixXd> Zfull = extract_Z(sol, dyn);

  MarketBundle b;
  b.grid = sol.grid;
  b.horizon = sol.horizon;
  b.agents = I;
  const std::size_t NT = sol.values.size();
  b.A.resize(NT);
  b.mu.resize(NT);
  b.sigma.resize(NT);
  b.Z.resize(NT);
  const Index nodes = sol.grid.num_nodes();
  MatrixXd zi(I, d);
  for (std::size_t n = 0; n < NT; ++n) {
    const double t = sol.time(static_cast<int>(n));
    const auto &v = sol.values[n];
    for (Index p = 0; p < nodes; ++p)
      if (!std::isfinite(v(p, 0)))
        throw SchemeError("non-finite a in the solution");
    b.A[n] = v.col(0).array().exp().matrix();
    if (n + 1 == NT)
      b.A[n].setOnes();
    b.sigma[n] = Zfull[n].leftCols(d);
    b.Z[n] = Zfull[n].rightCols(static_cast<Index>(I) * d);
    b.mu[n].resize(nodes);
    for (Index p = 0; p < nodes; ++p) {
      for (int i = 0; i < I; ++i)
        zi.row(i) = b.Z[n].row(p).segment(static_cast<Index>(i) * d, d);
      const double ba_mu_e = econ.ba * econ.mu_e(t, sol.grid.node(p));
      b.mu[n](p) = drift_formula(ba_mu_e, b.sigma[n].row(p), zi, econ.kappas);
    }
  }
  return b;
}

ClearingIdentity clearing_identity(const SolutionGrid &sol, const Economy &econ) {
  ClearingIdentity c;
  const int I = econ.num_agents();
  for (std::size_t n = 0; n < sol.values.size(); ++n) {
    const double t = sol.time(static_cast<int>(n));
    const auto &v = sol.values[n];
    for (Index p = 0; p < v.rows(); ++p) {
      double F = v(p, 0) - econ.ba * econ.aggregate_endowment(t, sol.grid.node(p));
      for (int i = 0; i < I; ++i)
        F += econ.kappas(i) * v(p, i + 1);
      const double r = std::abs(F);
      if (n + 1 == sol.values.size())
        c.terminal_residual = std::max(c.terminal_residual, r);
      if (r > c.max_residual || c.time_index < 0) {
        c.max_residual = std::max(c.max_residual, r);
        c.time_index = static_cast<int>(n);
        c.node = p;
      }
    }
  }
  return c;
}

MarketPoint market_at(const MarketBundle &bundle, const SolutionGrid &sol, const Economy &econ,
                      double t, const VectorXd &x) {
  const GridInterpolator interp(sol.grid, sol.horizon);
  const auto w = interp.locate(t, x);
  const int I = econ.num_agents();
  MarketPoint pt;
  pt.extrapolated = w.extrapolated;
  const RowVectorXd u = interp.interpolate(sol.values, w);
  pt.a = u(0);
  pt.A = std::exp(pt.a);
  pt.Y = u.tail(I).transpose();
  double mu = 0.0;
  RowVectorXd sig = RowVectorXd::Zero(sol.dim());
  const auto &m0 = bundle.mu[static_cast<std::size_t>(w.n)];
  const auto &m1 = bundle.mu[static_cast<std::size_t>(w.n) + 1];
  const auto &s0 = bundle.sigma[static_cast<std::size_t>(w.n)];
  const auto &s1 = bundle.sigma[static_cast<std::size_t>(w.n) + 1];
  for (int q = 0; q < w.size; ++q) {
    const Index p = w.nodes[static_cast<std::size_t>(q)];
    const double wq = w.w[static_cast<std::size_t>(q)];
    mu += wq * ((1 - w.theta) * m0(p) + w.theta * m1(p));
    sig += wq * ((1 - w.theta) * s0.row(p) + w.theta * s1.row(p));
  }
  pt.mu = mu;
  pt.sigma = sig;
  pt.endowments.resize(I);
  for (int i = 0; i < I; ++i)
    pt.endowments(i) = econ.endowment(i, t, x);
  return pt;
}

double wealth_step(double mu, const RowVectorXd &sigma, double X, double endowment,
                   double consumption, double dt, const VectorXd &dB) {
  return X + (mu * X + endowment - consumption) * dt + X * sigma.dot(dB);
}

double optimal_consumption(const MarketPoint &pt, double alpha, int i, double X) {
  return (pt.a + pt.Y(i)) / alpha + X / pt.A;
}

double wealth_sde_step(const MarketPoint &pt, const Economy &econ, int i, double X, double dt,
                       const VectorXd &dB) {
  if (!(dt > 0.0))
    throw InvalidInput("time step must be positive");
  const double c = optimal_consumption(pt, econ.alpha(i), i, X);
  return wealth_step(pt.mu, pt.sigma, X, pt.endowments(i), c, dt, dB);
}

ClearingAccumulator::PathMaxima ClearingAccumulator::measure(const StrategyPath &path) {
  PathMaxima m;
  const Index steps = path.X.rows();
  for (Index k = 0; k < steps; ++k) {
    m.pi = std::max(m.pi, std::abs(path.pi.row(k).sum() - 1.0));
    m.c = std::max(m.c, std::abs(path.c.row(k).sum() - (path.e(k) + 1.0)));
  }
  m.terminal = std::abs(path.X.row(steps - 1).sum() - 1.0);
  return m;
}

void ClearingAccumulator::add(const PathMaxima &m) {
  ++r_.path_count;
  r_.sup_pi = std::max(r_.sup_pi, m.pi);
  r_.sup_c = std::max(r_.sup_c, m.c);
  r_.terminal_wealth = std::max(r_.terminal_wealth, m.terminal);
  r_.mean_pi += m.pi;
  r_.mean_c += m.c;
  r_.mean_terminal += m.terminal;
}

ClearingReport ClearingAccumulator::report(std::uint64_t seed) const {
  ClearingReport out = r_;
  out.seed = seed;
  if (out.path_count > 0) {
    const double n = static_cast<double>(out.path_count);
    out.mean_pi /= n;
    out.mean_c /= n;
    out.mean_terminal /= n;
  }
  return out;
}

ClearingReport clearing_residuals(const std::vector<StrategyPath> &paths, const Economy &econ,
                                  std::uint64_t seed) {
  ClearingAccumulator acc;
  for (const auto &p : paths) {
    if (p.times != paths.front().times)
      throw InvalidInput("paths live on different time lattices");
    if (p.X.cols() != econ.num_agents())
      throw InvalidInput("path does not match the number of agents");
    acc.add(ClearingAccumulator::measure(p));
  }
  return acc.report(seed);
}

double optimality_drift(double alpha, double c, double X, double A, double Y) {
  const double log_w = -alpha * X / A - Y - std::log(A);
  const double w = std::exp(log_w);
  return -std::exp(-alpha * c) + w * (1.0 - log_w) - alpha * c * w;
}

std::vector<ConsumptionPerturbation> default_perturbations() {
  return {{0.1, 0.0},  {-0.1, 0.0}, {0.05, 0.0},  {-0.05, 0.0}, {0.2, 0.0},
          {0.0, 0.1},  {0.0, -0.1}, {0.0, 0.05},  {0.0, -0.05}, {0.0, 0.2}};
}

std::vector<double> optimality_drift_check(const StrategyPath &path, const Economy &econ, int i,
                                           const ConsumptionPerturbation &rule) {
  const double alpha = econ.alpha(i);
  const Index steps = path.X.rows();
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(steps));
  double X = path.X(0, i);
  for (Index k = 0; k < steps; ++k) {
    const double A = path.A(k);
    const double chat = (path.a(k) + path.Y(k, i)) / alpha + X / A;
    const double c = chat + rule.shift + rule.wealth_slope * X / A;
    out.push_back(optimality_drift(alpha, c, X, A, path.Y(k, i)));
    if (k + 1 < steps) {
      const double dt = path.times[static_cast<std::size_t>(k) + 1] -
                        path.times[static_cast<std::size_t>(k)];
      X = X + (path.mu(k) * X + path.endowments(k, i) - c) * dt + X * path.sigma_dB(k);
    }
  }
  return out;
}

} // namespace radner
