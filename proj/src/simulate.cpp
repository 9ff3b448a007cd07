#include "radner/simulate.hpp"

#include "radner/apriori.hpp"
#include "radner/errors.hpp"
#include "radner/pde_solver.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <thread>

namespace radner {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

void validate_spec(const EnsembleSpec &spec) {
  if (spec.n_paths < 1 || spec.n_steps < 1 || spec.substeps < 1)
    throw InvalidInput("ensemble needs positive path, step and substep counts");
}

/// Runs body(begin, end) over contiguous blocks of [0, n).
template <typename Body> void parallel_blocks(int n, int threads, Body body) {
  threads = std::max(1, std::min(threads, n));
  if (threads == 1) {
    body(0, n);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(threads));
  for (int w = 0; w < threads; ++w) {
    const int b = static_cast<int>(static_cast<long long>(n) * w / threads);
    const int e = static_cast<int>(static_cast<long long>(n) * (w + 1) / threads);
    pool.emplace_back([&, w, b, e] {
      try {
        body(b, e);
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
      }
    });
  }
  for (auto &t : pool)
    t.join();
  for (auto &e : errors)
    if (e)
      std::rethrow_exception(e);
}

/// Columns: a, mu, sigma (d), Y (I).
std::vector<MatrixXd> pack_market(const SolutionGrid &sol, const MarketBundle &bundle, int I) {
  const int d = sol.dim();
  std::vector<MatrixXd> out(sol.values.size());
  for (std::size_t n = 0; n < out.size(); ++n) {
    MatrixXd &m = out[n];
    m.resize(sol.grid.num_nodes(), 2 + d + I);
    m.col(0) = sol.values[n].col(0);
    m.col(1) = bundle.mu[n];
    m.middleCols(2, d) = bundle.sigma[n];
    m.rightCols(I) = sol.values[n].rightCols(I);
  }
  return out;
}

} // namespace

std::string rng_algorithm() {
  return "mt19937_64 per path, seeded by splitmix64(seed) ^ splitmix64(path); "
         "std::normal_distribution";
}

struct PathNoise::Impl {
  std::mt19937_64 rng;
  std::normal_distribution<double> normal;
  double scale = 0.0;
  int substeps = 1;
  VectorXd dB;
};

PathNoise::PathNoise(const EnsembleSpec &spec, int dim, double horizon, std::uint64_t path)
    : impl_(std::make_shared<Impl>()) {
  validate_spec(spec);
  impl_->rng.seed(splitmix64(spec.seed) ^ splitmix64(path + 0x632be59bd9b4e019ULL));
  impl_->substeps = spec.substeps;
  impl_->scale = std::sqrt(horizon / (static_cast<double>(spec.n_steps) * spec.substeps));
  impl_->dB = VectorXd::Zero(dim);
}

const VectorXd &PathNoise::next() {
  Impl &s = *impl_;
  s.dB.setZero();
  for (int q = 0; q < s.substeps; ++q)
    for (Index k = 0; k < s.dB.size(); ++k)
      s.dB(k) += s.scale * s.normal(s.rng);
  return s.dB;
}

PathEnsemble simulate_state(const StateDynamics &dyn, double horizon, const EnsembleSpec &spec) {
  validate_spec(spec);
  const int d = dyn.dim;
  PathEnsemble ens;
  ens.n_paths = spec.n_paths;
  ens.n_steps = spec.n_steps;
  ens.dim = d;
  ens.seed = spec.seed;
  ens.horizon = horizon;
  ens.states.resize(spec.n_paths, static_cast<Index>(spec.n_steps + 1) * d);
  ens.increments.resize(spec.n_paths, static_cast<Index>(spec.n_steps) * d);
  const double dt = horizon / spec.n_steps;
  for (int p = 0; p < spec.n_paths; ++p) {
    PathNoise noise(spec, d, horizon, static_cast<std::uint64_t>(p));
    VectorXd x = dyn.x0;
    ens.states.row(p).head(d) = x.transpose();
    for (int k = 0; k < spec.n_steps; ++k) {
      const double t = k * dt;
      const VectorXd &dB = noise.next();
      x = x + dyn.drift(t, x) * dt + dyn.diffusion(t, x) * dB;
      if (!x.allFinite()) {
        std::ostringstream os;
        os << "state blew up on path " << p << " at step " << k + 1;
        throw DivergenceError(k + 1, p, -1, x.norm(), os.str());
      }
      ens.increments.row(p).segment(static_cast<Index>(k) * d, d) = dB.transpose();
      ens.states.row(p).segment(static_cast<Index>(k + 1) * d, d) = x.transpose();
    }
  }
  return ens;
}

SimulationResult simulate_equilibrium(const SolutionGrid &sol, const MarketBundle &bundle,
                                      const Economy &econ, const StateDynamics &dyn,
                                      const EnsembleSpec &spec, const SimulationOptions &options) {
  validate_spec(spec);
  require_unit_supply(econ);
  const int I = econ.num_agents();
  const int d = dyn.dim;
  if (sol.components != I + 1 || sol.dim() != d || bundle.A.size() != sol.values.size())
    throw InvalidInput("solution, market and economy do not match");

  const double T = econ.horizon;
  const int steps = spec.n_steps;
  const double dt = T / steps;
  const std::vector<MatrixXd> packed = pack_market(sol, bundle, I);
  const GridInterpolator interp(sol.grid, sol.horizon);
  const int stored = std::min(spec.n_paths, std::max(options.keep_paths, options.optimality_paths));

  std::vector<ClearingAccumulator::PathMaxima> maxima(static_cast<std::size_t>(spec.n_paths));
  std::vector<double> gaps(static_cast<std::size_t>(spec.n_paths), 0.0);
  std::vector<std::size_t> extrap(static_cast<std::size_t>(spec.n_paths), 0);
  std::vector<StrategyPath> kept(static_cast<std::size_t>(stored));

  auto run_path = [&](int p) {
    const bool keep = p < stored;
    StrategyPath path;
    if (keep) {
      path.path_id = static_cast<std::uint64_t>(p);
      path.times.resize(static_cast<std::size_t>(steps) + 1);
      path.state.resize(static_cast<std::size_t>(steps) + 1);
      path.A.resize(steps + 1);
      path.a.resize(steps + 1);
      path.mu.resize(steps + 1);
      path.e.resize(steps + 1);
      path.sigma_dB.resize(steps);
      path.Y.resize(steps + 1, I);
      path.endowments.resize(steps + 1, I);
      path.X.resize(steps + 1, I);
      path.pi.resize(steps + 1, I);
      path.c.resize(steps + 1, I);
    }
    PathNoise noise(spec, d, T, static_cast<std::uint64_t>(p));
    VectorXd x = dyn.x0;
    VectorXd X(I), e(I);
    ClearingAccumulator::PathMaxima m;
    double gap = 0.0;
    std::size_t outside = 0;
    for (int k = 0; k <= steps; ++k) {
      const double t = k == steps ? T : k * dt;
      const auto w = interp.locate(t, x);
      outside += w.extrapolated ? 1 : 0;
      const RowVectorXd row = interp.interpolate(packed, w);
      const double a = row(0);
      const double A = std::exp(a);
      const double mu = row(1);
      double e_sum = 0.0;
      for (int i = 0; i < I; ++i) {
        e(i) = econ.endowment(i, t, x);
        e_sum += e(i);
      }
      if (k == 0)
        for (int i = 0; i < I; ++i)
          X(i) = econ.agents[static_cast<std::size_t>(i)].initial_holding * A;

      double pi_sum = 0.0, c_sum = 0.0;
      VectorXd c(I);
      for (int i = 0; i < I; ++i) {
        c(i) = (a + row(2 + d + i)) / econ.alpha(i) + X(i) / A;
        pi_sum += X(i) / A;
        c_sum += c(i);
      }
      m.pi = std::max(m.pi, std::abs(pi_sum - 1.0));
      m.c = std::max(m.c, std::abs(c_sum - (e_sum + 1.0)));
      gap = std::max(gap, std::abs(X.sum() - A));
      if (keep) {
        const auto ks = static_cast<std::size_t>(k);
        path.times[ks] = t;
        path.state[ks] = x;
        path.A(k) = A;
        path.a(k) = a;
        path.mu(k) = mu;
        path.e(k) = e_sum;
        path.Y.row(k) = row.tail(I);
        path.endowments.row(k) = e.transpose();
        path.X.row(k) = X.transpose();
        path.pi.row(k) = (X / A).transpose();
        path.c.row(k) = c.transpose();
      }
      if (k == steps) {
        m.terminal = std::abs(X.sum() - 1.0);
        break;
      }
      const VectorXd &dB = noise.next();
      const double sdB = row.segment(2, d).dot(dB);
      for (int i = 0; i < I; ++i)
        X(i) = X(i) + (mu * X(i) + e(i) - c(i)) * dt + X(i) * sdB;
      if (keep)
        path.sigma_dB(k) = sdB;
      x = x + dyn.drift(t, x) * dt + dyn.diffusion(t, x) * dB;
      if (!x.allFinite() || !X.allFinite()) {
        std::ostringstream os;
        os << "simulation blew up on path " << p << " at step " << k + 1;
        throw DivergenceError(k + 1, p, -1, X.norm(), os.str());
      }
    }
    const auto ps = static_cast<std::size_t>(p);
    maxima[ps] = m;
    gaps[ps] = gap;
    extrap[ps] = outside;
    if (keep)
      kept[ps] = std::move(path);
  };

  parallel_blocks(spec.n_paths, options.threads, [&](int b, int e) {
    for (int p = b; p < e; ++p)
      run_path(p);
  });

  SimulationResult res;
  ClearingAccumulator acc;
  for (int p = 0; p < spec.n_paths; ++p) {
    const auto ps = static_cast<std::size_t>(p);
    acc.add(maxima[ps]);
    res.max_wealth_gap = std::max(res.max_wealth_gap, gaps[ps]);
    res.extrapolated += extrap[ps];
  }
  res.clearing = acc.report(spec.seed);

  OptimalityReport &opt = res.optimality;
  const auto rules = default_perturbations();
  opt.strategies = rules.size();
  opt.max_muV = -std::numeric_limits<double>::infinity();
  opt.max_muV_perturbed = -std::numeric_limits<double>::infinity();
  const int checked = std::min(stored, options.optimality_paths);
  for (int p = 0; p < checked; ++p) {
    const auto &path = kept[static_cast<std::size_t>(p)];
    for (int i = 0; i < I; ++i) {
      for (double v : optimality_drift_check(path, econ, i)) {
        ++opt.samples;
        opt.max_muV = std::max(opt.max_muV, v);
        opt.min_muV_optimal = std::min(opt.min_muV_optimal, v);
        opt.max_abs_muV_optimal = std::max(opt.max_abs_muV_optimal, std::abs(v));
      }
      for (const auto &rule : rules)
        for (double v : optimality_drift_check(path, econ, i, rule)) {
          opt.max_muV = std::max(opt.max_muV, v);
          opt.max_muV_perturbed = std::max(opt.max_muV_perturbed, v);
        }
    }
  }
  if (opt.samples == 0) {
    opt.max_muV = 0.0;
    opt.max_muV_perturbed = 0.0;
  }

  kept.resize(static_cast<std::size_t>(std::min(stored, options.keep_paths)));
  res.paths = std::move(kept);
  return res;
}

BmoEstimate bmo_estimate(const SolutionGrid &sol, const Economy &econ, const StateDynamics &dyn,
                         double mu_e_sup, const std::vector<double> &endowment_sup) {
  const int I = econ.num_agents();
  const int d = sol.dim();
  const std::vector<MatrixXd> Z = extract_Z(sol, dyn);
  BmoEstimate out;
  out.within_bound = true;
  for (int j = 0; j <= I; ++j) {
    std::vector<VectorXd> source(Z.size());
    for (std::size_t n = 0; n < Z.size(); ++n)
      source[n] = Z[n].middleCols(static_cast<Index>(j) * d, d).rowwise().squaredNorm();
    const SolutionGrid w = solve_linear_expectation(dyn, sol.horizon, source, sol.grid);
    double sup = 0.0;
    for (const auto &v : w.values)
      sup = std::max(sup, v.maxCoeff());
    if (j == 0) {
      out.sigma_estimate = sup;
      continue;
    }
    double y_sup = 0.0;
    for (const auto &v : sol.values)
      y_sup = std::max(y_sup, v.col(j).cwiseAbs().maxCoeff());
    const auto idx = static_cast<std::size_t>(j - 1);
    const double C = z_free_growth_constant(econ.alpha(j - 1), endowment_sup[idx], econ.horizon,
                                            econ.ba, mu_e_sup);
    const double bound = bmo_analytic_bound(y_sup, C, econ.horizon);
    out.per_row_estimate.push_back(sup);
    out.analytic_bound.push_back(bound);
    out.growth_constant.push_back(C);
    out.within_bound = out.within_bound && sup <= bound;
  }
  return out;
}

} // namespace radner
