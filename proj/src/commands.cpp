#include "radner/commands.hpp"

#include "radner/apriori.hpp"
#include "radner/container.hpp"
#include "radner/equilibrium.hpp"
#include "radner/errors.hpp"
#include "radner/registry.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>

namespace radner {

namespace fs = std::filesystem;

namespace {

Json vec_json(const VectorXd &v) {
  Json a = Json::array();
  for (Index k = 0; k < v.size(); ++k)
    a.push_back(v(k));
  return a;
}

Json versions() {
  return {{"radner", kVersion},
          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                        "." + std::to_string(EIGEN_MINOR_VERSION)},
          {"rng", rng_algorithm()}};
}

Json check(double value, double threshold, bool pass) {
  return {{"value", value}, {"threshold", threshold}, {"pass", pass}};
}

/// Values and gradients at (t, x) by lattice interpolation.
RowVectorXd solution_at(const SolutionGrid &sol, double t, const VectorXd &x) {
  const GridInterpolator interp(sol.grid, sol.horizon);
  return interp.interpolate(sol.values, interp.locate(t, x));
}

struct SupNorms {
  double u = 0.0;
  double z = 0.0;
};

SupNorms solution_sup_norms(const SolutionGrid &sol, const StateDynamics &dyn) {
  SupNorms s;
  for (const auto &v : sol.values)
    s.u = std::max(s.u, v.cwiseAbs().maxCoeff());
  const int d = sol.dim();
  for (const auto &Z : extract_Z(sol, dyn))
    for (Index p = 0; p < Z.rows(); ++p)
      for (int j = 0; j < sol.components; ++j)
        s.z = std::max(s.z, Z.row(p).segment(j * d, d).norm());
  return s;
}

double mesh_size(const GridSpec &g, double horizon) {
  double dx2 = 0.0;
  for (int k = 0; k < g.dim(); ++k)
    dx2 = std::max(dx2, g.dx(k) * g.dx(k));
  return g.dt(horizon) + dx2;
}

bool all_constant(const RunConfig &cfg, std::vector<double> &values) {
  values.clear();
  for (const auto &a : cfg.agents) {
    double v = 0.0;
    if (!is_constant_endowment(a.endowment, &v))
      return false;
    values.push_back(v);
  }
  return true;
}

Json bf_probe_check(const RunConfig &cfg, const SolvedModel &m, double N, double mu_e_sup,
                    bool &pass) {
  const Economy &econ = m.econ;
  const int I = econ.num_agents();
  const int d = m.sol.dim();
  const GridSpec &g = m.sol.grid;
  std::mt19937_64 rng(cfg.verify.probe_seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  std::vector<DriverInput> probes(static_cast<std::size_t>(std::max(cfg.verify.bf_probes, 0)));
  double mu_sup = mu_e_sup;
  for (auto &in : probes) {
    in.t = econ.horizon * unit(rng);
    in.x.resize(d);
    for (int k = 0; k < d; ++k)
      in.x(k) = g.x_min(k) + (g.x_max(k) - g.x_min(k)) * unit(rng);
    in.y.resize(I + 1);
    for (int j = 0; j <= I; ++j)
      in.y(j) = 2.0 * N * (2.0 * unit(rng) - 1.0);
    in.z.resize(I + 1, d);
    for (int j = 0; j <= I; ++j)
      for (int k = 0; k < d; ++k)
        in.z(j, k) = N * normal(rng);
    mu_sup = std::max(mu_sup, std::abs(econ.mu_e(in.t, in.x)));
  }

  const TruncationLevel level{N, N};
  const EconomyBounds bounds = declared_bounds(econ, mu_sup);
  double split = 0.0, f1 = 0.0, f2 = 0.0;
  std::size_t failures = 0;
  for (const auto &in : probes) {
    try {
      const BfSplit s = bf_split(econ, level, bounds, in);
      split = std::max(split, s.split_error);
      f1 = std::max(f1, s.worst_f1_ratio);
      f2 = std::max(f2, s.worst_f2_ratio);
      failures += (s.f1_bounded && s.f2_triangular) ? 0 : 1;
    } catch (const std::logic_error &) {
      ++failures;
    }
  }
  pass = failures == 0;
  return {{"probes", probes.size()},
          {"N", N},
          {"C", bf_universal_constant(econ, level, bounds)},
          {"max_split_error", split},
          {"worst_f1_ratio", f1},
          {"worst_f2_ratio", f2},
          {"failures", failures},
          {"pass", pass}};
}

} // namespace

SolvedModel build_model(const RunConfig &cfg) {
  SolvedModel m;
  m.dyn = build_dynamics(cfg);
  m.econ = build_economy(cfg, m.dyn);
  m.fingerprint = config_fingerprint(cfg);
  return m;
}

SolvedModel solve_model(const RunConfig &cfg) {
  SolvedModel m = build_model(cfg);
  const Driver driver = build_driver(cfg, m.econ);
  m.sol = solve_backward(m.econ, m.dyn, driver, build_grid(cfg), build_scheme(cfg));
  m.sol.meta.fingerprint = m.fingerprint;
  return m;
}

SolvedModel load_or_solve(const RunConfig &cfg, const std::string &path) {
  if (path.empty() || !fs::exists(path))
    return solve_model(cfg);
  SolvedModel m = build_model(cfg);
  LoadedSolution loaded = read_solution(path);
  if (loaded.sol.meta.fingerprint != m.fingerprint)
    throw FingerprintMismatch("solution " + path + " has fingerprint " +
                              loaded.sol.meta.fingerprint + ", config has " + m.fingerprint);
  m.sol = std::move(loaded.sol);
  return m;
}

Json market_summary(const SolvedModel &m) {
  const VectorXd x0 = m.dyn.x0;
  const RowVectorXd u0 = solution_at(m.sol, 0.0, x0);
  Json Y = Json::array();
  for (Index j = 1; j < u0.size(); ++j)
    Y.push_back(u0(j));
  return {{"fingerprint", m.fingerprint},
          {"version", kVersion},
          {"driver", m.sol.meta.driver},
          {"x0", vec_json(x0)},
          {"a0", u0(0)},
          {"A0", std::exp(u0(0))},
          {"Y0", Y},
          {"exp_clamps", m.sol.meta.exp_clamps},
          {"stability_dt", m.sol.meta.stability_dt},
          {"stability_ok", m.sol.meta.stability_ok}};
}

VerifyReport verify_model(const RunConfig &cfg, const SolvedModel &m) {
  const Economy &econ = m.econ;
  const SolutionGrid &sol = m.sol;
  const GridSpec &g = sol.grid;
  const int I = econ.num_agents();
  VerifyReport r;
  Json checks;
  bool pass = true;

  {
    const Driver driver = build_driver(cfg, econ);
    double worst = 0.0;
    const MatrixXd &uT = sol.values.back();
    for (Index p = 0; p < g.num_nodes(); ++p)
      worst = std::max(worst, (uT.row(p).transpose() - driver.terminal(g.node(p))).cwiseAbs().maxCoeff());
    const bool ok = worst <= cfg.verify.terminal_tol;
    checks["terminal"] = check(worst, cfg.verify.terminal_tol, ok);
    pass = pass && ok;
  }

  const LatticeSupNorms norms = lattice_sup_norms(econ, g);
  {
    const ClearingIdentity ci = clearing_identity(sol, econ);
    const double scale = clearing_scale(econ, m.dyn, g, econ.horizon);
    const double threshold = cfg.verify.clearing_factor * mesh_size(g, econ.horizon) * scale;
    const bool ok = ci.max_residual <= threshold;
    Json c = check(ci.max_residual, threshold, ok);
    c["scale"] = scale;
    c["terminal_residual"] = ci.terminal_residual;
    c["time_index"] = ci.time_index;
    c["node"] = ci.node;
    checks["clearing_identity"] = c;
    pass = pass && ok;
  }
  {
    const LowerBoundCheck lb = check_a_lower_bound(sol, econ, norms.mu_e, cfg.verify.lower_bound_tol);
    Json c = check(lb.worst_margin, -cfg.verify.lower_bound_tol, lb.pass);
    c["a_min"] = lb.a_min;
    c["bound_at_a_min"] = lb.bound_at_a_min;
    checks["a_lower_bound"] = c;
    pass = pass && lb.pass;
  }
  {
    const GronwallCheck gc = check_gronwall(sol, econ, norms);
    checks["gronwall"] = {{"Y_sup", gc.Y_sup}, {"bound", gc.bound}, {"pass", gc.pass}};
    pass = pass && gc.pass;
  }
  {
    const BmoEstimate b = bmo_estimate(sol, econ, m.dyn, norms.mu_e, norms.endowment);
    checks["bmo"] = {{"sigma_estimate", b.sigma_estimate},
                     {"per_row_estimate", b.per_row_estimate},
                     {"analytic_bound", b.analytic_bound},
                     {"pass", b.within_bound}};
    pass = pass && b.within_bound;
  }

  const SupNorms sup = solution_sup_norms(sol, m.dyn);
  const double N = cfg.verify.truncation_N > 0.0 ? cfg.verify.truncation_N
                                                  : std::ceil(std::max(sup.u, sup.z)) + 1.0;
  {
    bool ok = false;
    checks["bf_split"] = bf_probe_check(cfg, m, N, norms.mu_e, ok);
    pass = pass && ok;
  }
  {
    const Driver trunc = Driver::truncated(econ, N);
    const SolutionGrid ts = solve_backward(econ, m.dyn, trunc, g, build_scheme(cfg));
    const NodeDifference diff = compare_solutions(sol, ts, cfg.verify.truncation_tol);
    Json c = check(diff.max_abs, cfg.verify.truncation_tol, diff.within);
    c["N"] = N;
    c["sup_u"] = sup.u;
    c["sup_z"] = sup.z;
    if (!diff.within)
      c["first_disagreement"] = {
          {"time_index", diff.time_index}, {"node", diff.node}, {"component", diff.component}};
    checks["truncation"] = c;
    pass = pass && diff.within;
  }

  std::vector<double> constants;
  if (all_constant(cfg, constants)) {
    double err_a = 0.0, err_y = 0.0;
    for (std::size_t n = 0; n < sol.values.size(); ++n) {
      const double a_exact = std::log1p(econ.horizon - sol.time(static_cast<int>(n)));
      const MatrixXd &v = sol.values[n];
      for (Index p = 0; p < v.rows(); ++p) {
        err_a = std::max(err_a, std::abs(v(p, 0) - a_exact));
        for (int i = 0; i < I; ++i)
          err_y = std::max(err_y, std::abs(v(p, i + 1) - (econ.alpha(i) * constants[static_cast<std::size_t>(i)] - v(p, 0))));
      }
    }
    const double worst = std::max(err_a, err_y);
    const bool ok = worst <= cfg.verify.closed_form_tol;
    Json c = check(worst, cfg.verify.closed_form_tol, ok);
    c["a_error"] = err_a;
    c["Y_error"] = err_y;
    checks["closed_form"] = c;
    pass = pass && ok;
  }

  r.pass = pass;
  r.doc = {{"fingerprint", m.fingerprint},
           {"version", kVersion},
           {"mesh", {{"t_steps", g.t_steps}, {"x_steps", g.x_steps}}},
           {"checks", checks},
           {"pass", pass}};
  return r;
}

OracleReport oracle_model(const RunConfig &cfg, const SolvedModel &m) {
  const double lambda = m.dyn.constant_sigma.value_or(1.0);
  const KernelSpec spec = build_kernel(cfg, lambda);
  const Driver driver = Driver::truncated(m.econ, cfg.oracle.N);
  const PicardResult res = picard_solve(m.econ, m.dyn, driver, spec, build_picard_options(cfg));

  const double x0 = m.dyn.x0.size() > 0 ? m.dyn.x0(0) : 0.0;
  const VectorXd oracle0 = res.at_origin(x0);
  const RowVectorXd fd0 = solution_at(m.sol, 0.0, m.dyn.x0);
  const double discrepancy = (oracle0 - fd0.transpose()).cwiseAbs().maxCoeff();
  const PicardTrace &tr = res.trace;

  OracleReport r;
  r.pass = tr.converged && tr.max_factor <= cfg.oracle.contraction_threshold &&
           discrepancy <= cfg.oracle.agreement_tol;
  r.doc = {{"fingerprint", m.fingerprint},
           {"version", kVersion},
           {"lambda", lambda},
           {"N", cfg.oracle.N},
           {"oracle_u0", vec_json(oracle0)},
           {"lattice_u0", vec_json(fd0.transpose())},
           {"discrepancy", discrepancy},
           {"agreement_tol", cfg.oracle.agreement_tol},
           {"trace",
            {{"lipschitz", tr.lipschitz},
             {"beta", tr.beta},
             {"betas", tr.betas},
             {"diff_norms", tr.diff_norms},
             {"factors", tr.factors},
             {"max_factor", tr.max_factor},
             {"fixed_point_residual", tr.fixed_point_residual},
             {"sup_norm", tr.sup_norm},
             {"iterations", tr.iterations},
             {"converged", tr.converged}}},
           {"pass", r.pass}};
  return r;
}

SimulateReport simulate_model(const RunConfig &cfg, const SolvedModel &m, int threads,
                              const std::string &paths_csv) {
  const Economy &econ = m.econ;
  const MarketBundle bundle = assemble_market(m.sol, econ, m.dyn);
  SimulationOptions opt;
  opt.threads = threads;
  opt.keep_paths = cfg.simulation.keep_paths;
  opt.optimality_paths = cfg.simulation.optimality_paths;
  const EnsembleSpec ens = build_ensemble(cfg);
  const SimulationResult res = simulate_equilibrium(m.sol, bundle, econ, m.dyn, ens, opt);
  if (!paths_csv.empty())
    write_paths_csv(paths_csv, res.paths);

  const LatticeSupNorms norms = lattice_sup_norms(econ, m.sol.grid);
  const LowerBoundCheck lb = check_a_lower_bound(m.sol, econ, norms.mu_e);
  const GronwallCheck gc = check_gronwall(m.sol, econ, norms);
  const BmoEstimate bmo = bmo_estimate(m.sol, econ, m.dyn, norms.mu_e, norms.endowment);

  const ClearingReport &c = res.clearing;
  const double tol = cfg.simulation.clearing_tol;
  const bool clearing_ok = c.sup_pi <= tol && c.sup_c <= tol && c.terminal_wealth <= tol;
  const OptimalityReport &o = res.optimality;

  SimulateReport r;
  r.pass = clearing_ok;
  r.doc = {{"fingerprint", m.fingerprint},
           {"clearing",
            {{"sup_pi", c.sup_pi},
             {"sup_c", c.sup_c},
             {"terminal_wealth", c.terminal_wealth},
             {"mean_pi", c.mean_pi},
             {"mean_c", c.mean_c},
             {"mean_terminal", c.mean_terminal},
             {"tolerance", tol},
             {"pass", clearing_ok}}},
           {"optimality",
            {{"max_muV", o.max_muV},
             {"min_muV_optimal", o.min_muV_optimal},
             {"max_abs_muV_optimal", o.max_abs_muV_optimal},
             {"max_muV_perturbed", o.max_muV_perturbed},
             {"samples", o.samples},
             {"strategies", o.strategies}}},
           {"bounds",
            {{"a_min", lb.a_min},
             {"a_lower_bound", lb.bound_at_a_min},
             {"Y_sup", gc.Y_sup},
             {"gronwall_bound", gc.bound}}},
           {"bmo", {{"per_row_estimate", bmo.per_row_estimate}, {"analytic_bound", bmo.analytic_bound}}},
           {"mesh",
            {{"t_steps", m.sol.grid.t_steps},
             {"x_steps", m.sol.grid.x_steps},
             {"n_paths", ens.n_paths},
             {"n_steps", ens.n_steps},
             {"substeps", ens.substeps}}},
           {"extrapolated_points", res.extrapolated},
           {"max_wealth_gap", res.max_wealth_gap},
           {"seed", ens.seed},
           {"versions", versions()}};
  return r;
}

namespace {

Json error_json(const std::string &kind, const std::string &message) {
  return {{"error", kind}, {"message", message}};
}

int run_checked(const std::string &command, const RunConfig &cfg, const CommandOptions &options,
                std::ostream &out) {
  const fs::path dir = options.out_dir.value_or(cfg.output.directory);
  const std::string solution_path = (dir / "solution.radn").string();

  if (command == "solve") {
    const SolvedModel m = solve_model(cfg);
    fs::create_directories(dir);
    if (cfg.output.container)
      write_solution(solution_path, m.sol, {{"config", serialize_config(cfg)}});
    if (cfg.output.csv)
      for (double t : cfg.output.csv_times) {
        const int n = std::clamp(static_cast<int>(std::lround(t / cfg.state.T * cfg.grid.t_steps)), 0,
                                 cfg.grid.t_steps);
        write_csv_slice((dir / ("slice_" + std::to_string(n) + ".csv")).string(), m.sol, n);
      }
    const Json summary = market_summary(m);
    write_json_file((dir / "market_summary.json").string(), summary);
    out << dump_json(summary);
    return kExitOk;
  }
  if (command == "verify") {
    const SolvedModel m = load_or_solve(cfg, solution_path);
    const VerifyReport r = verify_model(cfg, m);
    fs::create_directories(dir);
    write_json_file((dir / "verify.json").string(), r.doc);
    out << dump_json(r.doc);
    return r.pass ? kExitOk : kExitCheckFailed;
  }
  if (command == "oracle") {
    const SolvedModel m = load_or_solve(cfg, solution_path);
    const OracleReport r = oracle_model(cfg, m);
    fs::create_directories(dir);
    write_json_file((dir / "oracle.json").string(), r.doc);
    out << dump_json(r.doc);
    return r.pass ? kExitOk : kExitCheckFailed;
  }
  if (command == "simulate") {
    const SolvedModel m = load_or_solve(cfg, solution_path);
    fs::create_directories(dir);
    const SimulateReport r =
        simulate_model(cfg, m, options.threads, (dir / "paths.csv").string());
    write_json_file((dir / "diagnostics.json").string(), r.doc);
    out << dump_json(r.doc);
    return r.pass ? kExitOk : kExitCheckFailed;
  }
  out << dump_json(error_json("usage", "unknown command '" + command + "'"));
  return kExitConfig;
}

} // namespace

int run_command(const std::string &command, const std::string &config_path,
                const CommandOptions &options, std::ostream &out) {
  RunConfig cfg;
  try {
    cfg = load_config(config_path);
    if (options.seed)
      cfg.simulation.seed = *options.seed;
  } catch (const ConfigError &e) {
    Json j = error_json("config", e.what());
    j["line"] = e.line;
    out << dump_json(j);
    return kExitConfig;
  }
  if (options.threads < 1) {
    out << dump_json(error_json("config", "--threads must be at least 1"));
    return kExitConfig;
  }

  try {
    return run_checked(command, cfg, options, out);
  } catch (const NonContraction &e) {
    Json j = error_json("non_contraction", e.what());
    j["factor"] = e.factor;
    j["suggested_beta"] = e.suggested_beta;
    out << dump_json(j);
    return kExitSolver;
  } catch (const DivergenceError &e) {
    Json j = error_json("divergence", e.what());
    j["time_index"] = e.time_index;
    j["node"] = e.node;
    j["component"] = e.component;
    j["value"] = e.value;
    out << dump_json(j);
    return kExitSolver;
  } catch (const FingerprintMismatch &e) {
    out << dump_json(error_json("fingerprint", e.what()));
    return kExitFingerprint;
  } catch (const UnsupportedOracle &e) {
    out << dump_json(error_json("unsupported", e.what()));
    return kExitUnsupported;
  } catch (const InvalidInput &e) {
    out << dump_json(error_json("invalid_input", e.what()));
    return kExitConfig;
  } catch (const std::exception &e) {
    out << dump_json(error_json("solver", e.what()));
    return kExitSolver;
  }
}

} // namespace radner
