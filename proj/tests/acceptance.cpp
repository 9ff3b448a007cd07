// Acceptance suite: one line per criterion, non-zero exit if any fails.

#include "radner/apriori.hpp"
#include "radner/commands.hpp"
#include "radner/config.hpp"
#include "radner/equilibrium.hpp"
#include "radner/pde_solver.hpp"
#include "radner/registry.hpp"
#include "radner/simulate.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

using namespace radner;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances.
constexpr double kClosedFormTol = 1e-3;
constexpr double kClosedFormSeconds = 10.0;
constexpr double kClearingFactor = 5.0;
constexpr double kMcResidualTol = 1e-2;
constexpr double kMcMinOrder = 0.5;
constexpr int kMcPaths = 10000;
constexpr int kMcSteps = 1000;
constexpr double kMuVTol = 1e-8;
constexpr double kMuVOptimalTol = 1e-6;
constexpr std::size_t kMuVMinSamples = 1000;
constexpr std::size_t kPerturbations = 10;
constexpr double kLowerBoundTol = 1e-6;
constexpr double kTruncationTol = 1e-10;
constexpr int kBfProbes = 10000;
constexpr double kContraction = 0.75;
constexpr double kOracleTol = 2e-3;
constexpr double kOracleSeconds = 60.0;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char *f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string g(double v) { return fmt("%.3g", v); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

RunConfig config(const std::string &name) {
  return load_config(std::string(RADNER_SOURCE_DIR) + "/configs/" + name + ".yaml");
}

double sup_error(const SolutionGrid &sol, int column, const std::function<double(double)> &exact) {
  double e = 0.0;
  for (std::size_t n = 0; n < sol.values.size(); ++n) {
    const double ref = exact(sol.time(static_cast<int>(n)));
    e = std::max(e, (sol.values[n].col(column).array() - ref).abs().maxCoeff());
  }
  return e;
}

Outcome zero_endowment() {
  RunConfig cfg = config("zero_endowment");
  cfg.grid.t_steps = 2000;
  cfg.grid.x_steps = {200};
  const auto t0 = std::chrono::steady_clock::now();
  const SolvedModel m = solve_model(cfg);
  const double secs = seconds_since(t0);
  const double T = cfg.state.T;
  const double ea = sup_error(m.sol, 0, [T](double t) { return std::log1p(T - t); });
  const double ey = sup_error(m.sol, 1, [T](double t) { return -std::log1p(T - t); });
  return {ea <= kClosedFormTol && ey <= kClosedFormTol && secs <= kClosedFormSeconds,
          "a err " + g(ea) + ", Y err " + g(ey) + ", " + fmt("%.2f", secs) + " s"};
}

Outcome constant_endowment() {
  RunConfig cfg = config("constant_endowment");
  cfg.grid.t_steps = 2000;
  cfg.grid.x_steps = {200};
  const SolvedModel m = solve_model(cfg);
  const double T = cfg.state.T;
  double ey = 0.0;
  const MatrixXd &v0 = m.sol.values.front();
  for (std::size_t i = 0; i < cfg.agents.size(); ++i) {
    double c = 0.0;
    is_constant_endowment(cfg.agents[i].endowment, &c);
    const double exact = cfg.agents[i].alpha * c - std::log1p(T);
    ey = std::max(ey, (v0.col(static_cast<Index>(i) + 1).array() - exact).abs().maxCoeff());
  }
  const double ea = sup_error(m.sol, 0, [T](double t) { return std::log1p(T - t); });
  return {ey <= kClosedFormTol && ea <= kClosedFormTol,
          "Y(0) err " + g(ey) + ", a err " + g(ea) + " over " + std::to_string(cfg.agents.size()) +
              " agents"};
}

Outcome clearing_identity_check() {
  RunConfig cfg = config("ou_income");
  cfg.grid.t_steps = 200;
  cfg.grid.x_steps = {80};
  std::vector<double> residual, threshold;
  for (int level = 0; level < 2; ++level) {
    const SolvedModel m = solve_model(cfg);
    const GridSpec &gs = m.sol.grid;
    const double scale = clearing_scale(m.econ, m.dyn, gs, cfg.state.T);
    residual.push_back(clearing_identity(m.sol, m.econ).max_residual);
    threshold.push_back(kClearingFactor * (gs.dt(cfg.state.T) + gs.dx(0) * gs.dx(0)) * scale);
    cfg.grid.t_steps *= 2;
    cfg.grid.x_steps[0] *= 2;
  }
  const bool pass =
      residual[0] <= threshold[0] && residual[1] <= threshold[1] && residual[1] < residual[0];
  return {pass, "residual " + g(residual[0]) + " -> " + g(residual[1]) + " (bounds " +
                    g(threshold[0]) + ", " + g(threshold[1]) + ")"};
}

struct McRuns {
  SimulationResult coarse;
  SimulationResult fine;
  double seconds = 0.0;
};

const McRuns &monte_carlo() {
  static const McRuns runs = [] {
    McRuns r;
    const auto t0 = std::chrono::steady_clock::now();
    RunConfig cfg = config("ou_income");
    cfg.grid.t_steps = 2000;
    cfg.grid.x_steps = {400};
    const SolvedModel m = solve_model(cfg);
    const MarketBundle bundle = assemble_market(m.sol, m.econ, m.dyn);
    SimulationOptions opt;
    opt.keep_paths = 0;
    opt.optimality_paths = 64;
    // Coupled runs: the coarse run sums pairs of the fine increments.
    r.coarse = simulate_equilibrium(m.sol, bundle, m.econ, m.dyn,
                                    {kMcPaths, kMcSteps, cfg.simulation.seed, 2}, opt);
    r.fine = simulate_equilibrium(m.sol, bundle, m.econ, m.dyn,
                                  {kMcPaths, 2 * kMcSteps, cfg.simulation.seed, 1}, opt);
    r.seconds = seconds_since(t0);
    return r;
  }();
  return runs;
}

Outcome mc_clearing() {
  const McRuns &r = monte_carlo();
  const ClearingReport &c = r.coarse.clearing;
  const ClearingReport &f = r.fine.clearing;
  const bool small =
      c.sup_pi <= kMcResidualTol && c.sup_c <= kMcResidualTol && c.terminal_wealth <= kMcResidualTol;
  // Strong errors: means over paths of the per-path maxima.
  const double o_pi = std::log2(c.mean_pi / f.mean_pi);
  const double o_c = std::log2(c.mean_c / f.mean_c);
  const double o_T = std::log2(c.mean_terminal / f.mean_terminal);
  const double order = std::min({o_pi, o_c, o_T});
  const double sup_order = std::min({std::log2(c.sup_pi / f.sup_pi), std::log2(c.sup_c / f.sup_c),
                                     std::log2(c.terminal_wealth / f.terminal_wealth)});
  return {small && order >= kMcMinOrder,
          "sup pi " + g(c.sup_pi) + ", c " + g(c.sup_c) + ", X_T " + g(c.terminal_wealth) +
              "; order pi " + fmt("%.3f", o_pi) + ", c " + fmt("%.3f", o_c) + ", X_T " +
              fmt("%.3f", o_T) + " (of path maxima: " + fmt("%.3f", sup_order) + "); " +
              fmt("%.1f", r.seconds) + " s"};
}

Outcome optimality() {
  const OptimalityReport &o = monte_carlo().coarse.optimality;
  const bool pass = o.samples >= kMuVMinSamples && o.strategies >= kPerturbations &&
                    o.max_muV <= kMuVTol && o.max_abs_muV_optimal <= kMuVOptimalTol;
  return {pass, std::to_string(o.samples) + " samples, " + std::to_string(o.strategies) +
                    " perturbations, max mu_V " + g(o.max_muV) + ", max |mu_V| optimal " +
                    g(o.max_abs_muV_optimal)};
}

Outcome apriori() {
  bool pass = true;
  std::string detail;
  for (const char *name : {"ou_income", "symmetric_two_agent", "variable_sigma"}) {
    const RunConfig cfg = config(name);
    const SolvedModel m = solve_model(cfg);
    const LatticeSupNorms norms = lattice_sup_norms(m.econ, m.sol.grid);
    const LowerBoundCheck lb = check_a_lower_bound(m.sol, m.econ, norms.mu_e, kLowerBoundTol);
    const GronwallCheck gc = check_gronwall(m.sol, m.econ, norms);
    const BmoEstimate bmo = bmo_estimate(m.sol, m.econ, m.dyn, norms.mu_e, norms.endowment);
    double y_ratio = 0.0, bmo_ratio = 0.0;
    for (std::size_t i = 0; i < gc.Y_sup.size(); ++i) {
      y_ratio = std::max(y_ratio, gc.Y_sup[i] / gc.bound[i]);
      bmo_ratio = std::max(bmo_ratio, bmo.per_row_estimate[i] / bmo.analytic_bound[i]);
    }
    pass = pass && lb.pass && gc.pass && bmo.within_bound;
    detail += std::string(detail.empty() ? "" : "; ") + name + ": a margin " + g(lb.worst_margin) +
              ", Y/bound " + g(y_ratio) + ", bmo/bound " + g(bmo_ratio);
  }
  return {pass, detail};
}

Outcome truncation() {
  RunConfig cfg = config("ou_income");
  cfg.verify.truncation_tol = kTruncationTol;
  cfg.verify.bf_probes = kBfProbes;
  cfg.verify.truncation_N = 0.0;
  const SolvedModel m = solve_model(cfg);
  const VerifyReport r = verify_model(cfg, m);
  const Json &t = r.doc["checks"]["truncation"];
  const Json &bf = r.doc["checks"]["bf_split"];
  const double split = bf["max_split_error"].get<double>();
  const bool pass = t["pass"].get<bool>() && bf["pass"].get<bool>() && split <= 1e-12;
  return {pass, "N " + g(t["N"].get<double>()) + " (sup u " + g(t["sup_u"].get<double>()) +
                    ", sup z " + g(t["sup_z"].get<double>()) + "), max diff " +
                    g(t["value"].get<double>()) + "; bf split err " + g(split) + ", worst f1 " +
                    g(bf["worst_f1_ratio"].get<double>()) + ", f2 " +
                    g(bf["worst_f2_ratio"].get<double>()) + " over " +
                    std::to_string(bf["probes"].get<int>()) + " probes"};
}

Outcome oracle() {
  bool pass = true;
  std::string detail;
  const auto t0 = std::chrono::steady_clock::now();
  for (const char *name : {"zero_endowment", "constant_endowment"}) {
    RunConfig cfg = config(name);
    cfg.oracle.beta = 0.0;
    cfg.oracle.contraction_threshold = kContraction;
    cfg.oracle.agreement_tol = kOracleTol;
    const SolvedModel m = solve_model(cfg);
    const OracleReport r = oracle_model(cfg, m);
    const Json &tr = r.doc["trace"];
    pass = pass && r.pass;
    detail += std::string(detail.empty() ? "" : "; ") + name + ": factor " +
              g(tr["max_factor"].get<double>()) + " at beta " + g(tr["beta"].get<double>()) +
              ", discrepancy " + g(r.doc["discrepancy"].get<double>());
  }
  const double secs = seconds_since(t0);
  pass = pass && secs <= kOracleSeconds;
  return {pass, detail + "; " + fmt("%.1f", secs) + " s"};
}

std::string slurp(const fs::path &p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

Outcome determinism() {
  const fs::path base = fs::temp_directory_path() / "radner_acceptance_determinism";
  fs::remove_all(base);
  const std::string cfg = std::string(RADNER_SOURCE_DIR) + "/configs/ou_income.yaml";
  std::vector<std::string> docs;
  for (const char *run : {"first", "second"}) {
    CommandOptions opt;
    opt.out_dir = (base / run).string();
    std::ostringstream sink;
    const int code = run_command("simulate", cfg, opt, sink);
    if (code != kExitOk && code != kExitCheckFailed)
      return {false, "simulate exited with " + std::to_string(code)};
    docs.push_back(slurp(base / run / "diagnostics.json"));
  }
  const bool same = !docs[0].empty() && docs[0] == docs[1];
  return {same, std::to_string(docs[0].size()) + " bytes, " + (same ? "identical" : "different")};
}

} // namespace

int main() {
  struct Criterion {
    const char *name;
    Outcome (*run)();
  };
  const Criterion criteria[] = {
      {"1 zero-endowment closed form", zero_endowment},
      {"2 constant-endowment closed form", constant_endowment},
      {"3 clearing identity", clearing_identity_check},
      {"4 Monte Carlo clearing", mc_clearing},
      {"5 optimality drift sign", optimality},
      {"6 a-priori bounds", apriori},
      {"7 truncation ladder", truncation},
      {"8 kernel oracle", oracle},
      {"9 determinism", determinism},
  };
  int failed = 0;
  for (const auto &c : criteria) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception &e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    std::printf("[%s] %s: %s\n", o.pass ? "PASS" : "FAIL", c.name, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of 9 criteria passed\n", 9 - failed);
  return failed == 0 ? 0 : 1;
}
