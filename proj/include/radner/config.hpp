#pragma once

#include "radner/drivers.hpp"
#include "radner/grid.hpp"
#include "radner/model.hpp"
#include "radner/pde_solver.hpp"
#include "radner/picard_kernel.hpp"
#include "radner/simulate.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace radner {

/// Units: time in years of the model horizon, state in the units of xi,
/// endowments and consumption in goods per unit time.
struct StateConfig {
  int dim = 1;
  std::string drift = "zero";
  std::string diffusion = "constant:1";
  double K = 1.0;
  std::vector<double> x0; // defaults to the origin
  double T = 1.0;
};

struct AgentConfig {
  double alpha = 1.0;
  std::string endowment = "zero";
  double pi0 = 0.0;
  double bound = 1.0; // declared sup of |e^i|
};

struct GridConfig {
  int t_steps = 200;
  std::vector<double> x_min{-4.0};
  std::vector<double> x_max{4.0};
  std::vector<int> x_steps{80};
};

struct SchemeConfig {
  std::string driver = "full"; // full | truncated | intermediate
  double N = 0.0;
  double N0 = 0.0;
  double blowup_bound = 1e6;
  bool inner_picard = false;
  int inner_picard_max_iter = 5;
  double inner_picard_tol = 1e-10;
};

struct SimulationConfig {
  int n_paths = 1000;
  int n_steps = 200;
  std::uint64_t seed = 1;
  int substeps = 1;
  int keep_paths = 8;
  int optimality_paths = 64;
  double clearing_tol = 1e-2;
};

struct OracleConfig {
  double N = 5.0;
  double beta = 0.0; // 0 selects beta automatically
  int time_steps = 40;
  int space_nodes = 33;
  double window = 0.0;
  int r_nodes = 32;
  int y_nodes = 65;
  double y_range = 8.0;
  double tol = 1e-10;
  int max_iter = 60;
  double contraction_threshold = 0.75;
  double agreement_tol = 2e-3;
};

struct VerifyConfig {
  double terminal_tol = 0.0;
  double clearing_factor = 5.0;
  double lower_bound_tol = 1e-6;
  double closed_form_tol = 1e-3;
  int bf_probes = 10000;
  std::uint64_t probe_seed = 7;
  double truncation_N = 0.0; // 0 selects a level above the observed sup norms
  double truncation_tol = 1e-10;
};

struct OutputConfig {
  std::string directory = "out";
  std::vector<double> csv_times{0.0};
  bool container = true;
  bool csv = true;
};

struct RunConfig {
  StateConfig state;
  std::vector<AgentConfig> agents;
  GridConfig grid;
  SchemeConfig scheme;
  SimulationConfig simulation;
  OracleConfig oracle;
  VerifyConfig verify;
  OutputConfig output;
};

/// Parses the YAML config. Every failure is a ConfigError carrying the line.
RunConfig parse_config(const std::string &text);
RunConfig load_config(const std::string &path);

/// Canonical YAML with every section and key in a fixed order.
std::string serialize_config(const RunConfig &cfg);

/// FNV-1a (64 bit, hex) of the canonical state, agents, grid and scheme sections.
std::string config_fingerprint(const RunConfig &cfg);

StateDynamics build_dynamics(const RunConfig &cfg);
Economy build_economy(const RunConfig &cfg, const StateDynamics &dyn);
GridSpec build_grid(const RunConfig &cfg);
SchemeParams build_scheme(const RunConfig &cfg);
Driver build_driver(const RunConfig &cfg, const Economy &econ);
EnsembleSpec build_ensemble(const RunConfig &cfg);
KernelSpec build_kernel(const RunConfig &cfg, double lambda);
PicardOptions build_picard_options(const RunConfig &cfg);

} // namespace radner
