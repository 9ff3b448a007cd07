#pragma once

#include "radner/equilibrium.hpp"
#include "radner/grid.hpp"
#include "radner/model.hpp"

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace radner {

/// Per-path generator streams: mt19937_64 seeded with splitmix64(seed, path),
/// standard normals from std::normal_distribution.
std::string rng_algorithm();

struct EnsembleSpec {
  int n_paths = 1;
  int n_steps = 1;
  std::uint64_t seed = 0;
  // Each step's increment is the sum of `substeps` finer increments, so runs
  // with (n, 2) and (2n, 1) see the same Brownian path.
  int substeps = 1;
};

/// Brownian increments and Euler states of the state process.
struct PathEnsemble {
  int n_paths = 0;
  int n_steps = 0;
  int dim = 0;
  std::uint64_t seed = 0;
  double horizon = 1.0;
  MatrixXd states;     // n_paths x ((n_steps + 1) d)
  MatrixXd increments; // n_paths x (n_steps d)
};

/// Generates the increments of one path, step by step.
class PathNoise {
public:
  PathNoise(const EnsembleSpec &spec, int dim, double horizon, std::uint64_t path);
  /// Increment over the next step.
  const VectorXd &next();

private:
  struct Impl;
  std::shared_ptr<Impl> impl_;
};

PathEnsemble simulate_state(const StateDynamics &dyn, double horizon, const EnsembleSpec &spec);

struct OptimalityReport {
  std::size_t samples = 0;
  std::size_t strategies = 0;    // perturbed strategies per agent
  double max_muV = 0.0;          // over perturbed and optimal samples
  double min_muV_optimal = 0.0;  // most negative optimal sample
  double max_abs_muV_optimal = 0.0;
  double max_muV_perturbed = 0.0;
};

struct SimulationOptions {
  int threads = 1;
  int keep_paths = 8;        // paths returned for CSV output
  int optimality_paths = 64; // paths used for the drift check
};

struct SimulationResult {
  ClearingReport clearing;
  OptimalityReport optimality;
  std::vector<StrategyPath> paths; // the first keep_paths paths
  std::size_t extrapolated = 0;    // path points outside the lattice
  double max_wealth_gap = 0.0;     // max |sum X - A| over the lattice
};

SimulationResult simulate_equilibrium(const SolutionGrid &sol, const MarketBundle &bundle,
                                      const Economy &econ, const StateDynamics &dyn,
                                      const EnsembleSpec &spec,
                                      const SimulationOptions &options = {});

struct BmoEstimate {
  double sigma_estimate = 0.0;       // row 0
  std::vector<double> per_row_estimate; // rows 1..I
  std::vector<double> analytic_bound;   // rows 1..I
  std::vector<double> growth_constant;  // C in the analytic bound
  bool within_bound = false;
};

/// sup over nodes of w with w_t + A w + |Z^i|^2 = 0, w(T) = 0, for every row,
/// and the exponential-transform bound for rows 1..I.
BmoEstimate bmo_estimate(const SolutionGrid &sol, const Economy &econ, const StateDynamics &dyn,
                         double mu_e_sup, const std::vector<double> &endowment_sup);

} // namespace radner
