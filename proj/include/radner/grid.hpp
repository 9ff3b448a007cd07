#pragma once

#include "radner/types.hpp"

#include <array>
#include <cstddef>
#include <string>
#include <vector>

namespace radner {

/// Uniform time-space lattice. x_steps counts intervals, so dimension k has
/// x_steps[k] + 1 nodes; nodes are ordered with dimension 0 fastest.
struct GridSpec {
  int t_steps = 2;
  VectorXd x_min;
  VectorXd x_max;
  std::vector<int> x_steps;

  int dim() const { return static_cast<int>(x_steps.size()); }
  int nodes_along(int k) const { return x_steps[static_cast<std::size_t>(k)] + 1; }
  Index num_nodes() const;
  double dx(int k) const { return (x_max(k) - x_min(k)) / x_steps[static_cast<std::size_t>(k)]; }
  double dt(double horizon) const { return horizon / t_steps; }
  double time(int n, double horizon) const { return horizon * n / t_steps; }

  VectorXd node(Index flat) const;
  std::array<int, 2> multi_index(Index flat) const; // d <= 2
  Index flat_index(int i0, int i1 = 0) const { return i0 + static_cast<Index>(i1) * nodes_along(0); }
  bool on_boundary(Index flat) const;

  /// Throws InvalidInput on inconsistent specs (d in {1, 2}, n_t >= 2, ...).
  void validate() const;
};

struct SolutionMeta {
  std::string fingerprint;
  std::string driver;
  double blowup_bound = 1e6;
  bool inner_picard = false;
  int inner_picard_max_iter = 5;
  double inner_picard_tol = 1e-10;
  std::size_t exp_clamps = 0;
  double stability_dt = 0.0; // dt below which the explicit nonlinearity is stable
  bool stability_ok = true;
};

/// Values of u = (a, Y^1..Y^I) and Du on every lattice node.
struct SolutionGrid {
  GridSpec grid;
  double horizon = 1.0;
  int components = 0;
  std::vector<MatrixXd> values;    // [time] nodes x J
  std::vector<MatrixXd> gradients; // [time] nodes x (J d); column j*d + k holds d_k u^j
  SolutionMeta meta;

  int dim() const { return grid.dim(); }
  double time(int n) const { return grid.time(n, horizon); }
  MatrixXd gradient(int n, Index node) const;
};

/// Central differences in the interior, second-order one-sided at the edges.
MatrixXd lattice_gradient(const GridSpec &grid, const MatrixXd &values);

/// Multilinear interpolation in (t, x) over a lattice; points outside the
/// spatial box are clamped onto it and flagged.
class GridInterpolator {
public:
  struct Weights {
    int n = 0;         // lower time index
    double theta = 0;  // weight of time index n + 1
    std::array<Index, 4> nodes{};
    std::array<double, 4> w{};
    int size = 0;
    bool extrapolated = false;
  };

  GridInterpolator(const GridSpec &grid, double horizon) : grid_(grid), horizon_(horizon) {}

  Weights locate(double t, const VectorXd &x) const;
  RowVectorXd interpolate(const std::vector<MatrixXd> &field, const Weights &w) const;
  double interpolate(const std::vector<MatrixXd> &field, const Weights &w, Index col) const;

private:
  GridSpec grid_;
  double horizon_;
};

} // namespace radner
