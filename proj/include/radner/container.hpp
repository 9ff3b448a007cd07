#pragma once

#include "radner/equilibrium.hpp"
#include "radner/grid.hpp"
#include "radner/json_io.hpp"

#include <string>
#include <vector>

namespace radner {

/// Binary solution file: the 8-byte magic "RADNSOL1", a little-endian uint64
/// header length, a JSON header, then for every time level the values
/// (nodes x J) and gradients (nodes x J d) as column-major doubles.
void write_solution(const std::string &path, const SolutionGrid &sol, const Json &extra = {});

struct LoadedSolution {
  SolutionGrid sol;
  Json header;
};

LoadedSolution read_solution(const std::string &path);

/// One row per node: x_1..x_d, a, Y^1..Y^I, then d_k u^j.
void write_csv_slice(const std::string &path, const SolutionGrid &sol, int time_index);

/// Rows: path id, t, xi_1..xi_d, A, then X^i, pi^i, c^i for every agent.
void write_paths_csv(const std::string &path, const std::vector<StrategyPath> &paths);

/// %.17g
std::string format_double(double v);

} // namespace radner
