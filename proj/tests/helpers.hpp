#pragma once

#include "radner/drivers.hpp"
#include "radner/grid.hpp"
#include "radner/model.hpp"
#include "radner/registry.hpp"

#include <string>
#include <utility>
#include <vector>

namespace radner::testing {

struct AgentDef {
  double alpha;
  std::string endowment;
  double pi0;
  double bound = 1.0;
};

inline StateDynamics brownian(int dim = 1, const std::string &sigma = "constant:1") {
  return make_state_dynamics("zero", sigma, dim, 1.0, VectorXd::Zero(dim));
}

inline Economy economy(const std::vector<AgentDef> &defs, const StateDynamics &dyn,
                       double T = 1.0) {
  std::vector<AgentSpec> agents;
  for (const auto &d : defs) {
    AgentSpec a;
    a.risk_aversion = d.alpha;
    a.endowment = make_endowment(d.endowment, dyn.dim);
    a.initial_holding = d.pi0;
    a.endowment_bound = d.bound;
    agents.push_back(std::move(a));
  }
  return make_economy(std::move(agents), T, dyn);
}

inline GridSpec grid1d(int t_steps, int x_steps, double half_width = 4.0) {
  GridSpec g;
  g.t_steps = t_steps;
  g.x_min = VectorXd::Constant(1, -half_width);
  g.x_max = VectorXd::Constant(1, half_width);
  g.x_steps = {x_steps};
  return g;
}

inline DriverInput input(const VectorXd &y, const MatrixXd &z, double t = 0.0,
                         VectorXd x = VectorXd::Zero(1)) {
  DriverInput in;
  in.t = t;
  in.x = std::move(x);
  in.y = y;
  in.z = z;
  return in;
}

} // namespace radner::testing
