#include "radner/config.hpp"

#include "radner/errors.hpp"
#include "radner/registry.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace radner {

namespace {

int line_of(const YAML::Node &n) { return n.Mark().is_null() ? 0 : n.Mark().line + 1; }

[[noreturn]] void fail(const YAML::Node &n, const std::string &what) {
  throw ConfigError(line_of(n), "line " + std::to_string(line_of(n)) + ": " + what);
}

/// Reads the keys of one mapping, rejecting unknown ones.
class Section {
public:
  Section(const YAML::Node &node, std::string name) : node_(node), name_(std::move(name)) {
    if (!node_.IsMap())
      fail(node_, "section '" + name_ + "' must be a mapping");
  }

  template <typename T> void get(const char *key, T &out) {
    seen_.insert(key);
    const YAML::Node v = node_[key];
    if (!v)
      return;
    try {
      out = v.as<T>();
    } catch (const YAML::Exception &) {
      fail(v, "bad value for '" + name_ + "." + key + "'");
    }
  }

  template <typename T> void get_list(const char *key, std::vector<T> &out) {
    seen_.insert(key);
    const YAML::Node v = node_[key];
    if (!v)
      return;
    if (v.IsScalar()) {
      T one{};
      try {
        one = v.as<T>();
      } catch (const YAML::Exception &) {
        fail(v, "bad value for '" + name_ + "." + key + "'");
      }
      out = {one};
      return;
    }
    if (!v.IsSequence())
      fail(v, "'" + name_ + "." + key + "' must be a list");
    out.clear();
    for (const auto &e : v) {
      try {
        out.push_back(e.as<T>());
      } catch (const YAML::Exception &) {
        fail(e, "bad list entry in '" + name_ + "." + key + "'");
      }
    }
  }

  const YAML::Node &node() const { return node_; }
  YAML::Node at(const char *key) const { return node_[key] ? node_[key] : node_; }

  void finish() const {
    for (const auto &kv : node_) {
      const auto k = kv.first.as<std::string>();
      if (!seen_.count(k))
        fail(kv.first, "unknown key '" + name_ + "." + k + "'");
    }
  }

private:
  YAML::Node node_;
  std::string name_;
  std::set<std::string> seen_;
};

template <typename Fn> void check_key(const YAML::Node &where, Fn fn) {
  try {
    fn();
  } catch (const InvalidInput &e) {
    fail(where, e.what());
  }
}

void validate(const RunConfig &c, const YAML::Node &root) {
  const auto sec = [&](const char *s) { return root[s] ? root[s] : root; };
  const YAML::Node state = sec("state");
  if (c.state.dim < 1 || c.state.dim > 2)
    fail(state, "state.dim must be 1 or 2");
  if (!(c.state.T > 0.0))
    fail(state, "state.T must be positive");
  if (!(c.state.K > 0.0))
    fail(state, "state.K must be positive");
  if (!c.state.x0.empty() && static_cast<int>(c.state.x0.size()) != c.state.dim)
    fail(state, "state.x0 must have dim entries");
  const auto field = [](const YAML::Node &n, const char *key) { return n[key] ? n[key] : n; };
  check_key(field(state, "drift"), [&] { make_drift(c.state.drift, c.state.dim); });
  check_key(field(state, "diffusion"), [&] { make_diffusion(c.state.diffusion, c.state.dim); });

  const YAML::Node agents = sec("agents");
  if (c.agents.empty())
    fail(agents, "at least one agent is required");
  double total = 0.0;
  for (std::size_t i = 0; i < c.agents.size(); ++i) {
    const YAML::Node a = agents.IsSequence() ? agents[i] : agents;
    const AgentConfig &ag = c.agents[i];
    if (!(ag.alpha > 0.0) || !std::isfinite(ag.alpha))
      fail(a, "agent risk aversion must be positive");
    if (!(ag.bound >= 0.0))
      fail(a, "agent endowment bound must be non-negative");
    check_key(field(a, "endowment"), [&] { make_endowment(ag.endowment, c.state.dim); });
    total += ag.pi0;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    std::ostringstream os;
    os << "initial holdings pi0 must sum to one, got " << total;
    fail(agents, os.str());
  }

  const YAML::Node grid = sec("grid");
  const auto d = static_cast<std::size_t>(c.state.dim);
  if (c.grid.x_min.size() != d || c.grid.x_max.size() != d || c.grid.x_steps.size() != d)
    fail(grid, "grid bounds and steps must have dim entries");
  check_key(grid, [&] { build_grid(c).validate(); });

  const YAML::Node scheme = sec("scheme");
  if (c.scheme.driver != "full" && c.scheme.driver != "truncated" &&
      c.scheme.driver != "intermediate")
    fail(scheme, "scheme.driver must be full, truncated or intermediate");
  if (c.scheme.driver != "full" && !(c.scheme.N > 0.0))
    fail(scheme, "scheme.N must be positive for truncated drivers");
  if (c.scheme.driver == "intermediate" && !(c.scheme.N0 > 0.0 && c.scheme.N0 <= c.scheme.N))
    fail(scheme, "scheme.N0 must satisfy 0 < N0 <= N");
  if (!(c.scheme.blowup_bound > 0.0))
    fail(scheme, "scheme.blowup_bound must be positive");

  const YAML::Node sim = sec("simulation");
  if (c.simulation.n_paths < 1 || c.simulation.n_steps < 1 || c.simulation.substeps < 1)
    fail(sim, "simulation counts must be positive");

  const YAML::Node orc = sec("oracle");
  if (!(c.oracle.N > 0.0) || c.oracle.beta < 0.0 || c.oracle.time_steps < 1 ||
      c.oracle.space_nodes < 2 || c.oracle.r_nodes < 1 || c.oracle.y_nodes < 3)
    fail(orc, "invalid oracle settings");
}

void emit_double(YAML::Emitter &e, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  e << buf;
}

template <typename T> void emit_list(YAML::Emitter &e, const std::vector<T> &v) {
  e << YAML::Flow << YAML::BeginSeq;
  for (const auto &x : v) {
    if constexpr (std::is_floating_point_v<T>)
      emit_double(e, x);
    else
      e << x;
  }
  e << YAML::EndSeq;
}

void emit_core(YAML::Emitter &e, const RunConfig &c) {
  e << YAML::Key << "state" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "dim" << YAML::Value << c.state.dim;
  e << YAML::Key << "drift" << YAML::Value << YAML::DoubleQuoted << c.state.drift;
  e << YAML::Key << "diffusion" << YAML::Value << YAML::DoubleQuoted << c.state.diffusion;
  e << YAML::Key << "K" << YAML::Value;
  emit_double(e, c.state.K);
  e << YAML::Key << "x0" << YAML::Value;
  emit_list(e, c.state.x0.empty() ? std::vector<double>(static_cast<std::size_t>(c.state.dim), 0.0)
                                  : c.state.x0);
  e << YAML::Key << "T" << YAML::Value;
  emit_double(e, c.state.T);
  e << YAML::EndMap;

  e << YAML::Key << "agents" << YAML::Value << YAML::BeginSeq;
  for (const auto &a : c.agents) {
    e << YAML::BeginMap;
    e << YAML::Key << "alpha" << YAML::Value;
    emit_double(e, a.alpha);
    e << YAML::Key << "endowment" << YAML::Value << YAML::DoubleQuoted << a.endowment;
    e << YAML::Key << "pi0" << YAML::Value;
    emit_double(e, a.pi0);
    e << YAML::Key << "bound" << YAML::Value;
    emit_double(e, a.bound);
    e << YAML::EndMap;
  }
  e << YAML::EndSeq;

  e << YAML::Key << "grid" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "t_steps" << YAML::Value << c.grid.t_steps;
  e << YAML::Key << "x_min" << YAML::Value;
  emit_list(e, c.grid.x_min);
  e << YAML::Key << "x_max" << YAML::Value;
  emit_list(e, c.grid.x_max);
  e << YAML::Key << "x_steps" << YAML::Value;
  emit_list(e, c.grid.x_steps);
  e << YAML::EndMap;

  e << YAML::Key << "scheme" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "driver" << YAML::Value << c.scheme.driver;
  e << YAML::Key << "N" << YAML::Value;
  emit_double(e, c.scheme.N);
  e << YAML::Key << "N0" << YAML::Value;
  emit_double(e, c.scheme.N0);
  e << YAML::Key << "blowup_bound" << YAML::Value;
  emit_double(e, c.scheme.blowup_bound);
  e << YAML::Key << "inner_picard" << YAML::Value << c.scheme.inner_picard;
  e << YAML::Key << "inner_picard_max_iter" << YAML::Value << c.scheme.inner_picard_max_iter;
  e << YAML::Key << "inner_picard_tol" << YAML::Value;
  emit_double(e, c.scheme.inner_picard_tol);
  e << YAML::EndMap;
}

void emit_rest(YAML::Emitter &e, const RunConfig &c) {
  const auto &s = c.simulation;
  e << YAML::Key << "simulation" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "n_paths" << YAML::Value << s.n_paths;
  e << YAML::Key << "n_steps" << YAML::Value << s.n_steps;
  e << YAML::Key << "seed" << YAML::Value << s.seed;
  e << YAML::Key << "substeps" << YAML::Value << s.substeps;
  e << YAML::Key << "keep_paths" << YAML::Value << s.keep_paths;
  e << YAML::Key << "optimality_paths" << YAML::Value << s.optimality_paths;
  e << YAML::Key << "clearing_tol" << YAML::Value;
  emit_double(e, s.clearing_tol);
  e << YAML::EndMap;

  const auto &o = c.oracle;
  e << YAML::Key << "oracle" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "N" << YAML::Value;
  emit_double(e, o.N);
  e << YAML::Key << "beta" << YAML::Value;
  emit_double(e, o.beta);
  e << YAML::Key << "time_steps" << YAML::Value << o.time_steps;
  e << YAML::Key << "space_nodes" << YAML::Value << o.space_nodes;
  e << YAML::Key << "window" << YAML::Value;
  emit_double(e, o.window);
  e << YAML::Key << "r_nodes" << YAML::Value << o.r_nodes;
  e << YAML::Key << "y_nodes" << YAML::Value << o.y_nodes;
  e << YAML::Key << "y_range" << YAML::Value;
  emit_double(e, o.y_range);
  e << YAML::Key << "tol" << YAML::Value;
  emit_double(e, o.tol);
  e << YAML::Key << "max_iter" << YAML::Value << o.max_iter;
  e << YAML::Key << "contraction_threshold" << YAML::Value;
  emit_double(e, o.contraction_threshold);
  e << YAML::Key << "agreement_tol" << YAML::Value;
  emit_double(e, o.agreement_tol);
  e << YAML::EndMap;

  const auto &v = c.verify;
  e << YAML::Key << "verify" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "terminal_tol" << YAML::Value;
  emit_double(e, v.terminal_tol);
  e << YAML::Key << "clearing_factor" << YAML::Value;
  emit_double(e, v.clearing_factor);
  e << YAML::Key << "lower_bound_tol" << YAML::Value;
  emit_double(e, v.lower_bound_tol);
  e << YAML::Key << "closed_form_tol" << YAML::Value;
  emit_double(e, v.closed_form_tol);
  e << YAML::Key << "bf_probes" << YAML::Value << v.bf_probes;
  e << YAML::Key << "probe_seed" << YAML::Value << v.probe_seed;
  e << YAML::Key << "truncation_N" << YAML::Value;
  emit_double(e, v.truncation_N);
  e << YAML::Key << "truncation_tol" << YAML::Value;
  emit_double(e, v.truncation_tol);
  e << YAML::EndMap;

  const auto &out = c.output;
  e << YAML::Key << "output" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "directory" << YAML::Value << YAML::DoubleQuoted << out.directory;
  e << YAML::Key << "csv_times" << YAML::Value;
  emit_list(e, out.csv_times);
  e << YAML::Key << "container" << YAML::Value << out.container;
  e << YAML::Key << "csv" << YAML::Value << out.csv;
  e << YAML::EndMap;
}

} // namespace

RunConfig parse_config(const std::string &text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException &e) {
    throw ConfigError(e.mark.line + 1,
                      "line " + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  if (!root.IsMap())
    throw ConfigError(1, "line 1: config must be a mapping of sections");

  RunConfig c;
  const std::set<std::string> known{"state",  "agents", "grid",   "scheme",
                                    "simulation", "oracle", "verify", "output"};
  for (const auto &kv : root) {
    const auto k = kv.first.as<std::string>();
    if (!known.count(k))
      fail(kv.first, "unknown section '" + k + "'");
  }
  if (!root["state"])
    throw ConfigError(1, "line 1: missing section 'state'");
  if (!root["agents"])
    throw ConfigError(1, "line 1: missing section 'agents'");

  {
    Section s(root["state"], "state");
    s.get("dim", c.state.dim);
    s.get("drift", c.state.drift);
    s.get("diffusion", c.state.diffusion);
    s.get("K", c.state.K);
    s.get_list("x0", c.state.x0);
    s.get("T", c.state.T);
    s.finish();
  }
  {
    const YAML::Node agents = root["agents"];
    if (!agents.IsSequence())
      fail(agents, "'agents' must be a list of mappings");
    for (const auto &a : agents) {
      Section s(a, "agents[]");
      AgentConfig ag;
      s.get("alpha", ag.alpha);
      s.get("endowment", ag.endowment);
      s.get("pi0", ag.pi0);
      s.get("bound", ag.bound);
      s.finish();
      c.agents.push_back(ag);
    }
  }
  if (root["grid"]) {
    Section s(root["grid"], "grid");
    s.get("t_steps", c.grid.t_steps);
    s.get_list("x_min", c.grid.x_min);
    s.get_list("x_max", c.grid.x_max);
    s.get_list("x_steps", c.grid.x_steps);
    s.finish();
  }
  if (root["scheme"]) {
    Section s(root["scheme"], "scheme");
    s.get("driver", c.scheme.driver);
    s.get("N", c.scheme.N);
    s.get("N0", c.scheme.N0);
    s.get("blowup_bound", c.scheme.blowup_bound);
    s.get("inner_picard", c.scheme.inner_picard);
    s.get("inner_picard_max_iter", c.scheme.inner_picard_max_iter);
    s.get("inner_picard_tol", c.scheme.inner_picard_tol);
    s.finish();
  }
  if (root["simulation"]) {
    Section s(root["simulation"], "simulation");
    s.get("n_paths", c.simulation.n_paths);
    s.get("n_steps", c.simulation.n_steps);
    s.get("seed", c.simulation.seed);
    s.get("substeps", c.simulation.substeps);
    s.get("keep_paths", c.simulation.keep_paths);
    s.get("optimality_paths", c.simulation.optimality_paths);
    s.get("clearing_tol", c.simulation.clearing_tol);
    s.finish();
  }
  if (root["oracle"]) {
    Section s(root["oracle"], "oracle");
    s.get("N", c.oracle.N);
    s.get("beta", c.oracle.beta);
    s.get("time_steps", c.oracle.time_steps);
    s.get("space_nodes", c.oracle.space_nodes);
    s.get("window", c.oracle.window);
    s.get("r_nodes", c.oracle.r_nodes);
    s.get("y_nodes", c.oracle.y_nodes);
    s.get("y_range", c.oracle.y_range);
    s.get("tol", c.oracle.tol);
    s.get("max_iter", c.oracle.max_iter);
    s.get("contraction_threshold", c.oracle.contraction_threshold);
    s.get("agreement_tol", c.oracle.agreement_tol);
    s.finish();
  }
  if (root["verify"]) {
    Section s(root["verify"], "verify");
    s.get("terminal_tol", c.verify.terminal_tol);
    s.get("clearing_factor", c.verify.clearing_factor);
    s.get("lower_bound_tol", c.verify.lower_bound_tol);
    s.get("closed_form_tol", c.verify.closed_form_tol);
    s.get("bf_probes", c.verify.bf_probes);
    s.get("probe_seed", c.verify.probe_seed);
    s.get("truncation_N", c.verify.truncation_N);
    s.get("truncation_tol", c.verify.truncation_tol);
    s.finish();
  }
  if (root["output"]) {
    Section s(root["output"], "output");
    s.get("directory", c.output.directory);
    s.get_list("csv_times", c.output.csv_times);
    s.get("container", c.output.container);
    s.get("csv", c.output.csv);
    s.finish();
  }
  if (c.state.x0.empty())
    c.state.x0.assign(static_cast<std::size_t>(std::max(c.state.dim, 0)), 0.0);
  validate(c, root);
  return c;
}

RunConfig load_config(const std::string &path) {
  std::ifstream f(path, std::ios::binary);
  if (!f)
    throw ConfigError(0, "cannot read config " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const RunConfig &cfg) {
  YAML::Emitter e;
  e << YAML::BeginMap;
  emit_core(e, cfg);
  emit_rest(e, cfg);
  e << YAML::EndMap;
  return std::string(e.c_str()) + "\n";
}

std::string config_fingerprint(const RunConfig &cfg) {
  YAML::Emitter e;
  e << YAML::BeginMap;
  emit_core(e, cfg);
  e << YAML::EndMap;
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char ch : std::string(e.c_str())) {
    h ^= static_cast<unsigned char>(ch);
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

StateDynamics build_dynamics(const RunConfig &cfg) {
  VectorXd x0(cfg.state.dim);
  for (int k = 0; k < cfg.state.dim; ++k)
    x0(k) = cfg.state.x0.empty() ? 0.0 : cfg.state.x0[static_cast<std::size_t>(k)];
  return make_state_dynamics(cfg.state.drift, cfg.state.diffusion, cfg.state.dim, cfg.state.K, x0);
}

Economy build_economy(const RunConfig &cfg, const StateDynamics &dyn) {
  std::vector<AgentSpec> agents;
  for (const auto &a : cfg.agents) {
    AgentSpec s;
    s.risk_aversion = a.alpha;
    s.endowment = make_endowment(a.endowment, cfg.state.dim);
    s.initial_holding = a.pi0;
    s.endowment_bound = a.bound;
    agents.push_back(std::move(s));
  }
  return make_economy(std::move(agents), cfg.state.T, dyn);
}

GridSpec build_grid(const RunConfig &cfg) {
  GridSpec g;
  g.t_steps = cfg.grid.t_steps;
  g.x_min = Eigen::Map<const VectorXd>(cfg.grid.x_min.data(),
                                       static_cast<Index>(cfg.grid.x_min.size()));
  g.x_max = Eigen::Map<const VectorXd>(cfg.grid.x_max.data(),
                                       static_cast<Index>(cfg.grid.x_max.size()));
  g.x_steps = cfg.grid.x_steps;
  return g;
}

SchemeParams build_scheme(const RunConfig &cfg) {
  SchemeParams s;
  s.blowup_bound = cfg.scheme.blowup_bound;
  s.inner_picard = cfg.scheme.inner_picard;
  s.inner_picard_max_iter = cfg.scheme.inner_picard_max_iter;
  s.inner_picard_tol = cfg.scheme.inner_picard_tol;
  return s;
}

Driver build_driver(const RunConfig &cfg, const Economy &econ) {
  if (cfg.scheme.driver == "truncated")
    return Driver::truncated(econ, cfg.scheme.N);
  if (cfg.scheme.driver == "intermediate")
    return Driver::intermediate(econ, cfg.scheme.N, cfg.scheme.N0);
  return Driver::full(econ);
}

EnsembleSpec build_ensemble(const RunConfig &cfg) {
  EnsembleSpec e;
  e.n_paths = cfg.simulation.n_paths;
  e.n_steps = cfg.simulation.n_steps;
  e.seed = cfg.simulation.seed;
  e.substeps = cfg.simulation.substeps;
  return e;
}

KernelSpec build_kernel(const RunConfig &cfg, double lambda) {
  KernelSpec k;
  k.lambda = lambda;
  k.beta = cfg.oracle.beta;
  k.quad.time_steps = cfg.oracle.time_steps;
  k.quad.space_nodes = cfg.oracle.space_nodes;
  k.quad.window = cfg.oracle.window;
  k.quad.r_nodes = cfg.oracle.r_nodes;
  k.quad.y_nodes = cfg.oracle.y_nodes;
  k.quad.y_range = cfg.oracle.y_range;
  return k;
}

PicardOptions build_picard_options(const RunConfig &cfg) {
  PicardOptions o;
  o.tol = cfg.oracle.tol;
  o.max_iter = cfg.oracle.max_iter;
  o.contraction_threshold = cfg.oracle.contraction_threshold;
  return o;
}

} // namespace radner
