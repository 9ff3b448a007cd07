#pragma once

#include "radner/config.hpp"
#include "radner/json_io.hpp"

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>

namespace radner {

inline constexpr const char *kVersion = "0.1.0";

enum ExitCode : int {
  kExitOk = 0,
  kExitCheckFailed = 1,
  kExitConfig = 2,
  kExitSolver = 3,
  kExitFingerprint = 4,
  kExitUnsupported = 5,
};

struct SolvedModel {
  StateDynamics dyn;
  Economy econ;
  SolutionGrid sol;
  std::string fingerprint;
};

/// Model built from the config without solving.
SolvedModel build_model(const RunConfig &cfg);
SolvedModel solve_model(const RunConfig &cfg);

/// Loads `path` when it exists (FingerprintMismatch if it belongs to another
/// config), otherwise solves in-process.
SolvedModel load_or_solve(const RunConfig &cfg, const std::string &path);

Json market_summary(const SolvedModel &m);

struct VerifyReport {
  Json doc;
  bool pass = false;
};

VerifyReport verify_model(const RunConfig &cfg, const SolvedModel &m);

/// Oracle solve and comparison with the lattice solution at (0, x0).
struct OracleReport {
  Json doc;
  bool pass = false;
};

OracleReport oracle_model(const RunConfig &cfg, const SolvedModel &m);

struct SimulateReport {
  Json doc;
  bool pass = false;
};

SimulateReport simulate_model(const RunConfig &cfg, const SolvedModel &m, int threads,
                              const std::string &paths_csv = {});

struct CommandOptions {
  std::optional<std::string> out_dir;
  int threads = 1;
  std::optional<std::uint64_t> seed;
};

/// solve | verify | oracle | simulate. Errors are reported as one JSON object
/// on `out`; the return value is the process exit code.
int run_command(const std::string &command, const std::string &config_path,
                const CommandOptions &options, std::ostream &out);

} // namespace radner
