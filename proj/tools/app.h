#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "lanepareto/nsga2.h"
#include "lanepareto/scenario.h"

namespace lanepareto::cli {

enum ExitCode {
  kOk = 0,
  kInternalError = 1,
  kConfigError = 2,
  kNoFeasible = 3,
  kTrackingFailure = 4,
};

struct OptimizeOptions {
  std::string scenario_path;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  std::optional<int> generations;
  std::optional<int> population;
};

struct SweepOptions {
  std::string scenario_path;
  std::string out_dir = "sweep";
  std::string vary;  // key=start:stop:step
  std::optional<std::uint64_t> seed;
  std::optional<int> generations;
  std::optional<int> population;
};

// Outcome of one optimisation run, as reported in sweep summaries.
struct RunSummary {
  int exit_code = kOk;
  std::string message;
  std::vector<Objectives> front;
  std::optional<Objectives> selected;
  std::optional<Objectives> baseline;
  std::vector<std::string> artifacts;
};

// Optimises `config` and writes every artifact into `out_dir`. Diagnostics go
// to `err`; the return value is an ExitCode.
RunSummary RunOptimize(const ScenarioConfig& config, const std::string& out_dir,
                       const std::string& command, std::ostream& err);

int CmdOptimize(const OptimizeOptions& options, std::ostream& out,
                std::ostream& err);
int CmdSweep(const SweepOptions& options, std::ostream& out, std::ostream& err);

struct VarySpec {
  std::string key;
  std::vector<double> values;
};
// Parses key=start:stop:step. Throws ConfigError naming --vary.
VarySpec ParseVary(const std::string& text);

int Main(int argc, char** argv);

}  // namespace lanepareto::cli
