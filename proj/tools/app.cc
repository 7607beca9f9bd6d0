#include "app.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "lanepareto/analysis.h"
#include "lanepareto/errors.h"
#include "lanepareto/sim_engine.h"

namespace lanepareto::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

constexpr int kManifestVersion = 1;

// Writes through a temporary file and renames, so a run directory never holds
// a half-written artifact.
void WriteFile(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw Error("cannot write " + tmp.string());
    out << content;
    if (!out) throw Error("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string UtcNow() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

ordered_json CandidateJson(const LcCandidate& c) {
  return {{"t_wait", c.t_wait},
          {"duration", c.duration},
          {"x_disp", c.x_disp},
          {"v_end", c.v_end},
          {"a_end", c.a_end}};
}

ordered_json ObjectivesJson(const Objectives& o) {
  return {{"J_LC", o[0]}, {"J_TF", o[1]}, {"total", o[0] + o[1]}};
}

std::string TraceCsv(const SimulationTrace& trace) {
  std::ostringstream out;
  WriteTraceCsv(trace, out);
  return out.str();
}

// Sorts by J_LC (then J_TF) so the written front reads left to right.
void SortFront(ParetoFront& front) {
  std::stable_sort(front.members.begin(), front.members.end(),
                   [](const Individual& a, const Individual& b) {
                     return a.eval.objectives < b.eval.objectives;
                   });
  front.selected = SelectSolution(front.members);
}

ScenarioConfig LoadWithOverrides(const std::string& path,
                                 std::optional<std::uint64_t> seed,
                                 std::optional<int> generations,
                                 std::optional<int> population) {
  ScenarioConfig config = LoadScenario(path);
  if (seed) config.nsga.seed = *seed;
  if (generations) config.nsga.generations = *generations;
  if (population) config.nsga.population = *population;
  Validate(config);
  return config;
}

std::string FormatValue(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

}  // namespace

RunSummary RunOptimize(const ScenarioConfig& input, const std::string& out_dir,
                       const std::string& command, std::ostream& err) {
  RunSummary summary;
  ScenarioConfig config = input;
  try {
    Validate(config);
  } catch (const ConfigError& e) {
    summary.exit_code = kConfigError;
    summary.message = std::string("config error: ") + e.what();
    err << summary.message << "\n";
    return summary;
  }
  for (const std::string& w : config.warnings) err << "warning: " << w << "\n";

  const fs::path dir(out_dir);
  fs::create_directories(dir);
  auto emit = [&](const std::string& name, const std::string& content) {
    WriteFile(dir / name, content);
    summary.artifacts.push_back(name);
  };

  ordered_json manifest;
  manifest["manifest_version"] = kManifestVersion;
  manifest["tool"] = "lanepareto";
  manifest["command"] = command;
  manifest["seed"] = config.nsga.seed;
  manifest["created_utc"] = UtcNow();
  manifest["modes"] = {{"ideal", true}, {"tracked", true}};
  manifest["scenario"] = nlohmann::json::parse(ScenarioToJson(config));
  auto write_manifest = [&]() {
    manifest["status"] = {{"exit_code", summary.exit_code},
                          {"message", summary.message}};
    manifest["artifacts"] = summary.artifacts;
    WriteFile(dir / "manifest.json", manifest.dump(2) + "\n");
  };

  FrozenScenario scenario;
  try {
    scenario = FreezeScenario(config, RunWarmup(SpawnPlatoon(config), config));
  } catch (const WarmupError& e) {
    summary.exit_code = kConfigError;
    summary.message = std::string("warm-up failed: ") + e.what();
    err << summary.message << "\n";
    write_manifest();
    return summary;
  }

  const DecisionSpace space = LcDecisionSpace(config.bounds, config.decision);
  ParetoFront front = Evolve(MakeEvaluator(scenario), space, config.nsga);
  if (front.members.empty()) {
    summary.exit_code = kNoFeasible;
    std::ostringstream msg;
    msg << "no feasible candidate found after " << front.evaluations
        << " evaluations; best violation " << front.best_violation;
    summary.message = msg.str();
    err << summary.message << "\n";
    write_manifest();
    return summary;
  }
  SortFront(front);
  const std::size_t selected = front.selected;
  const std::size_t baseline = ExistingAlgorithmBaseline(front);
  for (const Individual& m : front.members) {
    summary.front.push_back(m.eval.objectives);
  }
  summary.selected = front.members[selected].eval.objectives;
  summary.baseline = front.members[baseline].eval.objectives;
  emit("front.json", FrontToJson(front.members, space, selected, baseline));

  const LcCandidate chosen = ToCandidate(space.Values(front.members[selected].genome));
  const LcCandidate leftmost = ToCandidate(space.Values(front.members[baseline].genome));
  manifest["selected"] = {{"candidate", CandidateJson(chosen)},
                          {"objectives", ObjectivesJson(*summary.selected)}};
  manifest["baseline"] = {{"candidate", CandidateJson(leftmost)},
                          {"objectives", ObjectivesJson(*summary.baseline)}};
  manifest["front_size"] = front.members.size();
  manifest["evaluations"] = front.evaluations;

  const CandidateOutcome ideal = RunFinal(chosen, scenario, ExecutionMode::kIdeal);
  emit("trace_ideal.csv", TraceCsv(ideal.trace));
  emit("costs.json", CostBreakdownToJson(ideal.costs));

  const EdieRegion region = RegionFor(ideal.trace, config.edie_region);
  const auto rows = PerVehicleRegionTable(ideal.trace, region);
  emit("edie.json", EdieToJson(ComputeEdieMetrics(ideal.trace, region), region) + "\n");
  emit("region_table.csv", RegionTableToCsv(rows));
  const HeatmapGrid grid = BuildHeatmap(ideal.trace, config.heatmap.dx, config.heatmap.dt);
  emit("heatmap.csv", HeatmapToCsv(grid));
  emit("plot.svg", RenderSvg(ideal.trace, grid, region));

  try {
    const CandidateOutcome tracked =
        RunFinal(chosen, scenario, ExecutionMode::kTracked);
    emit("trace_tracked.csv", TraceCsv(tracked.trace));
    emit("costs_tracked.json", CostBreakdownToJson(tracked.costs));
    const auto& lc = tracked.trace.ticks[tracked.trace.k_end][tracked.trace.lc_index];
    manifest["tracked"] = {
        {"J_LC", tracked.costs.j_lc},
        {"J_TF", tracked.costs.j_tf},
        {"lateral_error_at_t_end", lc.y - config.lane_width}};
  } catch (const TrackingFailure& e) {
    summary.exit_code = kTrackingFailure;
    summary.message = std::string("tracking failure at tick ") +
                      std::to_string(e.tick()) + ": " + e.what();
    err << summary.message << "\n";
  } catch (const InfeasibleError& e) {
    summary.exit_code = kTrackingFailure;
    summary.message = std::string("tracked replay infeasible: ") + e.what();
    err << summary.message << "\n";
  }
  write_manifest();
  return summary;
}

int CmdOptimize(const OptimizeOptions& o, std::ostream& out, std::ostream& err) {
  ScenarioConfig config;
  try {
    config = LoadWithOverrides(o.scenario_path, o.seed, o.generations, o.population);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  }
  const RunSummary s = RunOptimize(config, o.out_dir, "optimize", err);
  if (s.exit_code == kOk) {
    out << "front: " << s.front.size() << " points; selected J_LC="
        << (*s.selected)[0] << " J_TF=" << (*s.selected)[1]
        << "; baseline J_LC=" << (*s.baseline)[0] << " J_TF=" << (*s.baseline)[1]
        << "\nartifacts in " << o.out_dir << "\n";
  }
  return s.exit_code;
}

VarySpec ParseVary(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos) {
    throw ConfigError("--vary", "expected key=start:stop:step");
  }
  VarySpec spec;
  spec.key = text.substr(0, eq);
  if (spec.key != "lc_initial_speed" && spec.key != "lc_initial_gap" &&
      spec.key != "penetration_ratio") {
    throw ConfigError("--vary", "unsupported key '" + spec.key +
                                    "' (lc_initial_speed, lc_initial_gap, "
                                    "penetration_ratio)");
  }
  double start = 0.0, stop = 0.0, step = 0.0;
  char tail = 0;
  const std::string range = text.substr(eq + 1);
  const int parsed = std::sscanf(range.c_str(), "%lf:%lf:%lf%c", &start, &stop,
                                 &step, &tail);
  if (parsed == 1) {
    stop = start;
    step = 1.0;
  } else if (parsed != 3) {
    throw ConfigError("--vary", "expected key=start:stop:step");
  }
  if (!(step > 0.0) || stop < start) {
    throw ConfigError("--vary", "need step > 0 and stop >= start");
  }
  const int count = static_cast<int>(std::floor((stop - start) / step + 1e-9)) + 1;
  if (count > 1000) throw ConfigError("--vary", "too many grid values");
  for (int i = 0; i < count; ++i) spec.values.push_back(start + i * step);
  return spec;
}

int CmdSweep(const SweepOptions& o, std::ostream& out, std::ostream& err) {
  ScenarioConfig base;
  VarySpec vary;
  try {
    vary = ParseVary(o.vary);
    base = LoadWithOverrides(o.scenario_path, o.seed, o.generations, o.population);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  }

  const fs::path root(o.out_dir);
  fs::create_directories(root);
  ordered_json runs = ordered_json::array();
  std::ostringstream table;
  table << "value,exit_code,front_size,selected_J_LC,selected_J_TF,selected_total\n";
  int status = kOk;
  std::vector<double> totals;
  for (double value : vary.values) {
    ScenarioConfig config = base;
    OverrideScenarioValue(config, vary.key, value);
    const std::string sub = vary.key + "_" + FormatValue(value);
    const RunSummary s = RunOptimize(config, (root / sub).string(), "sweep", err);
    ordered_json run = {{"value", value}, {"dir", sub}, {"exit_code", s.exit_code}};
    if (!s.message.empty()) run["message"] = s.message;
    ordered_json pts = ordered_json::array();
    for (const Objectives& p : s.front) pts.push_back({p[0], p[1]});
    run["front"] = pts;
    char line[160];
    if (s.selected) {
      run["selected"] = ObjectivesJson(*s.selected);
      run["baseline"] = ObjectivesJson(*s.baseline);
      totals.push_back((*s.selected)[0] + (*s.selected)[1]);
      std::snprintf(line, sizeof(line), "%g,%d,%zu,%.6f,%.6f,%.6f\n", value,
                    s.exit_code, s.front.size(), (*s.selected)[0],
                    (*s.selected)[1], totals.back());
    } else {
      std::snprintf(line, sizeof(line), "%g,%d,0,,,\n", value, s.exit_code);
    }
    table << line;
    runs.push_back(std::move(run));
    if (s.exit_code != kOk && status == kOk) status = s.exit_code;
  }

  bool non_increasing = totals.size() == vary.values.size();
  for (std::size_t i = 1; non_increasing && i < totals.size(); ++i) {
    non_increasing = totals[i] <= totals[i - 1];
  }
  ordered_json doc;
  doc["key"] = vary.key;
  doc["values"] = vary.values;
  doc["seed"] = base.nsga.seed;
  doc["runs"] = runs;
  doc["trend"] = {{"selected_total_non_increasing", non_increasing}};
  WriteFile(root / "sweep.json", doc.dump(2) + "\n");
  WriteFile(root / "summary.csv", table.str());
  out << table.str() << "selected total non-increasing in " << vary.key << ": "
      << (non_increasing ? "yes" : "no") << "\n";
  return status;
}

int Main(int argc, char** argv) {
  CLI::App app{"Lane-change Pareto optimiser for mixed traffic"};
  app.require_subcommand(1);

  OptimizeOptions opt;
  CLI::App* optimize = app.add_subcommand("optimize", "Optimise one scenario");
  optimize->add_option("--scenario", opt.scenario_path, "Scenario or manifest JSON")
      ->required();
  optimize->add_option("--out", opt.out_dir, "Output directory");
  optimize->add_option("--seed", opt.seed, "Random seed");
  optimize->add_option("--generations", opt.generations, "NSGA-II generations");
  optimize->add_option("--population", opt.population, "NSGA-II population size");

  SweepOptions sw;
  CLI::App* sweep = app.add_subcommand("sweep", "Sensitivity sweep over one key");
  sweep->add_option("--scenario", sw.scenario_path, "Scenario or manifest JSON")
      ->required();
  sweep->add_option("--vary", sw.vary, "key=start:stop:step")->required();
  sweep->add_option("--out", sw.out_dir, "Output directory");
  sweep->add_option("--seed", sw.seed, "Random seed");
  sweep->add_option("--generations", sw.generations, "NSGA-II generations");
  sweep->add_option("--population", sw.population, "NSGA-II population size");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*optimize) return CmdOptimize(opt, std::cout, std::cerr);
    return CmdSweep(sw, std::cout, std::cerr);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInternalError;
  }
}

}  // namespace lanepareto::cli
