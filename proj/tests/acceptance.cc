// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "app.h"
#include "lanepareto/analysis.h"
#include "lanepareto/cf_models.h"
#include "lanepareto/collision.h"
#include "lanepareto/nsga2.h"
#include "lanepareto/scenario.h"
#include "lanepareto/sim_engine.h"
#include "lanepareto/tracking.h"
#include "lanepareto/trajectory.h"
#include "oracles.h"

namespace lanepareto {
namespace {

namespace fs = std::filesystem;

const char kBaseline[] = LANEPARETO_SOURCE_DIR "/scenarios/baseline.json";

struct Outcome {
  bool pass = true;
  std::string detail;
  // Sub-check labels that failed; "" for an unlabelled check.
  std::vector<std::string> failed_parts;
};

// Appends a formatted note and folds `ok` into the verdict. A note opening
// with "(x)" is recorded as sub-check x.
void Note(Outcome& o, bool ok, const char* fmt, ...)
    __attribute__((format(printf, 3, 4)));
void Note(Outcome& o, bool ok, const char* fmt, ...) {
  char buf[512];
  va_list args;
  va_start(args, fmt);
  std::vsnprintf(buf, sizeof(buf), fmt, args);
  va_end(args);
  if (!o.detail.empty()) o.detail += "; ";
  o.detail += buf;
  if (!ok) {
    o.detail += " [fails]";
    char part[8] = "";
    std::sscanf(buf, "(%7[a-z])", part);
    o.failed_parts.push_back(part);
  }
  o.pass = o.pass && ok;
}

// Shared by the baseline-scenario, tracking and determinism criteria.
struct BaselineRun {
  ScenarioConfig config;
  FrozenScenario scenario;
  ParetoFront front;
  LcCandidate selected;
  double seconds = 0.0;
};
BaselineRun* baseline_run = nullptr;

Outcome EdieReproduction() {
  Outcome o;
  const EdieMetrics a = EdieFromTotals(3061.68, 126.90, 7500.0);
  const EdieMetrics b = EdieFromTotals(3073.93, 127.00, 7500.0);
  Note(o, std::abs(a.flow - 1469.61) <= 0.01 && std::abs(a.speed - 24.13) <= 0.01,
       "q=%.2f veh/h v=%.2f m/s (table 1469.61, 24.13)", a.flow, a.speed);
  Note(o, std::abs(b.flow - 1475.49) <= 0.01 && std::abs(b.speed - 24.20) <= 0.01,
       "q=%.2f veh/h v=%.2f m/s (table 1475.49, 24.20)", b.flow, b.speed);
  return o;
}

Outcome QuinticCorrectness() {
  Outcome o;
  std::mt19937_64 gen(101);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const KinematicBounds kb;
  const double lane = 3.5;
  double worst = 0.0, worst_mid = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const AxisState start{1e4 * u(gen), kb.v_min + (kb.v_max - kb.v_min) * u(gen),
                          -2.0 + 4.0 * u(gen)};
    const double duration = kb.t_lc_min + (kb.t_lc_max - kb.t_lc_min) * u(gen);
    const LongitudinalEnd end{kb.x_lc_min + (kb.x_lc_max - kb.x_lc_min) * u(gen),
                              kb.v_min + (kb.v_max - kb.v_min) * u(gen),
                              -2.0 + 4.0 * u(gen)};
    const double t_start = 300.0 + 10.0 * u(gen);
    const QuinticPair q = SolveQuintic(start, end, t_start, duration, lane);
    const auto x0 = EvaluateQuintic(q.a, 0.0);
    const auto x1 = EvaluateQuintic(q.a, duration);
    const auto y0 = EvaluateQuintic(q.b, 0.0);
    const auto y1 = EvaluateQuintic(q.b, duration);
    const double residuals[12] = {
        x0[0] - start.position, x0[1] - start.speed, x0[2] - start.accel,
        x1[0] - (start.position + end.displacement), x1[1] - end.speed,
        x1[2] - end.accel, y0[0], y0[1], y0[2], y1[0] - lane, y1[1], y1[2]};
    for (double r : residuals) worst = std::max(worst, std::abs(r));
    const double mid = EvaluateQuintic(q.b, 0.5 * duration)[0];
    worst_mid = std::max(worst_mid, std::abs(mid - 0.5 * lane));
  }
  Note(o, worst <= 1e-9, "max boundary residual %.2e", worst);
  Note(o, worst_mid <= 1e-9, "max |y(T/2) - D0/2| %.2e", worst_mid);
  return o;
}

Outcome DominanceOracle() {
  Outcome o;
  std::mt19937_64 gen(202);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int mismatches = 0, max_size = 0, infeasible = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + static_cast<int>(u(gen) * 200);
    max_size = std::max(max_size, n);
    std::vector<Evaluation> pop;
    // Alternate between coarse (tie-heavy) and continuous objectives.
    const double grain = trial % 2 == 0 ? 12.0 : 0.0;
    for (int i = 0; i < n; ++i) {
      Evaluation e;
      for (double& f : e.objectives) {
        f = grain > 0.0 ? std::floor(u(gen) * grain) : u(gen);
      }
      if (u(gen) < 0.25) {
        e.violation = grain > 0.0 ? 0.5 * (1 + std::floor(u(gen) * 4)) : u(gen);
        ++infeasible;
      }
      pop.push_back(e);
    }
    if (FastNondominatedSort(pop) != oracle::PeelRanks(pop)) ++mismatches;
  }
  Note(o, mismatches == 0, "%d/200 populations differ (sizes up to %d, %d infeasible members)",
       mismatches, max_size, infeasible);
  return o;
}

Outcome AnalyticFront() {
  Outcome o;
  const int n = 30;
  const DecisionSpace space(std::vector<GeneRange>(n, {0.0, 1.0}), 1e-4);
  NsgaParams params;
  params.population = 100;
  params.generations = 250;
  params.seed = 2024;
  const ParetoFront front = Evolve(
      [](std::span<const double> x) { return Evaluation{oracle::Zdt1(x), 0.0}; },
      space, params);
  bool mutual = true;
  for (const auto& a : front.members) {
    for (const auto& b : front.members) {
      if (ConstraintDominates(a.eval, b.eval)) mutual = false;
    }
  }
  double deviation = 0.0;
  for (const auto& m : front.members) {
    const auto& f = m.eval.objectives;
    deviation += std::abs(f[1] - (1.0 - std::sqrt(f[0])));
  }
  deviation /= std::max<std::size_t>(1, front.members.size());
  Note(o, !front.members.empty() && mutual, "%zu points, mutually non-dominated: %s",
       front.members.size(), mutual ? "yes" : "no");
  Note(o, deviation <= 0.05, "mean |f2 - (1 - sqrt f1)| = %.4f (limit 0.05)", deviation);
  return o;
}

Outcome BaselineScenarioStructure() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  BaselineRun& run = *baseline_run;
  run.config = LoadScenario(kBaseline);
  run.scenario = PrepareScenario(run.config);
  const DecisionSpace space = LcDecisionSpace(run.config.bounds, run.config.decision);
  run.front = Evolve(MakeEvaluator(run.scenario), space, run.config.nsga);
  if (run.front.empty()) {
    Note(o, false, "no feasible candidate (best violation %.4g)", run.front.best_violation);
    return o;
  }
  const auto& members = run.front.members;
  auto obj = [&](std::size_t i) { return members[i].eval.objectives; };
  const std::size_t sel = run.front.selected;
  const std::size_t base = ExistingAlgorithmBaseline(run.front);
  run.selected = ToCandidate(space.Values(members[sel].genome));

  double best = INFINITY;
  for (std::size_t i = 0; i < members.size(); ++i) {
    best = std::min(best, std::hypot(obj(i)[0], obj(i)[1]));
  }
  Note(o, std::hypot(obj(sel)[0], obj(sel)[1]) == best,
       "(a) selected (%.2f, %.2f) at distance %.2f, exhaustive minimum %.2f over %zu points",
       obj(sel)[0], obj(sel)[1], std::hypot(obj(sel)[0], obj(sel)[1]), best,
       members.size());
  Note(o, obj(base)[0] <= obj(sel)[0] && obj(base)[1] >= obj(sel)[1],
       "(b) baseline (%.2f, %.2f)%s", obj(base)[0], obj(base)[1],
       base == sel ? " coincides with the selected point" : "");
  const double sel_total = obj(sel)[0] + obj(sel)[1];
  const double base_total = obj(base)[0] + obj(base)[1];
  Note(o, sel_total <= base_total, "(c) totals selected %.2f vs baseline %.2f",
       sel_total, base_total);

  const CandidateOutcome final_run =
      RunFinal(run.selected, run.scenario, ExecutionMode::kIdeal);
  std::vector<const VehicleCosts*> ranked;
  for (const auto& f : final_run.costs.followers) ranked.push_back(&f);
  std::sort(ranked.begin(), ranked.end(),
            [](const VehicleCosts* a, const VehicleCosts* b) { return a->total > b->total; });
  const int immediate = final_run.trace.immediate_follower;
  double immediate_total = NAN;
  for (const auto* f : ranked) {
    if (f->vehicle_id == immediate) immediate_total = f->total;
  }
  Note(o, !ranked.empty() && ranked.front()->vehicle_id == immediate,
       "(d) immediate follower id %d cost %.2f; largest is id %d (%s) at %.2f, then id %d at %.2f",
       immediate, immediate_total, ranked.front()->vehicle_id,
       ranked.front()->kind.c_str(), ranked.front()->total,
       ranked.size() > 1 ? ranked[1]->vehicle_id : -1,
       ranked.size() > 1 ? ranked[1]->total : 0.0);
  run.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return o;
}

Outcome CarFollowingFidelity() {
  Outcome o;
  std::mt19937_64 gen(303);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst_eq = 0.0;
  for (int i = 0; i < 100; ++i) {
    IdmParams p;
    p.max_accel = 0.5 + 2.0 * u(gen);
    p.comfortable_decel = 1.0 + 2.0 * u(gen);
    p.exponent = 1.0 + 5.0 * u(gen);
    p.time_headway = 0.8 + 1.6 * u(gen);
    p.jam_gap = 1.0 + 3.0 * u(gen);
    p.stop_gap = 2.0 * u(gen);
    p.desired_speed = 20.0 + 20.0 * u(gen);
    const double v = (0.2 + 0.75 * u(gen)) * p.desired_speed;
    const double length = 4.0 + 2.0 * u(gen);
    worst_eq = std::max(worst_eq, std::abs(IdmEquilibriumSpacing(v, p, length) -
                                           oracle::IdmEquilibriumByBisection(v, p, length)));
  }
  Note(o, worst_eq <= 1e-6, "IDM equilibrium vs bisection max error %.2e m over 100 draws",
       worst_eq);

  double worst_accel = 0.0;
  for (double ratio : {0.0, 0.5, 1.0}) {
    ScenarioConfig c = LoadScenario(kBaseline);
    c.penetration_ratio = ratio;
    const WarmupResult w = RunWarmup(SpawnPlatoon(c), c);
    worst_accel = std::max(worst_accel, w.worst_accel);
  }
  Note(o, worst_accel <= 1e-3, "warm-up max follower |a| %.2e m/s^2 at penetration 0, 0.5, 1",
       worst_accel);

  const IdmParams idm;
  const LcmParams lcm;
  double worst_jerk = 0.0;
  int pairs = 0, unphysical = 0;
  for (int i = 0; i < 500; ++i) {
    const FollowingPair pair{5.0 + 25.0 * u(gen), -2.0 + 4.0 * u(gen),
                             5.0 + 25.0 * u(gen), -2.0 + 4.0 * u(gen),
                             15.0 + 100.0 * u(gen), 5.0};
    // The clamped dynamic-gap term has a kink where the derivative jumps.
    const double dyn = pair.v * idm.time_headway +
                       pair.v * (pair.v - pair.leader_v) /
                           (2.0 * std::sqrt(idm.max_accel * idm.comfortable_decel));
    if (std::abs(dyn) < 0.5) continue;
    // Beyond emergency braking the central difference's own truncation error
    // exceeds the tolerance, so such states say nothing about the jerk.
    if (std::abs(IdmAccel(pair, idm)) > 9.0 || std::abs(LcmAccel(pair, lcm)) > 9.0) {
      ++unphysical;
      continue;
    }
    ++pairs;
    const double fd_idm = oracle::PairJerk(
        [&](const FollowingPair& q) { return IdmAccel(q, idm); }, pair, 1e-3);
    const double fd_lcm = oracle::PairJerk(
        [&](const FollowingPair& q) { return LcmAccel(q, lcm); }, pair, 1e-3);
    worst_jerk = std::max({worst_jerk, std::abs(IdmJerk(pair, idm) - fd_idm),
                           std::abs(LcmJerk(pair, lcm) - fd_lcm)});
  }
  Note(o, worst_jerk <= 1e-3,
       "analytic jerk vs central difference (dt=1e-3) max %.2e m/s^3 over %d pairs "
       "(%d draws beyond 9 m/s^2 skipped)",
       worst_jerk, pairs, unphysical);
  return o;
}

Outcome LinearizationAndMpc() {
  Outcome o;
  std::mt19937_64 gen(404);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst_jac = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const ReferencePoint r{100 * u(gen), 10 * u(gen), 0.5 * u(gen),
                           15.0 + 10.0 * u(gen), 0.4 * u(gen)};
    const ErrorModel m = LinearizeErrorModel(r, 2.7, 0.1);
    Eigen::Matrix3d A;
    Eigen::Matrix<double, 3, 2> B;
    oracle::EulerJacobian(r, 2.7, 0.1, 1e-5, &A, &B);
    worst_jac = std::max({worst_jac, (m.A - A).cwiseAbs().maxCoeff(),
                          (m.B - B).cwiseAbs().maxCoeff()});
  }
  Note(o, worst_jac <= 1e-6, "error-model matrices vs finite-difference Jacobian max %.2e over 1000 references",
       worst_jac);

  const BaselineRun& run = *baseline_run;
  if (run.front.empty()) {
    Note(o, false, "no winning plan available");
    return o;
  }
  MpcConfig cfg = run.config.mpc;
  cfg.du_max = Eigen::Vector2d(1e6, 1e6);
  const CandidateOutcome ideal =
      SimulateCandidate(run.selected, run.scenario, ExecutionMode::kIdeal, false);
  auto window = PlanReference(ideal.trace.plan, cfg.sample_time, cfg.wheelbase,
                              cfg.prediction_horizon + 1);
  window.resize(cfg.prediction_horizon + 1);
  double worst_ls = 0.0;
  for (int i = 0; i < 50; ++i) {
    const KinematicState current{window[0].x + 0.5 * u(gen), window[0].y + 0.3 * u(gen),
                                 window[0].yaw + 0.03 * u(gen), window[0].speed + u(gen),
                                 window[0].steer, cfg.wheelbase};
    const Eigen::Vector2d prev(0.2 * u(gen), 0.02 * u(gen));
    const MpcSolution sol = MpcStep(current, window, prev, cfg);
    const Eigen::VectorXd expected = oracle::StackedLeastSquares(current, window, prev, cfg);
    worst_ls = std::max(worst_ls, (sol.sequence - expected).cwiseAbs().maxCoeff());
  }
  Note(o, worst_ls <= 1e-8, "unconstrained MPC vs stacked least squares max %.2e over 50 states",
       worst_ls);

  const TrackingResult tracked = TrackTrajectory(ideal.trace.plan, run.config.mpc);
  Note(o, tracked.rms_lateral <= 0.1, "tracked lateral RMS %.4f m on the selected plan (limit 0.1)",
       tracked.rms_lateral);
  return o;
}

Outcome CollisionGeometry() {
  Outcome o;
  std::mt19937_64 gen(505);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0, worst_sym = 0.0;
  int separated = 0, flag_mismatch = 0;
  for (int i = 0; i < 200; ++i) {
    const EllipseBoundary a = MakeBoundary(
        {-5.0 + 10.0 * u(gen), -2.0 + 4.0 * u(gen), (u(gen) - 0.5) * 1.2},
        {1.0 + 2.0 * u(gen), 0.5 + 1.0 * u(gen)});
    const EllipseBoundary b = MakeBoundary(
        {-10.0 + 20.0 * u(gen), -6.0 + 12.0 * u(gen), (u(gen) - 0.5) * 1.2},
        {1.0 + 2.0 * u(gen), 0.5 + 1.0 * u(gen)});
    const Separation s = MinSeparation(a, b);
    const auto dense = oracle::DenseEllipseSeparation(a, b, 720);
    if (s.overlapping != dense.overlapping) ++flag_mismatch;
    if (!dense.overlapping) {
      ++separated;
      worst = std::max(worst, std::abs(s.distance - dense.distance));
    }
    worst_sym = std::max(worst_sym, std::abs(s.distance - MinSeparation(b, a).distance));
  }
  Note(o, flag_mismatch == 0 && worst <= 1e-3,
       "max |distance - dense 720x720| %.2e m over %d separated pairs; overlap flags differ on %d of 200",
       worst, separated, flag_mismatch);
  Note(o, worst_sym <= 1e-9, "max asymmetry %.2e m", worst_sym);
  return o;
}

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome Determinism() {
  Outcome o;
  const fs::path root = fs::temp_directory_path() / "lanepareto_acceptance";
  fs::remove_all(root);
  const ScenarioConfig config = LoadScenario(kBaseline);
  std::ostringstream err;
  const auto a = cli::RunOptimize(config, (root / "a").string(), "acceptance", err);
  const auto b = cli::RunOptimize(config, (root / "b").string(), "acceptance", err);
  if (a.exit_code != cli::kOk || b.exit_code != cli::kOk) {
    Note(o, false, "optimize exited %d and %d: %s", a.exit_code, b.exit_code,
         a.message.c_str());
    return o;
  }
  for (const char* name : {"front.json", "trace_ideal.csv", "trace_tracked.csv"}) {
    const std::string x = Slurp(root / "a" / name);
    const std::string y = Slurp(root / "b" / name);
    Note(o, !x.empty() && x == y, "%s %zu bytes %s", name, x.size(),
         x == y ? "identical" : "differ");
  }
  fs::remove_all(root);
  return o;
}

struct Criterion {
  int id;
  const char* name;
  double limit_s;
  std::function<Outcome()> run;
};

}  // namespace
}  // namespace lanepareto

// Usage: acceptance [--known-failure ID]...
// IDs such as "5d" name sub-checks whose failure is documented. They still
// print FAIL but do not affect the exit status.
int main(int argc, char** argv) {
  using namespace lanepareto;
  std::vector<std::string> known;
  for (int i = 1; i + 1 < argc; i += 2) {
    if (std::string(argv[i]) != "--known-failure") {
      std::fprintf(stderr, "usage: %s [--known-failure ID]...\n", argv[0]);
      return 2;
    }
    known.push_back(argv[i + 1]);
  }
  if (argc % 2 == 0) {
    std::fprintf(stderr, "usage: %s [--known-failure ID]...\n", argv[0]);
    return 2;
  }
  BaselineRun run;
  baseline_run = &run;
  // Determinism may take up to twice the baseline-scenario budget.
  const std::vector<Criterion> criteria{
      {1, "Edie reproduction", 1.0, EdieReproduction},
      {2, "Quintic correctness", 5.0, QuinticCorrectness},
      {3, "Dominance oracle", 10.0, DominanceOracle},
      {4, "Solver sanity on ZDT1", 60.0, AnalyticFront},
      {5, "Baseline-scenario structure", 300.0, BaselineScenarioStructure},
      {6, "Car-following fidelity", 30.0, CarFollowingFidelity},
      {7, "Linearization and MPC", 60.0, LinearizationAndMpc},
      {8, "Collision geometry", 30.0, CollisionGeometry},
      {9, "Determinism", 600.0, Determinism},
  };
  int failures = 0, unexpected = 0;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail += std::string("exception: ") + e.what();
      o.failed_parts.push_back("");
    }
    const double s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = s < c.limit_s;
    const bool pass = o.pass && in_time;
    if (!in_time) o.failed_parts.push_back("");
    std::vector<std::string> excused;
    for (const std::string& part : o.failed_parts) {
      const std::string id = std::to_string(c.id) + part;
      if (std::find(known.begin(), known.end(), id) != known.end()) {
        excused.push_back(id);
      } else {
        ++unexpected;
      }
    }
    if (!pass) ++failures;
    std::printf("%s  %d. %s (%.2f s, limit %.0f s%s): %s\n", pass ? "PASS" : "FAIL",
                c.id, c.name, s, c.limit_s, in_time ? "" : ", over time",
                o.detail.c_str());
    for (const std::string& id : excused) {
      std::printf("      known failure %s, documented in the README\n", id.c_str());
    }
    for (const std::string& id : known) {
      if (id.rfind(std::to_string(c.id), 0) == 0 &&
          std::find(excused.begin(), excused.end(), id) == excused.end()) {
        std::printf("      known failure %s now passes\n", id.c_str());
      }
    }
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n",
              static_cast<int>(criteria.size()) - failures, criteria.size());
  return unexpected == 0 ? 0 : 1;
}
