#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "lanepareto/cost.h"
#include "lanepareto/nsga2.h"
#include "lanepareto/scenario.h"
#include "lanepareto/trajectory.h"
#include "lanepareto/vehicle.h"

namespace lanepareto {

enum class ExecutionMode { kIdeal, kTracked };
std::string_view ToString(ExecutionMode mode);

// Warmed-up state at the decision time t0, shared read-only by evaluations.
struct FrozenScenario {
  ScenarioConfig config;
  WarmupResult warm;
  int lc_index = 0;
  int incident_index = 0;
  // Target-lane vehicles behind the lane changer at t0, front to rear.
  std::vector<int> followers;
  std::vector<FollowerOffset> offsets;
  std::vector<double> weights;

  double t0() const { return warm.t0; }
};

// Spawns, warms up and freezes. Throws ConfigError / WarmupError.
FrozenScenario PrepareScenario(const ScenarioConfig& config);
// Freezes an externally built warm-up (used for hand-built scenarios).
FrozenScenario FreezeScenario(const ScenarioConfig& config, WarmupResult warm);

struct SimulationTrace {
  ExecutionMode mode = ExecutionMode::kIdeal;
  double sim_step = 0.1;
  double t_first = 0.0;  // time of ticks[0]
  std::vector<std::vector<VehicleState>> ticks;
  std::vector<std::vector<int>> leaders;
  int k0 = 0;       // decision tick
  int k_start = 0;  // steering onset
  int k_end = 0;    // lane change complete
  int lc_index = 0;
  int incident_index = 0;
  int new_leader = -1;
  int immediate_follower = -1;
  int retarget_tick = -1;
  QuinticPair plan;

  double time(int k) const { return t_first + k * sim_step; }
};

struct CandidateOutcome {
  Evaluation eval;
  CostBreakdown costs;
  SimulationTrace trace;
  // Reason for a sentinel violation (collision inside a car-following update
  // or an unsolvable plan); empty otherwise.
  std::string diagnostic;
};

// Violation assigned when the simulation cannot continue.
inline constexpr double kSentinelViolation = 1e6;

// Stage 1 follows the stopped leader for t_wait, stage 2 executes the plan
// (exactly, or through the closed-loop tracker), then the lane changer
// follows its new leader. `with_tail` extends the run past t_end by the
// configured tail and far enough to cover the measurement region.
CandidateOutcome SimulateCandidate(const LcCandidate& candidate,
                                   const FrozenScenario& scenario,
                                   ExecutionMode mode, bool with_tail);

// Ideal-mode objectives over [t0, t_end]; the run continues through the tail
// so that collisions in the aftermath still count as violations.
Evaluation EvaluateCandidate(const LcCandidate& candidate,
                             const FrozenScenario& scenario);

Evaluator MakeEvaluator(const FrozenScenario& scenario);

// Full replay of a feasible candidate. Throws InfeasibleError when the
// outcome carries a violation and TrackingFailure when the tracker diverges.
CandidateOutcome RunFinal(const LcCandidate& candidate,
                          const FrozenScenario& scenario, ExecutionMode mode);

// Index of the self-interested choice: lowest J_LC, ties on J_TF.
std::size_t ExistingAlgorithmBaseline(const ParetoFront& front);

// Columns: t,vehicle_id,kind,lane,x,y,v,a,jerk.
void WriteTraceCsv(const SimulationTrace& trace, std::ostream& out);

}  // namespace lanepareto
