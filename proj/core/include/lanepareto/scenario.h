#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "lanepareto/cf_models.h"
#include "lanepareto/collision.h"
#include "lanepareto/cost.h"
#include "lanepareto/nsga2.h"
#include "lanepareto/tracking.h"
#include "lanepareto/trajectory.h"
#include "lanepareto/vehicle.h"

namespace lanepareto {

enum class AvPattern { kAlternating, kRandom };

// When the target-lane follower starts reacting to the lane changer.
enum class RetargetTrigger { kSteeringOnset, kLaneCrossing };

// Space-time rectangle for the macroscopic measurements, anchored at the lane
// changer's position at t0 and at t0 itself.
struct EdieRegionSpec {
  double x_offset = -250.0;  // m
  double length = 500.0;     // m
  double t_offset = 0.0;     // s
  double duration = 15.0;    // s
};

struct HeatmapSpec {
  double dx = 10.0;  // m
  double dt = 0.5;   // s
};

struct ScenarioConfig {
  double sim_step = 0.1;
  double warmup_duration = 300.0;
  double lead_in = 5.0;
  double tail = 10.0;

  int platoon_size = 20;
  double platoon_speed = 25.0;
  double penetration_ratio = 0.5;
  AvPattern av_pattern = AvPattern::kAlternating;
  std::uint64_t av_seed = 7;
  // Relative spacing disturbance applied at spawn, relaxed by the warm-up.
  double spawn_perturbation = 0.1;

  double lc_initial_speed = 20.0;
  // Distance from the designated target-lane follower to the lane changer.
  double lc_initial_gap = 20.0;
  // Zero-based platoon index of that follower (10 = the 11th vehicle).
  int lc_follower_index = 10;
  double lane_width = 3.5;
  double incident_distance = 100.0;
  double incident_speed = 0.0;
  RetargetTrigger retarget_trigger = RetargetTrigger::kSteeringOnset;

  double vehicle_length = 5.0;
  double vehicle_width = 2.0;
  EllipseRadii ellipse;

  CostWeights cost;
  KinematicBounds bounds;
  DecisionBounds decision;
  LcmParams lcm;
  IdmParams idm;
  NsgaParams nsga;
  MpcConfig mpc;
  EdieRegionSpec edie_region;
  HeatmapSpec heatmap;

  // Non-fatal findings from validation (e.g. an ellipse that does not
  // circumscribe the vehicle rectangle).
  std::vector<std::string> warnings;

  int sim_ticks(double seconds) const;
};

// Throws ConfigError naming the offending field; appends warnings.
void Validate(ScenarioConfig& config);

// Parses a JSON scenario document. Optional keys take the defaults above.
ScenarioConfig BuildScenario(std::string_view document);
ScenarioConfig LoadScenario(const std::string& path);

// Full resolved document; BuildScenario(ScenarioToJson(c)) reproduces c.
std::string ScenarioToJson(const ScenarioConfig& config, int indent = 2);

// Sets a top-level scalar by key; used by sensitivity sweeps. Returns false
// for an unsupported key.
bool OverrideScenarioValue(ScenarioConfig& config, std::string_view key,
                           double value);

// Platoon on the target lane front to rear (ids 0..n-1), then the lane
// changer (id n) and the incident vehicle (id n+1) on the original lane.
std::vector<VehicleState> SpawnPlatoon(const ScenarioConfig& config);

// Snapshots of the converged platoon; the last snapshot is t0.
struct WarmupResult {
  std::vector<std::vector<VehicleState>> history;
  std::vector<std::vector<int>> leaders;
  double t0 = 0.0;
  double worst_accel = 0.0;
  double worst_speed_error = 0.0;

  const std::vector<VehicleState>& state() const { return history.back(); }
  int t0_tick() const { return static_cast<int>(history.size()) - 1; }
};

// Simulates the platoon for warmup_duration, then re-anchors the lane changer
// and the incident vehicle to the converged follower. Throws WarmupError when
// a follower's |a| > 1e-3 m/s^2 or its speed is off the head's by > 1e-2 m/s.
WarmupResult RunWarmup(const std::vector<VehicleState>& spawned,
                       const ScenarioConfig& config);

inline int LaneChangerIndex(const ScenarioConfig& c) { return c.platoon_size; }
inline int IncidentIndex(const ScenarioConfig& c) { return c.platoon_size + 1; }

// Equilibrium spacing of platoon member i at the platoon speed.
double EquilibriumSpacing(const ScenarioConfig& config, VehicleKind kind);

}  // namespace lanepareto
