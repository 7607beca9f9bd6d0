#pragma once

#include <vector>

#include "lanepareto/scenario.h"
#include "lanepareto/vehicle.h"

namespace lanepareto::internal {

enum class Motion { kConstant, kIdm, kLcm, kScripted };

// Tick-synchronous traffic integrator. Every tick is a full snapshot of all
// vehicles plus each vehicle's leader (-1 for none). Accelerations at tick k
// are computed from snapshots at k (IDM) or k - reaction ticks (LCM); speeds
// are then integrated with a trapezoid position update.
class Stepper {
 public:
  Stepper(const ScenarioConfig& config,
          std::vector<std::vector<VehicleState>> history,
          std::vector<std::vector<int>> leaders, std::vector<Motion> motion);

  int tick() const { return static_cast<int>(history_.size()) - 1; }
  int size() const { return static_cast<int>(motion_.size()); }
  const VehicleState& state(int tick, int i) const { return history_[tick][i]; }
  VehicleState& latest(int i) { return history_.back()[i]; }
  int leader(int tick, int i) const { return leaders_[tick][i]; }
  void SetLeader(int i, int leader) { leaders_.back()[i] = leader; }
  void SetMotion(int i, Motion m) { motion_[i] = m; }
  Motion motion(int i) const { return motion_[i]; }
  // The next jerk of vehicle i is a backward difference, because its
  // acceleration is about to jump (e.g. scripted -> car-following).
  void MarkDiscontinuity(int i) { discontinuous_[i] = true; }

  // Integrates unscripted vehicles into a new snapshot. Scripted vehicles are
  // copied and must be overwritten before FinishTick.
  void BeginTick();
  // Computes accelerations and jerks of car-following vehicles at the latest
  // tick. Throws CollisionError when a net gap is not positive.
  void FinishTick();

  std::vector<std::vector<VehicleState>>& history() { return history_; }
  std::vector<std::vector<int>>& leaders() { return leaders_; }

 private:
  FollowingPair PairAt(int tick, int i) const;

  const ScenarioConfig& config_;
  std::vector<std::vector<VehicleState>> history_;
  std::vector<std::vector<int>> leaders_;
  std::vector<Motion> motion_;
  std::vector<bool> discontinuous_;
  int reaction_ticks_;
};

// Motion model implied by the vehicle kind.
Motion FollowingMotion(VehicleKind kind);

}  // namespace lanepareto::internal
