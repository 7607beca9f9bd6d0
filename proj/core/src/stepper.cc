#include "stepper.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "lanepareto/errors.h"

namespace lanepareto::internal {

Motion FollowingMotion(VehicleKind kind) {
  return kind == VehicleKind::kHuman ? Motion::kLcm : Motion::kIdm;
}

Stepper::Stepper(const ScenarioConfig& config,
                 std::vector<std::vector<VehicleState>> history,
                 std::vector<std::vector<int>> leaders,
                 std::vector<Motion> motion)
    : config_(config),
      history_(std::move(history)),
      leaders_(std::move(leaders)),
      motion_(std::move(motion)),
      discontinuous_(motion_.size(), false),
      reaction_ticks_(static_cast<int>(
          std::lround(config.lcm.reaction_time / config.sim_step))) {
  if (history_.empty() || history_.size() != leaders_.size()) {
    throw Error("stepper needs a non-empty, aligned history");
  }
}

FollowingPair Stepper::PairAt(int tick, int i) const {
  const VehicleState& self = history_[tick][i];
  const int lead = leaders_[tick][i];
  if (lead < 0) return FreeRoad(self.v, self.a);
  return MakePair(self, history_[tick][lead]);
}

void Stepper::BeginTick() {
  const double dt = config_.sim_step;
  std::vector<VehicleState> next = history_.back();
  for (int i = 0; i < size(); ++i) {
    VehicleState& s = next[i];
    switch (motion_[i]) {
      case Motion::kScripted:
        break;
      case Motion::kConstant:
        s.x += s.v * dt;
        s.a = 0.0;
        s.jerk = 0.0;
        break;
      case Motion::kIdm:
      case Motion::kLcm: {
        const double v_next = std::max(0.0, s.v + s.a * dt);
        s.x += 0.5 * (s.v + v_next) * dt;
        s.v = v_next;
        break;
      }
    }
  }
  history_.push_back(std::move(next));
  leaders_.push_back(leaders_.back());
}

void Stepper::FinishTick() {
  const int k = tick();
  const double dt = config_.sim_step;
  auto input_tick = [&](int i) {
    return motion_[i] == Motion::kLcm ? std::max(0, k - reaction_ticks_) : k;
  };

  std::vector<VehicleState>& now = history_.back();
  for (int i = 0; i < size(); ++i) {
    const int lead = leaders_[k][i];
    if (lead >= 0 && motion_[i] != Motion::kScripted) {
      const double net = now[lead].x - now[i].x - now[lead].length;
      if (net <= 0.0) {
        throw CollisionError("vehicle " + std::to_string(i) +
                             " overlaps its leader " + std::to_string(lead));
      }
    }
  }
  for (int i = 0; i < size(); ++i) {
    if (motion_[i] == Motion::kIdm) {
      now[i].a = IdmAccel(PairAt(k, i), config_.idm);
    } else if (motion_[i] == Motion::kLcm) {
      now[i].a = LcmAccel(PairAt(input_tick(i), i), config_.lcm);
    }
  }
  for (int i = 0; i < size(); ++i) {
    if (motion_[i] != Motion::kIdm && motion_[i] != Motion::kLcm) continue;
    const int kin = input_tick(i);
    const bool switched =
        discontinuous_[i] ||
        (kin >= 1 && leaders_[kin][i] != leaders_[kin - 1][i]);
    discontinuous_[i] = false;
    if (switched && k >= 1) {
      now[i].jerk = (now[i].a - history_[k - 1][i].a) / dt;
    } else if (motion_[i] == Motion::kIdm) {
      now[i].jerk = IdmJerk(PairAt(k, i), config_.idm);
    } else {
      now[i].jerk = LcmJerk(PairAt(kin, i), config_.lcm);
    }
  }
}

}  // namespace lanepareto::internal
