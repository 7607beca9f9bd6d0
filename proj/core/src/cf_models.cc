#include "lanepareto/cf_models.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "lanepareto/errors.h"

namespace lanepareto {
namespace {

constexpr double kFreeRoadSpacing = 1e9;

void RequirePositive(double value, const char* field) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw ConfigError(field, "must be strictly positive, got " +
                                 std::to_string(value));
  }
}

}  // namespace

std::string_view ToString(VehicleKind kind) {
  switch (kind) {
    case VehicleKind::kHuman:
      return "HV";
    case VehicleKind::kAutonomous:
      return "AV";
    case VehicleKind::kLaneChanger:
      return "AV_LC";
    case VehicleKind::kIncident:
      return "INCIDENT";
  }
  return "?";
}

std::string_view ToString(Lane lane) {
  switch (lane) {
    case Lane::kOriginal:
      return "original";
    case Lane::kTarget:
      return "target";
    case Lane::kTransition:
      return "transition";
  }
  return "?";
}

Lane LaneOf(double y, double lane_width) {
  const double tol = 1e-9 * std::max(1.0, lane_width);
  if (y <= tol) return Lane::kOriginal;
  if (y >= lane_width - tol) return Lane::kTarget;
  return Lane::kTransition;
}

void Validate(const LcmParams& p) {
  RequirePositive(p.max_accel, "lcm_params.max_accel");
  RequirePositive(p.emergency_decel, "lcm_params.emergency_decel");
  RequirePositive(p.leader_emergency_decel,
                  "lcm_params.leader_emergency_decel");
  RequirePositive(p.reaction_time, "lcm_params.reaction_time");
  RequirePositive(p.desired_speed, "lcm_params.desired_speed");
}

void Validate(const IdmParams& p) {
  RequirePositive(p.max_accel, "idm_params.max_accel");
  RequirePositive(p.comfortable_decel, "idm_params.comfortable_decel");
  RequirePositive(p.time_headway, "idm_params.time_headway");
  RequirePositive(p.jam_gap, "idm_params.jam_gap");
  RequirePositive(p.desired_speed, "idm_params.desired_speed");
  if (!(p.exponent >= 1.0)) {
    throw ConfigError("idm_params.exponent", "must be >= 1");
  }
  if (!(p.stop_gap >= 0.0)) {
    throw ConfigError("idm_params.stop_gap", "must be >= 0");
  }
}

FollowingPair MakePair(const VehicleState& follower,
                       const VehicleState& leader) {
  return {follower.v, follower.a, leader.v, leader.a, leader.x - follower.x,
          leader.length};
}

FollowingPair FreeRoad(double v, double a) {
  return {v, a, v, 0.0, kFreeRoadSpacing, 0.0};
}

double LcmDesiredSpacing(const FollowingPair& p, const LcmParams& params) {
  const double s = p.v * p.v / (2.0 * params.emergency_decel) -
                   p.leader_v * p.leader_v /
                       (2.0 * params.leader_emergency_decel) +
                   p.v * params.reaction_time + p.leader_length;
  // A faster leader can drive the expression below the leader length (or
  // negative); the spacing never asks for less than bumper contact.
  return std::max(s, std::max(p.leader_length, 1e-6));
}

double LcmAccel(const FollowingPair& p, const LcmParams& params) {
  if (!(p.spacing > 0.0)) {
    throw CollisionError("LCM update on non-positive spacing " +
                         std::to_string(p.spacing));
  }
  const double desired = LcmDesiredSpacing(p, params);
  return params.max_accel * (1.0 - p.v / params.desired_speed -
                             std::exp(1.0 - p.spacing / desired));
}

double LcmAccel(const VehicleState& follower, const VehicleState& leader,
                const LcmParams& params) {
  return LcmAccel(MakePair(follower, leader), params);
}

double LcmJerk(const FollowingPair& p, const LcmParams& params) {
  if (!(p.spacing > 0.0)) {
    throw CollisionError("LCM jerk on non-positive spacing");
  }
  const double raw = p.v * p.v / (2.0 * params.emergency_decel) -
                     p.leader_v * p.leader_v /
                         (2.0 * params.leader_emergency_decel) +
                     p.v * params.reaction_time + p.leader_length;
  const double desired = LcmDesiredSpacing(p, params);
  const double desired_rate =
      raw >= desired ? p.v * p.a / params.emergency_decel -
                           p.leader_v * p.leader_a /
                               params.leader_emergency_decel +
                           p.a * params.reaction_time
                     : 0.0;
  const double spacing_rate = p.leader_v - p.v;
  const double field = std::exp(1.0 - p.spacing / desired);
  return params.max_accel *
         (-p.a / params.desired_speed +
          field * (spacing_rate * desired - p.spacing * desired_rate) /
              (desired * desired));
}

double IdmDesiredGap(const FollowingPair& p, const IdmParams& params) {
  const double dynamic =
      p.v * params.time_headway +
      p.v * (p.v - p.leader_v) /
          (2.0 * std::sqrt(params.max_accel * params.comfortable_decel));
  const double ratio = std::max(p.v, 0.0) / params.desired_speed;
  return params.jam_gap + params.stop_gap * std::sqrt(ratio) +
         std::max(dynamic, 0.0);
}

double IdmAccel(const FollowingPair& p, const IdmParams& params) {
  const double gap = p.spacing - p.leader_length;
  if (!(gap > 0.0)) {
    throw CollisionError("IDM update on non-positive net gap " +
                         std::to_string(gap));
  }
  const double interaction = IdmDesiredGap(p, params) / gap;
  return params.max_accel *
         (1.0 - std::pow(std::max(p.v, 0.0) / params.desired_speed,
                         params.exponent) -
          interaction * interaction);
}

double IdmAccel(const VehicleState& follower, const VehicleState& leader,
                const IdmParams& params) {
  return IdmAccel(MakePair(follower, leader), params);
}

double IdmJerk(const FollowingPair& p, const IdmParams& params) {
  const double gap = p.spacing - p.leader_length;
  if (!(gap > 0.0)) {
    throw CollisionError("IDM jerk on non-positive net gap");
  }
  const double root_ab =
      std::sqrt(params.max_accel * params.comfortable_decel);
  const double v = std::max(p.v, 0.0);
  const double dv = p.v - p.leader_v;
  const double dynamic = v * params.time_headway + v * dv / (2.0 * root_ab);
  double desired_rate = 0.0;
  if (dynamic > 0.0) {
    desired_rate = p.a * params.time_headway +
                   (p.a * dv + v * (p.a - p.leader_a)) / (2.0 * root_ab);
  }
  if (params.stop_gap > 0.0 && v > 0.0) {
    desired_rate +=
        params.stop_gap * p.a / (2.0 * std::sqrt(v * params.desired_speed));
  }
  const double desired = IdmDesiredGap(p, params);
  const double gap_rate = p.leader_v - p.v;
  const double free_term =
      v > 0.0 ? params.exponent *
                    std::pow(v / params.desired_speed, params.exponent - 1.0) *
                    p.a / params.desired_speed
              : 0.0;
  return params.max_accel *
         (-free_term -
          2.0 * desired * (desired_rate * gap - desired * gap_rate) /
              (gap * gap * gap));
}

double IdmEquilibriumSpacing(double v, const IdmParams& params,
                             double leader_length) {
  if (v < 0.0 || v >= params.desired_speed) {
    throw InfeasibleError("no finite IDM equilibrium at speed " +
                          std::to_string(v));
  }
  const double ratio = v / params.desired_speed;
  const double desired = params.jam_gap +
                         params.stop_gap * std::sqrt(ratio) +
                         v * params.time_headway;
  return desired / std::sqrt(1.0 - std::pow(ratio, params.exponent)) +
         leader_length;
}

double LcmEquilibriumSpacing(double v, const LcmParams& params,
                             double leader_length) {
  if (v < 0.0 || v >= params.desired_speed) {
    throw InfeasibleError("no finite LCM equilibrium at speed " +
                          std::to_string(v));
  }
  const FollowingPair p{v, 0.0, v, 0.0, 1.0, leader_length};
  const double desired = LcmDesiredSpacing(p, params);
  // 1 - v/vd = exp(1 - s/s*)  =>  s = s* (1 - ln(1 - v/vd))
  return desired * (1.0 - std::log(1.0 - v / params.desired_speed));
}

}  // namespace lanepareto
