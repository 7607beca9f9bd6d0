#pragma once

#include "lanepareto/vehicle.h"

namespace lanepareto {

// Field-theory longitudinal control model used for human drivers.
struct LcmParams {
  double max_accel = 1.2;               // A, m/s^2
  double emergency_decel = 4.0;         // b, m/s^2
  double leader_emergency_decel = 4.0;  // B, m/s^2
  double reaction_time = 1.0;           // tau, s
  double desired_speed = 30.0;          // m/s
};

// Intelligent driver model used for autonomous vehicles.
struct IdmParams {
  double max_accel = 1.0;          // A, m/s^2
  double comfortable_decel = 1.5;  // m/s^2
  double exponent = 4.0;           // delta
  double time_headway = 1.6;       // T, s
  double jam_gap = 2.0;            // s_jam, m
  double stop_gap = 0.0;           // s1, m
  double desired_speed = 30.0;     // m/s
};

// Throws ConfigError naming the offending parameter.
void Validate(const LcmParams& p);
void Validate(const IdmParams& p);

// Scalar form of the follower/leader pair. `spacing` is the gross spacing
// x_leader - x_follower; the net gap is spacing - leader_length.
struct FollowingPair {
  double v = 0.0;
  double a = 0.0;
  double leader_v = 0.0;
  double leader_a = 0.0;
  double spacing = 0.0;
  double leader_length = 5.0;
};

FollowingPair MakePair(const VehicleState& follower, const VehicleState& leader);

// Free-road pair: the leader is far enough away that its influence vanishes.
FollowingPair FreeRoad(double v, double a);

// Desired safe spacing of the LCM, floored at the leader length.
double LcmDesiredSpacing(const FollowingPair& p, const LcmParams& params);

// LCM acceleration. The caller supplies the pair observed at t; the result
// applies at t + reaction_time. Throws CollisionError when spacing <= 0.
double LcmAccel(const FollowingPair& p, const LcmParams& params);
double LcmAccel(const VehicleState& follower, const VehicleState& leader,
                const LcmParams& params);

// Exact time derivative of LcmAccel along the observed pair, using the
// accelerations carried in the pair.
double LcmJerk(const FollowingPair& p, const LcmParams& params);

double IdmDesiredGap(const FollowingPair& p, const IdmParams& params);

// IDM acceleration; closing speed is v - leader_v. Throws CollisionError when
// the net gap is <= 0.
double IdmAccel(const FollowingPair& p, const IdmParams& params);
double IdmAccel(const VehicleState& follower, const VehicleState& leader,
                const IdmParams& params);

// Exact time derivative of IdmAccel; `p.a` must be the follower's current
// acceleration.
double IdmJerk(const FollowingPair& p, const IdmParams& params);

// Gross steady-state spacing at speed v (zero relative speed, zero accel).
// Throws InfeasibleError for v >= desired speed.
double IdmEquilibriumSpacing(double v, const IdmParams& params,
                             double leader_length);
double LcmEquilibriumSpacing(double v, const LcmParams& params,
                             double leader_length);

}  // namespace lanepareto
