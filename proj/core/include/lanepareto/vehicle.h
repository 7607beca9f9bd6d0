#pragma once

#include <string_view>

namespace lanepareto {

enum class VehicleKind { kHuman, kAutonomous, kLaneChanger, kIncident };
enum class Lane { kOriginal, kTarget, kTransition };

std::string_view ToString(VehicleKind kind);
std::string_view ToString(Lane lane);

// Kinematic snapshot of one vehicle at one tick. The original lane centre is
// y = 0 and the target lane centre is y = lane_width.
struct VehicleState {
  int id = 0;
  VehicleKind kind = VehicleKind::kHuman;
  double x = 0.0;        // m, longitudinal (front-to-rear ordering uses x)
  double y = 0.0;        // m, lateral
  double v = 0.0;        // m/s, longitudinal speed
  double a = 0.0;        // m/s^2
  double jerk = 0.0;     // m/s^3, comfort jerk
  double heading = 0.0;  // rad
  Lane lane = Lane::kTarget;
  double length = 5.0;
  double width = 2.0;
};

// Lane classification of a lateral position for a single adjacent-lane change,
// with a 1e-9 relative tolerance at the lane centrelines.
Lane LaneOf(double y, double lane_width);

}  // namespace lanepareto
