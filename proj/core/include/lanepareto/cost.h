#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace lanepareto {

struct CostWeights {
  double comfort = 1.0 / 3.0;
  double efficiency = 1.0 / 3.0;
  double safety = 1.0 / 3.0;
  double comfort_norm = 8.0;      // m/s^3
  double efficiency_norm = 25.0;  // m/s
  double safety_norm = 0.5;       // 1/s
  double v_small = 1e-6;
  // Use the net gap (spacing minus leader length) in the safety term instead
  // of the gross spacing.
  bool net_gap_safety = false;
};

void Validate(const CostWeights& w);

struct TickCost {
  double comfort = 0.0;
  double efficiency = 0.0;
  double safety = 0.0;
};

// Relationship of a vehicle to the vehicle it is measured against.
struct LeaderGap {
  double closing_speed = 0.0;  // v_follower - v_leader
  double spacing = 0.0;        // m, already net or gross as configured
};

struct TickInput {
  double jerk = 0.0;
  double v = 0.0;
  double desired_speed = 0.0;
  std::optional<LeaderGap> leader;
};

double SafetyCost(const LeaderGap& gap, const CostWeights& w);

TickCost StepCost(const TickInput& in, const CostWeights& w);

struct FollowerOffset {
  double dv = 0.0;  // speed difference to the lane changer at t0
  double dx = 0.0;  // distance to the lane changer at t0, > 0
};

// sigma_i = |dv| / sqrt(dx), normalised to sum to one. Falls back to uniform
// weights when every sigma is zero. Throws Error for dx <= 0.
std::vector<double> FollowerWeights(std::span<const FollowerOffset> followers);

double AggregateJlc(std::span<const TickCost> series, const CostWeights& w);

// Throws Error when the weight count or any series length disagrees.
double AggregateJtf(const std::vector<std::vector<TickCost>>& series,
                    std::span<const double> follower_weights,
                    const CostWeights& w);

struct VehicleCosts {
  int vehicle_id = 0;
  std::string kind;
  double weight = 0.0;  // follower weight, 1 for the lane changer
  std::vector<TickCost> series;
  // Single-vehicle aggregate of `series` (the AggregateJlc form).
  double total = 0.0;
};

struct CostBreakdown {
  double t0 = 0.0;
  double sim_step = 0.1;
  VehicleCosts lane_changer;
  std::vector<VehicleCosts> followers;
  double j_lc = 0.0;
  double j_tf = 0.0;
  double violation = 0.0;
};

std::string CostBreakdownToJson(const CostBreakdown& breakdown);

}  // namespace lanepareto
