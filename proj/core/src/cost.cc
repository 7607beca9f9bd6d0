#include "lanepareto/cost.h"

#include <cmath>
#include <string>

#include "json.hpp"
#include "lanepareto/errors.h"

namespace lanepareto {
namespace {

struct CategorySums {
  double comfort = 0.0;
  double efficiency = 0.0;
  double safety = 0.0;
};

double Combine(const CategorySums& s, const CostWeights& w) {
  return w.comfort * s.comfort / w.comfort_norm +
         w.efficiency * s.efficiency / w.efficiency_norm +
         w.safety * s.safety / w.safety_norm;
}

nlohmann::json SeriesJson(const VehicleCosts& v) {
  nlohmann::json series = nlohmann::json::array();
  for (const auto& c : v.series) {
    series.push_back({c.comfort, c.efficiency, c.safety});
  }
  return {{"vehicle_id", v.vehicle_id},
          {"kind", v.kind},
          {"weight", v.weight},
          {"total", v.total},
          {"series", std::move(series)}};
}

}  // namespace

void Validate(const CostWeights& w) {
  const auto positive = [](double v, const char* field) {
    if (!(v > 0.0)) throw ConfigError(field, "must be strictly positive");
  };
  positive(w.comfort_norm, "normalizers.comfort");
  positive(w.efficiency_norm, "normalizers.efficiency");
  positive(w.safety_norm, "normalizers.safety");
  positive(w.v_small, "v_small");
  for (auto [v, field] : {std::pair{w.comfort, "cost_weights.comfort"},
                          std::pair{w.efficiency, "cost_weights.efficiency"},
                          std::pair{w.safety, "cost_weights.safety"}}) {
    if (!(v >= 0.0)) throw ConfigError(field, "must be >= 0");
  }
  if (!(w.comfort + w.efficiency + w.safety > 0.0)) {
    throw ConfigError("cost_weights", "weights must not all be zero");
  }
}

double SafetyCost(const LeaderGap& gap, const CostWeights& w) {
  const double lambda = gap.closing_speed >= 0.0 ? 1.0 : 0.0;
  return lambda * gap.closing_speed * gap.closing_speed +
         1.0 / (gap.spacing * gap.spacing + w.v_small);
}

TickCost StepCost(const TickInput& in, const CostWeights& w) {
  TickCost c;
  c.comfort = std::abs(in.jerk);
  c.efficiency = std::abs(in.v - in.desired_speed);
  c.safety = in.leader ? SafetyCost(*in.leader, w) : 0.0;
  return c;
}

std::vector<double> FollowerWeights(std::span<const FollowerOffset> followers) {
  std::vector<double> sigma;
  sigma.reserve(followers.size());
  double total = 0.0;
  for (const auto& f : followers) {
    if (!(f.dx > 0.0)) {
      throw Error("follower distance to the lane changer must be positive");
    }
    sigma.push_back(std::abs(f.dv) / std::sqrt(f.dx));
    total += sigma.back();
  }
  if (sigma.empty()) return sigma;
  if (!(total > 0.0)) {
    return std::vector<double>(sigma.size(),
                               1.0 / static_cast<double>(sigma.size()));
  }
  for (double& s : sigma) s /= total;
  return sigma;
}

double AggregateJlc(std::span<const TickCost> series, const CostWeights& w) {
  CategorySums sums;
  for (const auto& c : series) {
    sums.comfort += c.comfort;
    sums.efficiency += c.efficiency;
    sums.safety += c.safety;
  }
  return Combine(sums, w);
}

double AggregateJtf(const std::vector<std::vector<TickCost>>& series,
                    std::span<const double> follower_weights,
                    const CostWeights& w) {
  if (series.size() != follower_weights.size()) {
    throw Error("follower weight count " +
                std::to_string(follower_weights.size()) +
                " does not match vehicle count " +
                std::to_string(series.size()));
  }
  CategorySums sums;
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (series[i].size() != series.front().size()) {
      throw Error("follower cost series are not time-aligned");
    }
    for (const auto& c : series[i]) {
      sums.comfort += follower_weights[i] * c.comfort;
      sums.efficiency += follower_weights[i] * c.efficiency;
      sums.safety += follower_weights[i] * c.safety;
    }
  }
  return Combine(sums, w);
}

std::string CostBreakdownToJson(const CostBreakdown& b) {
  nlohmann::json followers = nlohmann::json::array();
  for (const auto& f : b.followers) followers.push_back(SeriesJson(f));
  const nlohmann::json doc = {
      {"t0", b.t0},
      {"sim_step", b.sim_step},
      {"columns", {"comfort", "efficiency", "safety"}},
      {"J_LC", b.j_lc},
      {"J_TF", b.j_tf},
      {"constraint_violation", b.violation},
      {"lane_changer", SeriesJson(b.lane_changer)},
      {"followers", std::move(followers)}};
  return doc.dump(2) + "\n";
}

}  // namespace lanepareto
