#include "lanepareto/scenario.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "json.hpp"
#include "lanepareto/errors.h"
#include "stepper.h"

namespace lanepareto {
namespace {

using nlohmann::json;

// Walks one JSON object, remembering which keys were consumed so leftovers
// can be reported as unknown.
class Reader {
 public:
  Reader(const json* node, std::string prefix)
      : node_(node), prefix_(std::move(prefix)) {
    if (node_ != nullptr && !node_->is_object()) {
      throw ConfigError(prefix_.empty() ? "<root>" : prefix_.substr(0, prefix_.size() - 1),
                        "expected an object");
    }
  }

  std::string Path(const std::string& key) const { return prefix_ + key; }

  const json* Find(const std::string& key) {
    if (node_ == nullptr) return nullptr;
    auto it = node_->find(key);
    if (it == node_->end()) return nullptr;
    used_.insert(key);
    return &*it;
  }

  void Number(const std::string& key, double& out, bool required = false) {
    const json* v = Find(key);
    if (v == nullptr) {
      if (required) throw ConfigError(Path(key), "missing required key");
      return;
    }
    if (!v->is_number()) throw ConfigError(Path(key), "expected a number");
    out = v->get<double>();
    if (!std::isfinite(out)) throw ConfigError(Path(key), "must be finite");
  }

  void Integer(const std::string& key, int& out, bool required = false) {
    double d = out;
    Number(key, d, required);
    if (d != std::floor(d) || std::abs(d) > 1e9) {
      throw ConfigError(Path(key), "expected an integer");
    }
    out = static_cast<int>(d);
  }

  void Unsigned(const std::string& key, std::uint64_t& out) {
    const json* v = Find(key);
    if (v == nullptr) return;
    if (!v->is_number_integer() || (v->is_number_integer() && v->get<std::int64_t>() < 0 &&
                                    !v->is_number_unsigned())) {
      throw ConfigError(Path(key), "expected a non-negative integer");
    }
    out = v->get<std::uint64_t>();
  }

  void Bool(const std::string& key, bool& out) {
    const json* v = Find(key);
    if (v == nullptr) return;
    if (!v->is_boolean()) throw ConfigError(Path(key), "expected true or false");
    out = v->get<bool>();
  }

  std::string String(const std::string& key, const std::string& fallback) {
    const json* v = Find(key);
    if (v == nullptr) return fallback;
    if (!v->is_string()) throw ConfigError(Path(key), "expected a string");
    return v->get<std::string>();
  }

  template <int N>
  void Vector(const std::string& key, Eigen::Matrix<double, N, 1>& out) {
    const json* v = Find(key);
    if (v == nullptr) return;
    if (!v->is_array() || v->size() != static_cast<std::size_t>(N)) {
      throw ConfigError(Path(key),
                        "expected an array of " + std::to_string(N) + " numbers");
    }
    for (int i = 0; i < N; ++i) {
      if (!(*v)[i].is_number()) throw ConfigError(Path(key), "expected numbers");
      out[i] = (*v)[i].get<double>();
    }
  }

  Reader Child(const std::string& key) { return Reader(Find(key), Path(key) + "."); }

  void Finish() const {
    if (node_ == nullptr) return;
    for (auto it = node_->begin(); it != node_->end(); ++it) {
      if (!used_.count(it.key())) throw ConfigError(Path(it.key()), "unknown key");
    }
  }

 private:
  const json* node_;
  std::string prefix_;
  std::set<std::string> used_;
};

void Require(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw ConfigError(field, what);
}

json Diagonal(const Eigen::Matrix3d& m) {
  return json::array({m(0, 0), m(1, 1), m(2, 2)});
}
json Diagonal(const Eigen::Matrix2d& m) { return json::array({m(0, 0), m(1, 1)}); }

const char* ToString(AvPattern p) {
  return p == AvPattern::kAlternating ? "alternating" : "random";
}
const char* ToString(RetargetTrigger t) {
  return t == RetargetTrigger::kSteeringOnset ? "steering_onset" : "lane_crossing";
}

std::vector<VehicleKind> AssignKinds(const ScenarioConfig& c) {
  const int n = c.platoon_size;
  const int av_count = static_cast<int>(std::lround(c.penetration_ratio * n));
  std::vector<VehicleKind> kinds(n, VehicleKind::kHuman);
  if (c.av_pattern == AvPattern::kRandom) {
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(c.av_seed, 0);
    for (int i = n - 1; i > 0; --i) {
      std::swap(order[i], order[rng.UniformInt(0, i)]);
    }
    for (int i = 0; i < av_count; ++i) kinds[order[i]] = VehicleKind::kAutonomous;
    return kinds;
  }
  // Spread AVs evenly: member i is an AV when ceil(i * count / n) steps up,
  // which yields AV, HV, AV, HV, ... at a ratio of one half.
  auto ceil_div = [n](long i, long count) { return (i * count + n - 1) / n; };
  for (int i = 0; i < n; ++i) {
    if (ceil_div(i + 1, av_count) > ceil_div(i, av_count)) {
      kinds[i] = VehicleKind::kAutonomous;
    }
  }
  return kinds;
}

}  // namespace

int ScenarioConfig::sim_ticks(double seconds) const {
  return static_cast<int>(std::lround(seconds / sim_step));
}

double EquilibriumSpacing(const ScenarioConfig& c, VehicleKind kind) {
  if (kind == VehicleKind::kHuman) {
    return LcmEquilibriumSpacing(c.platoon_speed, c.lcm, c.vehicle_length);
  }
  return IdmEquilibriumSpacing(c.platoon_speed, c.idm, c.vehicle_length);
}

void Validate(ScenarioConfig& c) {
  c.warnings.clear();
  Require(c.sim_step > 0.0, "sim_step", "must be positive");
  Require(c.warmup_duration >= 0.0, "warmup_duration", "must be non-negative");
  Require(c.lead_in >= 0.0, "lead_in", "must be non-negative");
  Require(c.tail >= 0.0, "tail", "must be non-negative");
  Require(c.platoon_size >= 1, "platoon_size", "must be at least 1");
  Require(c.penetration_ratio >= 0.0 && c.penetration_ratio <= 1.0,
          "penetration_ratio", "must lie in [0, 1]");
  Require(c.platoon_speed > 0.0, "platoon_speed", "must be positive");
  Require(c.spawn_perturbation >= 0.0 && c.spawn_perturbation < 0.5,
          "spawn_perturbation", "must lie in [0, 0.5)");
  Require(c.lc_initial_speed >= 0.0, "lc_initial_speed", "must be non-negative");
  Require(c.lc_initial_gap > 0.0, "lc_initial_gap", "must be positive");
  Require(c.lc_follower_index >= 0 && c.lc_follower_index < c.platoon_size,
          "lc_follower_index", "must index a platoon member");
  Require(c.lane_width > 0.0, "lane_width", "must be positive");
  Require(c.incident_distance > c.vehicle_length, "incident_distance",
          "must exceed the vehicle length");
  Require(c.incident_speed >= 0.0, "incident_speed", "must be non-negative");
  Require(c.vehicle_length > 0.0, "vehicle.length", "must be positive");
  Require(c.vehicle_width > 0.0, "vehicle.width", "must be positive");
  Require(c.ellipse.semi_major > 0.0, "ellipse.semi_major", "must be positive");
  Require(c.ellipse.semi_minor > 0.0, "ellipse.semi_minor", "must be positive");
  Require(c.edie_region.length > 0.0, "edie_region.length", "must be positive");
  Require(c.edie_region.duration > 0.0, "edie_region.duration", "must be positive");
  Require(c.heatmap.dx > 0.0, "heatmap.dx", "must be positive");
  Require(c.heatmap.dt > 0.0, "heatmap.dt", "must be positive");

  Validate(c.cost);
  Validate(c.bounds);
  Validate(c.decision);
  Validate(c.lcm);
  Validate(c.idm);
  Validate(c.nsga);
  Validate(c.mpc);
  Require(std::abs(c.mpc.sample_time - c.sim_step) < 1e-12, "mpc.sample_time",
          "must equal sim_step");
  const double reaction_ticks = c.lcm.reaction_time / c.sim_step;
  Require(std::abs(reaction_ticks - std::round(reaction_ticks)) < 1e-9,
          "lcm_params.reaction_time", "must be a multiple of sim_step");
  Require(c.platoon_speed < c.idm.desired_speed, "idm_params.desired_speed",
          "must exceed platoon_speed for a finite equilibrium");
  Require(c.platoon_speed < c.lcm.desired_speed, "lcm_params.desired_speed",
          "must exceed platoon_speed for a finite equilibrium");

  const double corner = WorstCornerValue(c.ellipse, c.vehicle_length, c.vehicle_width);
  if (corner > 1.0 + 1e-12) {
    std::ostringstream msg;
    msg << "ellipse " << c.ellipse.semi_major << " x " << c.ellipse.semi_minor
        << " m does not enclose the " << c.vehicle_length << " x "
        << c.vehicle_width << " m body (corner value " << corner
        << "); collision checks may miss corner contacts";
    c.warnings.push_back(msg.str());
  }
}

ScenarioConfig BuildScenario(std::string_view document) {
  json root;
  try {
    root = json::parse(document.begin(), document.end());
  } catch (const json::parse_error& e) {
    throw ConfigError("<document>", e.what());
  }
  if (root.is_object() && root.contains("manifest_version")) {
    if (!root.contains("scenario")) {
      throw ConfigError("scenario", "manifest carries no scenario section");
    }
    json inner = root["scenario"];
    return BuildScenario(inner.dump());
  }

  ScenarioConfig c;
  Reader r(&root, "");
  r.Number("sim_step", c.sim_step, true);
  r.Integer("platoon_size", c.platoon_size, true);
  r.Number("lc_initial_speed", c.lc_initial_speed, true);
  r.Number("lc_initial_gap", c.lc_initial_gap, true);
  r.Number("lane_width", c.lane_width, true);
  r.Number("warmup_duration", c.warmup_duration);
  r.Number("lead_in", c.lead_in);
  r.Number("tail", c.tail);
  r.Number("platoon_speed", c.platoon_speed);
  r.Number("penetration_ratio", c.penetration_ratio);
  const std::string pattern = r.String("av_pattern", "alternating");
  if (pattern == "alternating") {
    c.av_pattern = AvPattern::kAlternating;
  } else if (pattern == "random") {
    c.av_pattern = AvPattern::kRandom;
  } else {
    throw ConfigError("av_pattern", "expected \"alternating\" or \"random\"");
  }
  r.Unsigned("av_seed", c.av_seed);
  r.Number("spawn_perturbation", c.spawn_perturbation);
  r.Integer("lc_follower_index", c.lc_follower_index);
  r.Number("incident_distance", c.incident_distance);
  r.Number("incident_speed", c.incident_speed);
  const std::string trigger = r.String("retarget_trigger", "steering_onset");
  if (trigger == "steering_onset") {
    c.retarget_trigger = RetargetTrigger::kSteeringOnset;
  } else if (trigger == "lane_crossing") {
    c.retarget_trigger = RetargetTrigger::kLaneCrossing;
  } else {
    throw ConfigError("retarget_trigger",
                      "expected \"steering_onset\" or \"lane_crossing\"");
  }

  {
    Reader v = r.Child("vehicle");
    v.Number("length", c.vehicle_length);
    v.Number("width", c.vehicle_width);
    v.Number("wheelbase", c.mpc.wheelbase);
    v.Number("max_steer", c.mpc.max_steer);
    v.Finish();
  }
  {
    Reader e = r.Child("ellipse");
    e.Number("semi_major", c.ellipse.semi_major);
    e.Number("semi_minor", c.ellipse.semi_minor);
    e.Finish();
  }
  {
    Reader w = r.Child("cost_weights");
    w.Number("comfort", c.cost.comfort);
    w.Number("efficiency", c.cost.efficiency);
    w.Number("safety", c.cost.safety);
    w.Finish();
    Reader n = r.Child("normalizers");
    n.Number("comfort", c.cost.comfort_norm);
    n.Number("efficiency", c.cost.efficiency_norm);
    n.Number("safety", c.cost.safety_norm);
    n.Finish();
    r.Number("v_small", c.cost.v_small);
    r.Bool("net_gap_safety", c.cost.net_gap_safety);
  }
  {
    Reader b = r.Child("bounds");
    b.Number("v_min", c.bounds.v_min);
    b.Number("v_max", c.bounds.v_max);
    b.Number("a_min", c.bounds.a_min);
    b.Number("a_max", c.bounds.a_max);
    b.Number("j_min", c.bounds.j_min);
    b.Number("j_max", c.bounds.j_max);
    b.Number("t_lc_min", c.bounds.t_lc_min);
    b.Number("t_lc_max", c.bounds.t_lc_max);
    b.Number("x_lc_min", c.bounds.x_lc_min);
    b.Number("x_lc_max", c.bounds.x_lc_max);
    b.Number("t_wait_max", c.decision.t_wait_max);
    b.Number("a_end_min", c.decision.a_end_min);
    b.Number("a_end_max", c.decision.a_end_max);
    b.Finish();
  }
  {
    Reader p = r.Child("lcm_params");
    p.Number("max_accel", c.lcm.max_accel);
    p.Number("emergency_decel", c.lcm.emergency_decel);
    p.Number("leader_emergency_decel", c.lcm.leader_emergency_decel);
    p.Number("reaction_time", c.lcm.reaction_time);
    p.Number("desired_speed", c.lcm.desired_speed);
    p.Finish();
  }
  {
    Reader p = r.Child("idm_params");
    p.Number("max_accel", c.idm.max_accel);
    p.Number("comfortable_decel", c.idm.comfortable_decel);
    p.Number("exponent", c.idm.exponent);
    p.Number("time_headway", c.idm.time_headway);
    p.Number("jam_gap", c.idm.jam_gap);
    p.Number("stop_gap", c.idm.stop_gap);
    p.Number("desired_speed", c.idm.desired_speed);
    p.Finish();
  }
  {
    Reader p = r.Child("nsga_params");
    p.Integer("population", c.nsga.population);
    p.Integer("generations", c.nsga.generations);
    p.Number("crossover_prob", c.nsga.crossover_prob);
    p.Number("mutation_prob", c.nsga.mutation_prob);
    p.Number("eta_c", c.nsga.eta_c);
    p.Number("eta_m", c.nsga.eta_m);
    p.Unsigned("seed", c.nsga.seed);
    p.Integer("threads", c.nsga.threads);
    p.Finish();
  }
  {
    Reader m = r.Child("mpc");
    m.Integer("prediction_horizon", c.mpc.prediction_horizon);
    m.Integer("control_horizon", c.mpc.control_horizon);
    Eigen::Vector3d q = c.mpc.Q.diagonal();
    Eigen::Vector2d rr = c.mpc.R.diagonal();
    m.Vector<3>("q", q);
    m.Vector<2>("r", rr);
    c.mpc.Q = q.asDiagonal();
    c.mpc.R = rr.asDiagonal();
    m.Number("rho", c.mpc.rho);
    m.Vector<2>("du_max", c.mpc.du_max);
    m.Integer("max_active_set_iterations", c.mpc.max_active_set_iterations);
    m.Finish();
  }
  {
    Reader e = r.Child("edie_region");
    e.Number("x_offset", c.edie_region.x_offset);
    e.Number("length", c.edie_region.length);
    e.Number("t_offset", c.edie_region.t_offset);
    e.Number("duration", c.edie_region.duration);
    e.Finish();
    Reader h = r.Child("heatmap");
    h.Number("dx", c.heatmap.dx);
    h.Number("dt", c.heatmap.dt);
    h.Finish();
  }
  r.Finish();
  c.mpc.sample_time = c.sim_step;
  Validate(c);
  return c;
}

ScenarioConfig LoadScenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--scenario", "cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return BuildScenario(buffer.str());
}

std::string ScenarioToJson(const ScenarioConfig& c, int indent) {
  json j;
  j["sim_step"] = c.sim_step;
  j["warmup_duration"] = c.warmup_duration;
  j["lead_in"] = c.lead_in;
  j["tail"] = c.tail;
  j["platoon_size"] = c.platoon_size;
  j["platoon_speed"] = c.platoon_speed;
  j["penetration_ratio"] = c.penetration_ratio;
  j["av_pattern"] = ToString(c.av_pattern);
  j["av_seed"] = c.av_seed;
  j["spawn_perturbation"] = c.spawn_perturbation;
  j["lc_initial_speed"] = c.lc_initial_speed;
  j["lc_initial_gap"] = c.lc_initial_gap;
  j["lc_follower_index"] = c.lc_follower_index;
  j["lane_width"] = c.lane_width;
  j["incident_distance"] = c.incident_distance;
  j["incident_speed"] = c.incident_speed;
  j["retarget_trigger"] = ToString(c.retarget_trigger);
  j["vehicle"] = {{"length", c.vehicle_length},
                  {"width", c.vehicle_width},
                  {"wheelbase", c.mpc.wheelbase},
                  {"max_steer", c.mpc.max_steer}};
  j["ellipse"] = {{"semi_major", c.ellipse.semi_major},
                  {"semi_minor", c.ellipse.semi_minor}};
  j["cost_weights"] = {{"comfort", c.cost.comfort},
                       {"efficiency", c.cost.efficiency},
                       {"safety", c.cost.safety}};
  j["normalizers"] = {{"comfort", c.cost.comfort_norm},
                      {"efficiency", c.cost.efficiency_norm},
                      {"safety", c.cost.safety_norm}};
  j["v_small"] = c.cost.v_small;
  j["net_gap_safety"] = c.cost.net_gap_safety;
  j["bounds"] = {{"v_min", c.bounds.v_min},       {"v_max", c.bounds.v_max},
                 {"a_min", c.bounds.a_min},       {"a_max", c.bounds.a_max},
                 {"j_min", c.bounds.j_min},       {"j_max", c.bounds.j_max},
                 {"t_lc_min", c.bounds.t_lc_min}, {"t_lc_max", c.bounds.t_lc_max},
                 {"x_lc_min", c.bounds.x_lc_min}, {"x_lc_max", c.bounds.x_lc_max},
                 {"t_wait_max", c.decision.t_wait_max},
                 {"a_end_min", c.decision.a_end_min},
                 {"a_end_max", c.decision.a_end_max}};
  j["lcm_params"] = {{"max_accel", c.lcm.max_accel},
                     {"emergency_decel", c.lcm.emergency_decel},
                     {"leader_emergency_decel", c.lcm.leader_emergency_decel},
                     {"reaction_time", c.lcm.reaction_time},
                     {"desired_speed", c.lcm.desired_speed}};
  j["idm_params"] = {{"max_accel", c.idm.max_accel},
                     {"comfortable_decel", c.idm.comfortable_decel},
                     {"exponent", c.idm.exponent},
                     {"time_headway", c.idm.time_headway},
                     {"jam_gap", c.idm.jam_gap},
                     {"stop_gap", c.idm.stop_gap},
                     {"desired_speed", c.idm.desired_speed}};
  j["nsga_params"] = {{"population", c.nsga.population},
                      {"generations", c.nsga.generations},
                      {"crossover_prob", c.nsga.crossover_prob},
                      {"mutation_prob", c.nsga.mutation_prob},
                      {"eta_c", c.nsga.eta_c},
                      {"eta_m", c.nsga.eta_m},
                      {"seed", c.nsga.seed},
                      {"threads", c.nsga.threads}};
  j["mpc"] = {{"prediction_horizon", c.mpc.prediction_horizon},
              {"control_horizon", c.mpc.control_horizon},
              {"q", Diagonal(c.mpc.Q)},
              {"r", Diagonal(c.mpc.R)},
              {"rho", c.mpc.rho},
              {"du_max", json::array({c.mpc.du_max[0], c.mpc.du_max[1]})},
              {"max_active_set_iterations", c.mpc.max_active_set_iterations}};
  j["edie_region"] = {{"x_offset", c.edie_region.x_offset},
                      {"length", c.edie_region.length},
                      {"t_offset", c.edie_region.t_offset},
                      {"duration", c.edie_region.duration}};
  j["heatmap"] = {{"dx", c.heatmap.dx}, {"dt", c.heatmap.dt}};
  return j.dump(indent);
}

bool OverrideScenarioValue(ScenarioConfig& c, std::string_view key, double value) {
  if (key == "lc_initial_speed") {
    c.lc_initial_speed = value;
  } else if (key == "lc_initial_gap") {
    c.lc_initial_gap = value;
  } else if (key == "penetration_ratio") {
    c.penetration_ratio = value;
  } else if (key == "incident_distance") {
    c.incident_distance = value;
  } else if (key == "platoon_speed") {
    c.platoon_speed = value;
  } else {
    return false;
  }
  return true;
}

std::vector<VehicleState> SpawnPlatoon(const ScenarioConfig& c) {
  const std::vector<VehicleKind> kinds = AssignKinds(c);
  std::vector<VehicleState> out;
  out.reserve(c.platoon_size + 2);
  double x = 0.0;
  for (int i = 0; i < c.platoon_size; ++i) {
    if (i > 0) {
      // Deterministic disturbance: every third gap is stretched, the others
      // compressed, so the warm-up has something to relax.
      const double p = c.spawn_perturbation;
      const double factor = (i % 3 == 0) ? 1.0 + p : 1.0 - 0.5 * p;
      x -= EquilibriumSpacing(c, kinds[i]) * factor;
    }
    VehicleState s;
    s.id = i;
    s.kind = kinds[i];
    s.x = x;
    s.y = c.lane_width;
    s.v = c.platoon_speed;
    s.lane = Lane::kTarget;
    s.length = c.vehicle_length;
    s.width = c.vehicle_width;
    out.push_back(s);
  }

  VehicleState lc;
  lc.id = c.platoon_size;
  lc.kind = VehicleKind::kLaneChanger;
  lc.x = out[c.lc_follower_index].x + c.lc_initial_gap;
  lc.y = 0.0;
  lc.v = c.lc_initial_speed;
  lc.lane = Lane::kOriginal;
  lc.length = c.vehicle_length;
  lc.width = c.vehicle_width;
  out.push_back(lc);

  VehicleState incident = lc;
  incident.id = c.platoon_size + 1;
  incident.kind = VehicleKind::kIncident;
  incident.x = lc.x + c.incident_distance;
  incident.v = c.incident_speed;
  out.push_back(incident);
  return out;
}

WarmupResult RunWarmup(const std::vector<VehicleState>& spawned,
                       const ScenarioConfig& c) {
  using internal::Motion;
  using internal::Stepper;
  const int n = c.platoon_size;
  if (static_cast<int>(spawned.size()) != n + 2) {
    throw Error("RunWarmup expects platoon + lane changer + incident vehicle");
  }
  std::vector<VehicleState> platoon(spawned.begin(), spawned.begin() + n);
  std::vector<int> leaders(n);
  std::vector<Motion> motion(n);
  for (int i = 0; i < n; ++i) {
    leaders[i] = i - 1;
    motion[i] = i == 0 ? Motion::kConstant : internal::FollowingMotion(platoon[i].kind);
  }

  Stepper stepper(c, {platoon}, {leaders}, motion);
  stepper.FinishTick();  // accelerations of the spawned state
  const int ticks = c.sim_ticks(c.warmup_duration);
  for (int k = 0; k < ticks; ++k) {
    stepper.BeginTick();
    stepper.FinishTick();
  }

  WarmupResult out;
  out.t0 = ticks * c.sim_step;
  const std::vector<VehicleState>& last = stepper.history().back();
  for (int i = 1; i < n; ++i) {
    out.worst_accel = std::max(out.worst_accel, std::abs(last[i].a));
    out.worst_speed_error =
        std::max(out.worst_speed_error, std::abs(last[i].v - last[0].v));
  }
  if (out.worst_accel > 1e-3 || out.worst_speed_error > 1e-2) {
    std::ostringstream msg;
    msg << "warm-up did not converge within " << c.warmup_duration
        << " s: worst |a| = " << out.worst_accel
        << " m/s^2, worst speed error = " << out.worst_speed_error << " m/s";
    throw WarmupError(msg.str(),
                      std::max(out.worst_accel, out.worst_speed_error));
  }

  // Keep enough history for the lead-in window and the longest reaction
  // delay; earlier snapshots are not needed downstream.
  const int keep = std::max(c.sim_ticks(c.lead_in),
                            c.sim_ticks(c.lcm.reaction_time)) + 1;
  auto& hist = stepper.history();
  auto& lead = stepper.leaders();
  const int first = std::max(0, static_cast<int>(hist.size()) - keep);

  const VehicleState& follower = last[c.lc_follower_index];
  VehicleState lc = spawned[n];
  lc.x = follower.x + c.lc_initial_gap;
  VehicleState incident = spawned[n + 1];
  incident.x = lc.x + c.incident_distance;

  const int t0_index = static_cast<int>(hist.size()) - 1;
  for (int k = first; k <= t0_index; ++k) {
    const double back = (t0_index - k) * c.sim_step;
    std::vector<VehicleState> snap = hist[k];
    VehicleState l = lc;
    l.x -= l.v * back;
    VehicleState inc = incident;
    inc.x -= inc.v * back;
    snap.push_back(l);
    snap.push_back(inc);
    out.history.push_back(std::move(snap));
    std::vector<int> ld = lead[k];
    ld.push_back(n + 1);
    ld.push_back(-1);
    out.leaders.push_back(std::move(ld));
  }
  return out;
}

}  // namespace lanepareto
