#include "lanepareto/sim_engine.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>

#include "lanepareto/collision.h"
#include "lanepareto/errors.h"
#include "lanepareto/tracking.h"
#include "stepper.h"

namespace lanepareto {
namespace {

using internal::Motion;
using internal::Stepper;

constexpr double kTrackingDivergence = 5.0;  // m

double DesiredSpeed(const ScenarioConfig& c, VehicleKind kind) {
  return kind == VehicleKind::kHuman ? c.lcm.desired_speed
                                     : c.idm.desired_speed;
}

std::optional<LeaderGap> GapBetween(const VehicleState& follower,
                                    const VehicleState& leader,
                                    const CostWeights& w) {
  double s = leader.x - follower.x;
  if (w.net_gap_safety) s -= leader.length;
  if (s <= 0.0) return std::nullopt;
  return LeaderGap{follower.v - leader.v, s};
}

TickCost LaneChangerTick(const SimulationTrace& tr, int k,
                         const ScenarioConfig& c) {
  const auto& snap = tr.ticks[k];
  const VehicleState& lc = snap[tr.lc_index];
  TickCost out = StepCost({lc.jerk, lc.v, DesiredSpeed(c, lc.kind), {}}, c.cost);

  std::vector<std::optional<LeaderGap>> gaps;
  if (k < tr.k_start || lc.y < 0.5 * c.lane_width) {
    gaps.push_back(GapBetween(lc, snap[tr.incident_index], c.cost));
  }
  if (k >= tr.k_start) {
    if (tr.new_leader >= 0) {
      gaps.push_back(GapBetween(lc, snap[tr.new_leader], c.cost));
    }
    if (tr.immediate_follower >= 0) {
      gaps.push_back(GapBetween(snap[tr.immediate_follower], lc, c.cost));
    }
  }
  for (const auto& g : gaps) {
    if (g) out.safety = std::max(out.safety, SafetyCost(*g, c.cost));
  }
  return out;
}

TickCost FollowerTick(const SimulationTrace& tr, int k, int i,
                      const ScenarioConfig& c) {
  const auto& snap = tr.ticks[k];
  const VehicleState& s = snap[i];
  TickInput in{s.jerk, s.v, DesiredSpeed(c, s.kind), {}};
  const int lead = tr.leaders[k][i];
  if (lead >= 0) in.leader = GapBetween(s, snap[lead], c.cost);
  return StepCost(in, c.cost);
}

CostBreakdown BuildCosts(const SimulationTrace& tr, const FrozenScenario& sc,
                         int k_last) {
  const ScenarioConfig& c = sc.config;
  CostBreakdown out;
  out.t0 = sc.t0();
  out.sim_step = c.sim_step;

  out.lane_changer.vehicle_id = tr.lc_index;
  out.lane_changer.kind = ToString(VehicleKind::kLaneChanger);
  out.lane_changer.weight = 1.0;
  for (int k = tr.k0; k <= k_last; ++k) {
    out.lane_changer.series.push_back(LaneChangerTick(tr, k, c));
  }
  out.lane_changer.total = AggregateJlc(out.lane_changer.series, c.cost);
  out.j_lc = out.lane_changer.total;

  std::vector<std::vector<TickCost>> series;
  for (std::size_t f = 0; f < sc.followers.size(); ++f) {
    const int i = sc.followers[f];
    VehicleCosts v;
    v.vehicle_id = i;
    v.kind = ToString(tr.ticks[tr.k0][i].kind);
    v.weight = sc.weights[f];
    for (int k = tr.k0; k <= k_last; ++k) {
      v.series.push_back(FollowerTick(tr, k, i, c));
    }
    v.total = AggregateJlc(v.series, c.cost);
    series.push_back(v.series);
    out.followers.push_back(std::move(v));
  }
  out.j_tf = series.empty() ? 0.0 : AggregateJtf(series, sc.weights, c.cost);
  return out;
}

double BoxExcess(const LcCandidate& cand, const DecisionBounds& d) {
  double excess = 0.0;
  if (cand.t_wait < 0.0) excess += -cand.t_wait;
  if (cand.t_wait > d.t_wait_max) {
    excess += (cand.t_wait - d.t_wait_max) / std::max(d.t_wait_max, 1.0);
  }
  auto scaled = [](double over, double bound) {
    return over / (bound == 0.0 ? 1.0 : std::abs(bound));
  };
  if (cand.a_end < d.a_end_min) excess += scaled(d.a_end_min - cand.a_end, d.a_end_min);
  if (cand.a_end > d.a_end_max) excess += scaled(cand.a_end - d.a_end_max, d.a_end_max);
  return excess;
}

double CollisionExcess(const SimulationTrace& tr, const EllipseRadii& radii) {
  const int n = static_cast<int>(tr.ticks.front().size());
  std::vector<Pose> subject;
  std::vector<std::vector<Pose>> neighbors(n - 1);
  for (int k = tr.k0; k <= tr.k_end; ++k) {
    const auto& snap = tr.ticks[k];
    const auto& lc = snap[tr.lc_index];
    subject.push_back({lc.x, lc.y, lc.heading});
    int slot = 0;
    for (int i = 0; i < n; ++i) {
      if (i == tr.lc_index) continue;
      neighbors[slot++].push_back({snap[i].x, snap[i].y, snap[i].heading});
    }
  }
  return ClearanceOverHorizon(subject, neighbors, radii);
}

void ApplySample(VehicleState& s, const TrajectorySample& p) {
  s.x = p.x;
  s.y = p.y;
  s.v = p.vx;
  s.a = p.ax;
  s.jerk = std::hypot(p.jx, p.jy);
  s.heading = p.heading;
}

}  // namespace

std::string_view ToString(ExecutionMode mode) {
  return mode == ExecutionMode::kIdeal ? "ideal" : "tracked";
}

FrozenScenario FreezeScenario(const ScenarioConfig& config, WarmupResult warm) {
  FrozenScenario sc;
  sc.config = config;
  sc.warm = std::move(warm);
  sc.lc_index = LaneChangerIndex(config);
  sc.incident_index = IncidentIndex(config);
  const auto& now = sc.warm.state();
  if (static_cast<int>(now.size()) != config.platoon_size + 2) {
    throw Error("warm-up state does not match the platoon size");
  }
  const VehicleState& lc = now[sc.lc_index];
  for (int i = 0; i < config.platoon_size; ++i) {
    if (now[i].x < lc.x) {
      sc.followers.push_back(i);
      sc.offsets.push_back({now[i].v - lc.v, lc.x - now[i].x});
    }
  }
  if (!sc.followers.empty()) sc.weights = FollowerWeights(sc.offsets);
  return sc;
}

FrozenScenario PrepareScenario(const ScenarioConfig& config) {
  ScenarioConfig c = config;
  Validate(c);
  return FreezeScenario(c, RunWarmup(SpawnPlatoon(c), c));
}

CandidateOutcome SimulateCandidate(const LcCandidate& cand,
                                   const FrozenScenario& sc,
                                   ExecutionMode mode, bool with_tail) {
  const ScenarioConfig& c = sc.config;
  const double dt = c.sim_step;
  const int n = c.platoon_size;
  const int lc_i = sc.lc_index;

  CandidateOutcome out;
  SimulationTrace& tr = out.trace;
  tr.mode = mode;
  tr.sim_step = dt;
  tr.k0 = sc.warm.t0_tick();
  tr.t_first = sc.t0() - tr.k0 * dt;
  tr.lc_index = lc_i;
  tr.incident_index = sc.incident_index;
  const int wait_ticks = std::max(0, c.sim_ticks(cand.t_wait));
  const int dur_ticks = c.sim_ticks(cand.duration);
  tr.k_start = tr.k0 + wait_ticks;
  tr.k_end = tr.k_start + dur_ticks;
  int k_stop = tr.k_end;
  if (with_tail) {
    const double region_end =
        sc.t0() + c.edie_region.t_offset + c.edie_region.duration;
    const int region_ticks =
        static_cast<int>(std::ceil((region_end - tr.time(tr.k_end)) / dt - 1e-9));
    k_stop = tr.k_end + std::max(c.sim_ticks(c.tail), region_ticks);
  }

  std::vector<Motion> motion(n + 2);
  for (int i = 0; i < n; ++i) {
    motion[i] = i == 0 ? Motion::kConstant
                       : internal::FollowingMotion(sc.warm.state()[i].kind);
  }
  motion[lc_i] = Motion::kIdm;
  motion[sc.incident_index] = Motion::kConstant;
  Stepper st(c, sc.warm.history, sc.warm.leaders, motion);

  std::optional<MpcTracker> tracker;
  KinematicState kin;
  double prev_vx = 0.0, prev_vy = 0.0, prev_ax = 0.0, prev_ay = 0.0;
  bool pending_retarget = false;
  bool retargeted = false;
  int k_done = tr.k0 - 1;
  double kinematic_excess = 0.0;

  try {
    st.FinishTick();
    k_done = tr.k0;
    for (int k = tr.k0;; ++k) {
      if (k == tr.k_start) {
        VehicleState& lc = st.latest(lc_i);
        tr.plan = SolveQuintic({lc.x, lc.v, lc.a},
                               {cand.x_disp, cand.v_end, cand.a_end},
                               tr.time(k), dur_ticks * dt, c.lane_width);
        kinematic_excess = CheckKinematicLimits(SampleTrajectory(tr.plan, dt),
                                                c.bounds);
        double lead_x = 0.0, follow_x = 0.0;
        for (int i = 0; i < n; ++i) {
          const double x = st.state(k, i).x;
          if (x > lc.x && (tr.new_leader < 0 || x < lead_x)) {
            tr.new_leader = i;
            lead_x = x;
          }
          if (x <= lc.x && (tr.immediate_follower < 0 || x > follow_x)) {
            tr.immediate_follower = i;
            follow_x = x;
          }
        }
        const TrajectorySample s0 = SampleAt(tr.plan, tr.plan.t_start);
        ApplySample(lc, s0);
        st.SetMotion(lc_i, Motion::kScripted);
        if (mode == ExecutionMode::kTracked) {
          tracker.emplace(tr.plan, c.mpc);
          kin = tracker->InitialState();
          prev_vx = s0.vx;
          prev_vy = s0.vy;
          prev_ax = s0.ax;
          prev_ay = s0.ay;
        }
        pending_retarget =
            c.retarget_trigger == RetargetTrigger::kSteeringOnset;
      }
      if (k == tr.k_end) {
        st.SetMotion(lc_i, Motion::kIdm);
        st.SetLeader(lc_i, tr.new_leader);
        st.MarkDiscontinuity(lc_i);
      }
      if (k >= k_stop) break;

      st.BeginTick();
      const int kn = k + 1;
      if (pending_retarget && !retargeted && tr.immediate_follower >= 0) {
        st.SetLeader(tr.immediate_follower, lc_i);
        tr.retarget_tick = kn;
        retargeted = true;
      }
      if (kn > tr.k_start && kn <= tr.k_end) {
        VehicleState& lc = st.latest(lc_i);
        const int j = kn - tr.k_start;
        if (mode == ExecutionMode::kIdeal) {
          const double t = kn == tr.k_end ? tr.plan.t_end : tr.plan.t_start + j * dt;
          ApplySample(lc, SampleAt(tr.plan, t));
        } else {
          kin = tracker->Step(kin, j - 1);
          const ReferencePoint& ref = tracker->reference(j);
          if (std::hypot(kin.x - ref.x, kin.y - ref.y) > kTrackingDivergence) {
            throw TrackingFailure("tracker diverged from the plan", kn);
          }
          const double vx = kin.speed * std::cos(kin.yaw);
          const double vy = kin.speed * std::sin(kin.yaw);
          const double ax = (vx - prev_vx) / dt;
          const double ay = (vy - prev_vy) / dt;
          lc.x = kin.x;
          lc.y = kin.y;
          lc.v = vx;
          lc.a = ax;
          lc.jerk = std::hypot(ax - prev_ax, ay - prev_ay) / dt;
          lc.heading = kin.yaw;
          prev_vx = vx;
          prev_vy = vy;
          prev_ax = ax;
          prev_ay = ay;
        }
        lc.lane = LaneOf(lc.y, c.lane_width);
        if (kn == tr.k_end) {
          // The maneuver ends on the target centreline by construction; the
          // tracked vehicle keeps its small residual offset.
          if (mode == ExecutionMode::kIdeal) lc.y = c.lane_width;
          lc.lane = Lane::kTarget;
        }
        if (c.retarget_trigger == RetargetTrigger::kLaneCrossing &&
            !retargeted && lc.y >= 0.5 * c.lane_width &&
            tr.immediate_follower >= 0) {
          st.SetLeader(tr.immediate_follower, lc_i);
          tr.retarget_tick = kn;
          retargeted = true;
        }
      }
      st.FinishTick();
      k_done = kn;
    }
  } catch (const CollisionError& e) {
    out.diagnostic = e.what();
  } catch (const InfeasibleError& e) {
    out.diagnostic = e.what();
  }

  tr.ticks = std::move(st.history());
  tr.leaders = std::move(st.leaders());
  tr.ticks.resize(std::max(k_done + 1, 1));
  tr.leaders.resize(tr.ticks.size());

  const int k_last = std::min(tr.k_end, k_done);
  out.costs = BuildCosts(tr, sc, std::max(k_last, tr.k0));
  double violation = kinematic_excess + BoxExcess(cand, c.decision);
  if (!out.diagnostic.empty()) {
    violation += kSentinelViolation;
  } else {
    violation += CollisionExcess(tr, c.ellipse);
  }
  out.costs.violation = violation;
  out.eval.objectives = {out.costs.j_lc, out.costs.j_tf};
  out.eval.violation = violation;
  return out;
}

Evaluation EvaluateCandidate(const LcCandidate& candidate,
                             const FrozenScenario& scenario) {
  // The tail is simulated too: a follower collision after t_end makes the
  // candidate infeasible even though costs stop at t_end.
  return SimulateCandidate(candidate, scenario, ExecutionMode::kIdeal, true).eval;
}

Evaluator MakeEvaluator(const FrozenScenario& scenario) {
  return [&scenario](std::span<const double> values) {
    return EvaluateCandidate(ToCandidate(values), scenario);
  };
}

CandidateOutcome RunFinal(const LcCandidate& candidate,
                          const FrozenScenario& scenario, ExecutionMode mode) {
  CandidateOutcome out = SimulateCandidate(candidate, scenario, mode, true);
  if (out.eval.violation > 0.0) {
    throw InfeasibleError(
        "candidate is not feasible (violation " +
        std::to_string(out.eval.violation) + ")" +
        (out.diagnostic.empty() ? "" : ": " + out.diagnostic));
  }
  return out;
}

std::size_t ExistingAlgorithmBaseline(const ParetoFront& front) {
  return LeftmostSolution(front.members);
}

void WriteTraceCsv(const SimulationTrace& trace, std::ostream& out) {
  out << "t,vehicle_id,kind,lane,x,y,v,a,jerk\n";
  char line[256];
  for (std::size_t k = 0; k < trace.ticks.size(); ++k) {
    const double t = trace.time(static_cast<int>(k));
    for (const VehicleState& s : trace.ticks[k]) {
      const std::string kind(ToString(s.kind));
      const std::string lane(ToString(s.lane));
      std::snprintf(line, sizeof(line), "%.2f,%d,%s,%s,%.6f,%.6f,%.6f,%.6f,%.6f\n",
                    t, s.id, kind.c_str(), lane.c_str(), s.x, s.y, s.v, s.a,
                    s.jerk);
      out << line;
    }
  }
}

}  // namespace lanepareto
