#include "lanepareto/tracking.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Dense>

#include "lanepareto/errors.h"

namespace lanepareto {
namespace {

constexpr double kDivergence = 5.0;  // m

double WrapAngle(double a) {
  return std::remainder(a, 2.0 * std::numbers::pi);
}

void CheckSteer(double steer) {
  if (!(std::abs(steer) < 0.5 * std::numbers::pi)) {
    throw InfeasibleError("steering angle " + std::to_string(steer) +
                          " outside (-pi/2, pi/2)");
  }
}

Eigen::Vector3d Derivative(const Eigen::Vector3d& q, double speed,
                           double steer, double wheelbase) {
  return {speed * std::cos(q[2]), speed * std::sin(q[2]),
          speed * std::tan(steer) / wheelbase};
}

// Box-constrained minimiser of 0.5 x'Hx + g'x by clamp-and-resolve on the
// active set.
Eigen::VectorXd SolveBoxQp(const Eigen::MatrixXd& H, const Eigen::VectorXd& g,
                           const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                           int max_iterations) {
  const Eigen::Index n = g.size();
  // 0 free, -1 at lower, +1 at upper
  std::vector<int> state(static_cast<std::size_t>(n), 0);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  for (int it = 0; it < max_iterations; ++it) {
    std::vector<Eigen::Index> free;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (state[i] == 0) {
        free.push_back(i);
      } else {
        x[i] = state[i] < 0 ? lo[i] : hi[i];
      }
    }
    if (!free.empty()) {
      const auto m = static_cast<Eigen::Index>(free.size());
      Eigen::MatrixXd Hff(m, m);
      Eigen::VectorXd rhs(m);
      for (Eigen::Index a = 0; a < m; ++a) {
        double r = -g[free[a]];
        for (Eigen::Index j = 0; j < n; ++j) {
          if (state[j] != 0) r -= H(free[a], j) * x[j];
        }
        rhs[a] = r;
        for (Eigen::Index b = 0; b < m; ++b) Hff(a, b) = H(free[a], free[b]);
      }
      const Eigen::VectorXd xf = Hff.ldlt().solve(rhs);
      for (Eigen::Index a = 0; a < m; ++a) x[free[a]] = xf[a];
    }
    bool changed = false;
    for (Eigen::Index i : free) {
      if (x[i] < lo[i]) {
        state[i] = -1;
        changed = true;
      } else if (x[i] > hi[i]) {
        state[i] = 1;
        changed = true;
      }
    }
    if (changed) continue;
    const Eigen::VectorXd grad = H * x + g;
    for (Eigen::Index i = 0; i < n; ++i) {
      if ((state[i] < 0 && grad[i] < 0.0) || (state[i] > 0 && grad[i] > 0.0)) {
        state[i] = 0;
        changed = true;
      }
    }
    if (!changed) break;
  }
  return x.cwiseMax(lo).cwiseMin(hi);
}

double QuadraticValue(const Eigen::MatrixXd& H, const Eigen::VectorXd& g,
                      const Eigen::VectorXd& x) {
  return 0.5 * x.dot(H * x) + g.dot(x);
}

}  // namespace

KinematicState StepKinematics(const KinematicState& s, double dt) {
  CheckSteer(s.steer);
  if (!(dt > 0.0)) throw Error("integration step must be positive");
  const Eigen::Vector3d q(s.x, s.y, s.yaw);
  const Eigen::Vector3d k1 = Derivative(q, s.speed, s.steer, s.wheelbase);
  const Eigen::Vector3d k2 =
      Derivative(q + 0.5 * dt * k1, s.speed, s.steer, s.wheelbase);
  const Eigen::Vector3d k3 =
      Derivative(q + 0.5 * dt * k2, s.speed, s.steer, s.wheelbase);
  const Eigen::Vector3d k4 =
      Derivative(q + dt * k3, s.speed, s.steer, s.wheelbase);
  const Eigen::Vector3d next = q + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  KinematicState out = s;
  out.x = next[0];
  out.y = next[1];
  out.yaw = next[2];
  return out;
}

ReferencePoint ReferenceFromSample(const TrajectorySample& s,
                                   double wheelbase) {
  ReferencePoint r;
  r.x = s.x;
  r.y = s.y;
  r.yaw = s.heading;
  r.speed = std::hypot(s.vx, s.vy);
  if (r.speed > 1e-9) {
    const double curvature =
        (s.vx * s.ay - s.vy * s.ax) / (r.speed * r.speed * r.speed);
    r.steer = std::atan(wheelbase * curvature);
  }
  return r;
}

ErrorModel LinearizeErrorModel(const ReferencePoint& ref, double wheelbase,
                               double T) {
  CheckSteer(ref.steer);
  if (!(T >= 0.0)) throw Error("sample time must be >= 0");
  ErrorModel m;
  m.reference = ref;
  m.sample_time = T;
  const double s = std::sin(ref.yaw), c = std::cos(ref.yaw);
  const double cd = std::cos(ref.steer);
  m.A << 1.0, 0.0, -ref.speed * s * T,  //
      0.0, 1.0, ref.speed * c * T,      //
      0.0, 0.0, 1.0;
  m.B << c * T, 0.0,  //
      s * T, 0.0,     //
      std::tan(ref.steer) * T / wheelbase,
      ref.speed * T / (wheelbase * cd * cd);
  return m;
}

void Validate(const MpcConfig& cfg) {
  if (cfg.prediction_horizon < 1) {
    throw ConfigError("mpc.prediction_horizon", "must be >= 1");
  }
  if (cfg.control_horizon < 1 || cfg.control_horizon > cfg.prediction_horizon) {
    throw ConfigError("mpc.control_horizon",
                      "must lie in [1, prediction_horizon]");
  }
  if (!(cfg.rho >= 0.0)) throw ConfigError("mpc.rho", "must be >= 0");
  if (!(cfg.sample_time > 0.0)) {
    throw ConfigError("mpc.sample_time", "must be positive");
  }
  if (!(cfg.wheelbase > 0.0)) {
    throw ConfigError("mpc.wheelbase", "must be positive");
  }
  if (!(cfg.du_max.minCoeff() > 0.0)) {
    throw ConfigError("mpc.du_max", "must be positive");
  }
  if (!cfg.Q.isApprox(cfg.Q.transpose()) ||
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d>(cfg.Q)
              .eigenvalues()
              .minCoeff() < -1e-12) {
    throw ConfigError("mpc.q", "must be symmetric positive semi-definite");
  }
  if (!cfg.R.isApprox(cfg.R.transpose()) ||
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(cfg.R)
              .eigenvalues()
              .minCoeff() < -1e-12) {
    throw ConfigError("mpc.r", "must be symmetric positive semi-definite");
  }
}

CondensedProblem BuildCondensedProblem(const KinematicState& current,
                                       std::span<const ReferencePoint> window,
                                       const Eigen::Vector2d& prev_input_error,
                                       const MpcConfig& cfg) {
  const int np = cfg.prediction_horizon;
  const int nc = cfg.control_horizon;
  if (static_cast<int>(window.size()) < np + 1) {
    throw Error("reference window holds " + std::to_string(window.size()) +
                " points, MPC needs " + std::to_string(np + 1));
  }
  const Eigen::Index nu = 2 * nc;
  Eigen::Vector3d free(current.x - window[0].x, current.y - window[0].y,
                       WrapAngle(current.yaw - window[0].yaw));
  Eigen::MatrixXd forced = Eigen::MatrixXd::Zero(3, nu);

  CondensedProblem p;
  p.H = Eigen::MatrixXd::Zero(nu, nu);
  p.g = Eigen::VectorXd::Zero(nu);
  for (int j = 0; j < np; ++j) {
    const ErrorModel m =
        LinearizeErrorModel(window[j], cfg.wheelbase, cfg.sample_time);
    free = m.A * free + m.B * prev_input_error;
    forced = m.A * forced;
    // Input error at step j accumulates increments 0..min(j, nc-1).
    for (int i = 0; i <= std::min(j, nc - 1); ++i) {
      forced.middleCols(2 * i, 2) += m.B;
    }
    p.H.noalias() += forced.transpose() * cfg.Q * forced;
    p.g.noalias() += forced.transpose() * cfg.Q * free;
  }
  for (int i = 0; i < nc; ++i) p.H.block(2 * i, 2 * i, 2, 2) += cfg.R;
  p.H *= 2.0;
  p.g *= 2.0;
  return p;
}

MpcSolution MpcStep(const KinematicState& current,
                    std::span<const ReferencePoint> window,
                    const Eigen::Vector2d& prev_input_error,
                    const MpcConfig& cfg) {
  const CondensedProblem p =
      BuildCondensedProblem(current, window, prev_input_error, cfg);
  const Eigen::Index nu = p.g.size();
  Eigen::VectorXd bound(nu);
  for (Eigen::Index i = 0; i < nu; ++i) bound[i] = cfg.du_max[i % 2];

  MpcSolution sol;
  const Eigen::VectorXd unconstrained = p.H.ldlt().solve(-p.g);
  const double excess =
      (unconstrained.cwiseAbs() - bound).cwiseMax(0.0).maxCoeff();
  if (excess <= 0.0) {
    sol.sequence = unconstrained;
  } else {
    // The slack widens every box symmetrically at cost rho * slack^2; the
    // optimal value is convex in the slack, so a golden search suffices.
    auto solve = [&](double slack) {
      const Eigen::VectorXd b = bound.array() + slack;
      return SolveBoxQp(p.H, p.g, -b, b, cfg.max_active_set_iterations);
    };
    auto total = [&](double slack) {
      return QuadraticValue(p.H, p.g, solve(slack)) + cfg.rho * slack * slack;
    };
    double slack = excess;
    if (cfg.rho > 0.0) {
      constexpr double kInvPhi = 0.6180339887498949;
      double lo = 0.0, hi = excess;
      double x1 = hi - kInvPhi * (hi - lo), x2 = lo + kInvPhi * (hi - lo);
      double f1 = total(x1), f2 = total(x2);
      for (int it = 0; it < 60 && hi - lo > 1e-10; ++it) {
        if (f1 < f2) {
          hi = x2, x2 = x1, f2 = f1;
          x1 = hi - kInvPhi * (hi - lo);
          f1 = total(x1);
        } else {
          lo = x1, x1 = x2, f1 = f2;
          x2 = lo + kInvPhi * (hi - lo);
          f2 = total(x2);
        }
      }
      slack = 0.5 * (lo + hi);
      if (total(0.0) <= total(slack)) slack = 0.0;
    }
    sol.slack = slack;
    sol.sequence = solve(slack);
  }
  sol.du = sol.sequence.head<2>();
  return sol;
}

std::vector<ReferencePoint> PlanReference(const QuinticPair& plan, double dt,
                                          double wheelbase, int padding) {
  std::vector<ReferencePoint> out;
  for (const auto& s : SampleTrajectory(plan, dt)) {
    out.push_back(ReferenceFromSample(s, wheelbase));
  }
  const TrajectorySample end = SampleAt(plan, plan.t_end);
  for (int i = 1; i <= padding; ++i) {
    ReferencePoint r;
    r.x = end.x + end.vx * dt * i;
    r.y = end.y;
    r.yaw = 0.0;
    r.speed = end.vx;
    r.steer = 0.0;
    out.push_back(r);
  }
  return out;
}

MpcTracker::MpcTracker(const QuinticPair& plan, MpcConfig cfg)
    : cfg_(std::move(cfg)) {
  Validate(cfg_);
  reference_ = PlanReference(plan, cfg_.sample_time, cfg_.wheelbase,
                             cfg_.prediction_horizon + 1);
  ticks_ = static_cast<int>(reference_.size()) - cfg_.prediction_horizon - 1;
}

KinematicState MpcTracker::InitialState() const {
  const auto& r = reference_.front();
  return {r.x, r.y, r.yaw, r.speed, r.steer, cfg_.wheelbase};
}

KinematicState MpcTracker::Step(const KinematicState& current, int tick) {
  const std::span<const ReferencePoint> window(
      reference_.data() + tick,
      static_cast<std::size_t>(cfg_.prediction_horizon) + 1);
  const MpcSolution sol = MpcStep(current, window, input_error_, cfg_);
  input_error_ += sol.du;
  KinematicState next = current;
  next.speed = std::max(0.0, window[0].speed + input_error_[0]);
  next.steer = std::clamp(window[0].steer + input_error_[1], -cfg_.max_steer,
                          cfg_.max_steer);
  next.wheelbase = cfg_.wheelbase;
  next = StepKinematics(next, cfg_.sample_time);
  return next;
}

TrackingResult TrackTrajectory(const QuinticPair& plan, const MpcConfig& cfg,
                               const Eigen::Vector3d& initial_offset) {
  MpcTracker tracker(plan, cfg);
  KinematicState state = tracker.InitialState();
  state.x += initial_offset[0];
  state.y += initial_offset[1];
  state.yaw += initial_offset[2];

  TrackingResult out;
  auto record = [&](const KinematicState& s, int tick) {
    const auto& r = tracker.reference(tick);
    const double pos = std::hypot(s.x - r.x, s.y - r.y);
    out.states.push_back(s);
    out.position_error.push_back(pos);
    out.lateral_error.push_back(s.y - r.y);
    if (!(pos <= kDivergence)) {
      throw TrackingFailure("tracking diverged: position error " +
                                std::to_string(pos) + " m at tick " +
                                std::to_string(tick),
                            tick);
    }
  };
  record(state, 0);
  for (int k = 0; k + 1 < tracker.ticks(); ++k) {
    state = tracker.Step(state, k);
    record(state, k + 1);
  }
  double pos2 = 0.0, lat2 = 0.0;
  for (std::size_t i = 0; i < out.states.size(); ++i) {
    pos2 += out.position_error[i] * out.position_error[i];
    lat2 += out.lateral_error[i] * out.lateral_error[i];
  }
  const auto n = static_cast<double>(out.states.size());
  out.rms_position = std::sqrt(pos2 / n);
  out.rms_lateral = std::sqrt(lat2 / n);
  return out;
}

}  // namespace lanepareto
