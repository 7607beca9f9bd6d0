#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "lanepareto/trajectory.h"

namespace lanepareto {

// Rear-axle kinematic vehicle: x' = v cos(yaw), y' = v sin(yaw),
// yaw' = v tan(steer) / wheelbase.
struct KinematicState {
  double x = 0.0;
  double y = 0.0;
  double yaw = 0.0;
  double speed = 0.0;  // rear-axle speed input v_r
  double steer = 0.0;  // front steering angle input
  double wheelbase = 2.7;
};

// Throws InfeasibleError for |steer| >= pi/2.
KinematicState StepKinematics(const KinematicState& s, double dt);

struct ReferencePoint {
  double x = 0.0;
  double y = 0.0;
  double yaw = 0.0;
  double speed = 0.0;
  double steer = 0.0;
};

ReferencePoint ReferenceFromSample(const TrajectorySample& s, double wheelbase);

// First-order discretisation of the kinematic model about a reference point,
// acting on the state error (x, y, yaw) and input error (speed, steer).
struct ErrorModel {
  Eigen::Matrix3d A = Eigen::Matrix3d::Identity();
  Eigen::Matrix<double, 3, 2> B = Eigen::Matrix<double, 3, 2>::Zero();
  ReferencePoint reference;
  double sample_time = 0.0;
};

ErrorModel LinearizeErrorModel(const ReferencePoint& reference,
                               double wheelbase, double sample_time);

struct MpcConfig {
  int prediction_horizon = 20;
  int control_horizon = 5;
  Eigen::Matrix3d Q = Eigen::Vector3d(10.0, 10.0, 1.0).asDiagonal();
  Eigen::Matrix2d R = Eigen::Vector2d(0.1, 0.1).asDiagonal();
  double rho = 100.0;
  // Per-step bound on the input increment (speed m/s, steer rad).
  Eigen::Vector2d du_max = Eigen::Vector2d(1.0, 0.1);
  double sample_time = 0.1;
  double wheelbase = 2.7;
  double max_steer = 0.6;
  int max_active_set_iterations = 20;
};

void Validate(const MpcConfig& cfg);

// Quadratic 0.5 dU' H dU + g' dU in the stacked input increments.
struct CondensedProblem {
  Eigen::MatrixXd H;
  Eigen::VectorXd g;
};

// `window[0]` is the reference at the current tick; it must hold at least
// prediction_horizon + 1 points. `prev_input_error` is the input deviation
// from the reference applied on the previous tick.
CondensedProblem BuildCondensedProblem(const KinematicState& current,
                                       std::span<const ReferencePoint> window,
                                       const Eigen::Vector2d& prev_input_error,
                                       const MpcConfig& cfg);

struct MpcSolution {
  Eigen::Vector2d du = Eigen::Vector2d::Zero();
  double slack = 0.0;
  Eigen::VectorXd sequence;
};

// One receding-horizon step: returns the first increment of the optimal
// sequence. Throws Error when the window is too short.
MpcSolution MpcStep(const KinematicState& current,
                    std::span<const ReferencePoint> window,
                    const Eigen::Vector2d& prev_input_error,
                    const MpcConfig& cfg);

// Reference samples of a plan at dt spacing, padded past t_end with a
// straight constant-speed continuation so every tick sees a full window.
std::vector<ReferencePoint> PlanReference(const QuinticPair& plan, double dt,
                                          double wheelbase, int padding);

// Stateful closed-loop controller over one plan.
class MpcTracker {
 public:
  MpcTracker(const QuinticPair& plan, MpcConfig cfg);

  // Initial state on the plan, inputs equal to the reference inputs.
  KinematicState InitialState() const;
  // Advances `current` by one sample period from `tick`.
  KinematicState Step(const KinematicState& current, int tick);
  const ReferencePoint& reference(int tick) const { return reference_[tick]; }
  int ticks() const { return ticks_; }

 private:
  MpcConfig cfg_;
  std::vector<ReferencePoint> reference_;
  Eigen::Vector2d input_error_ = Eigen::Vector2d::Zero();
  int ticks_ = 0;
};

struct TrackingResult {
  std::vector<KinematicState> states;   // one per tick, including the start
  std::vector<double> position_error;  // m
  std::vector<double> lateral_error;   // m, y - y_ref
  double rms_position = 0.0;
  double rms_lateral = 0.0;
};

// Closed-loop rollout from the plan start (optionally offset by
// (dx, dy, dyaw)) to t_end. Throws TrackingFailure once the position error
// exceeds 5 m.
TrackingResult TrackTrajectory(
    const QuinticPair& plan, const MpcConfig& cfg,
    const Eigen::Vector3d& initial_offset = Eigen::Vector3d::Zero());

}  // namespace lanepareto
