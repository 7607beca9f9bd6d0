#pragma once

#include <array>
#include <vector>

namespace lanepareto {

// Kinematic limits applied to the executed lane change plus the duration and
// displacement brackets of the manoeuvre.
struct KinematicBounds {
  double v_min = 5.0;
  double v_max = 30.0;
  double a_min = -8.0;
  double a_max = 8.0;
  double j_min = -8.0;
  double j_max = 8.0;
  double t_lc_min = 1.0;
  double t_lc_max = 16.0;
  double x_lc_min = 5.0;
  double x_lc_max = 480.0;
};

void Validate(const KinematicBounds& b);

// Position / speed / acceleration along one axis.
struct AxisState {
  double position = 0.0;
  double speed = 0.0;
  double accel = 0.0;
};

// Target of the longitudinal polynomial, relative to the start position.
struct LongitudinalEnd {
  double displacement = 0.0;
  double speed = 0.0;
  double accel = 0.0;
};

// Quintic pair in local time tau = t - t_start:
//   x(tau) = sum a[i] tau^i,  y(tau) = sum b[i] tau^i.
struct QuinticPair {
  std::array<double, 6> a{};
  std::array<double, 6> b{};
  double t_start = 0.0;
  double t_end = 0.0;

  double duration() const { return t_end - t_start; }
};

struct TrajectorySample {
  double t = 0.0;
  double x = 0.0, y = 0.0;
  double vx = 0.0, vy = 0.0;
  double ax = 0.0, ay = 0.0;
  double jx = 0.0, jy = 0.0;
  double heading = 0.0;
};

// Solves the two boundary-value problems (each a 6x6 linear system). The
// lateral polynomial runs from y = 0 at rest to y = lane_width at rest.
// Throws InfeasibleError for a non-positive duration or a singular system.
QuinticPair SolveQuintic(const AxisState& start, const LongitudinalEnd& end,
                         double t_start, double duration, double lane_width);

// Evaluates value and the first three derivatives of a quintic at tau.
std::array<double, 4> EvaluateQuintic(const std::array<double, 6>& c,
                                      double tau);

TrajectorySample SampleAt(const QuinticPair& q, double t);

// Samples t_start, t_start + dt, ..., always ending exactly at t_end.
std::vector<TrajectorySample> SampleTrajectory(const QuinticPair& q,
                                               double dt);

// 0 when every sample satisfies the speed/acceleration/jerk limits, the
// duration and displacement brackets hold and y is non-decreasing; otherwise
// the sum over constraint types of the worst excess, each divided by the
// magnitude of the bound it crosses.
double CheckKinematicLimits(const std::vector<TrajectorySample>& samples,
                            const KinematicBounds& bounds);

}  // namespace lanepareto
