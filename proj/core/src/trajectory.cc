#include "lanepareto/trajectory.h"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "lanepareto/errors.h"

namespace lanepareto {
namespace {

constexpr double kMinDuration = 1e-6;
constexpr double kSlack = 1e-9;

void RequireOrdered(double lo, double hi, const char* lo_name,
                    const char* hi_name) {
  if (!(lo <= hi)) {
    throw ConfigError(std::string(lo_name) + "/" + hi_name,
                      "lower bound exceeds upper bound");
  }
}

// Boundary conditions in normalised time s = tau / T, so the system matrix is
// constant and well conditioned for any duration.
const Eigen::PartialPivLU<Eigen::Matrix<double, 6, 6>>& NormalisedSystem() {
  static const auto lu = [] {
    Eigen::Matrix<double, 6, 6> m;
    m << 1, 0, 0, 0, 0, 0,  //
        0, 1, 0, 0, 0, 0,   //
        0, 0, 2, 0, 0, 0,   //
        1, 1, 1, 1, 1, 1,   //
        0, 1, 2, 3, 4, 5,   //
        0, 0, 2, 6, 12, 20;
    return Eigen::PartialPivLU<Eigen::Matrix<double, 6, 6>>(m);
  }();
  return lu;
}

std::array<double, 6> SolveAxis(const AxisState& start, const AxisState& end,
                                double duration) {
  Eigen::Matrix<double, 6, 1> rhs;
  const double t2 = duration * duration;
  rhs << start.position, start.speed * duration, start.accel * t2,
      end.position, end.speed * duration, end.accel * t2;
  const Eigen::Matrix<double, 6, 1> scaled = NormalisedSystem().solve(rhs);
  std::array<double, 6> c{};
  double scale = 1.0;
  for (int i = 0; i < 6; ++i) {
    if (!std::isfinite(scaled[i])) {
      throw InfeasibleError("quintic boundary system is singular");
    }
    c[i] = scaled[i] / scale;
    scale *= duration;
  }
  return c;
}

double Excess(double value, double bound, bool upper) {
  const double over = upper ? value - bound : bound - value;
  if (over <= kSlack) return 0.0;
  const double mag = std::abs(bound);
  return over / (mag > 0.0 ? mag : 1.0);
}

}  // namespace

void Validate(const KinematicBounds& b) {
  RequireOrdered(b.v_min, b.v_max, "bounds.v_min", "bounds.v_max");
  RequireOrdered(b.a_min, b.a_max, "bounds.a_min", "bounds.a_max");
  RequireOrdered(b.j_min, b.j_max, "bounds.j_min", "bounds.j_max");
  RequireOrdered(b.t_lc_min, b.t_lc_max, "bounds.t_lc_min", "bounds.t_lc_max");
  RequireOrdered(b.x_lc_min, b.x_lc_max, "bounds.x_lc_min", "bounds.x_lc_max");
  if (!(b.t_lc_min > 0.0)) {
    throw ConfigError("bounds.t_lc_min", "must be positive");
  }
}

QuinticPair SolveQuintic(const AxisState& start, const LongitudinalEnd& end,
                         double t_start, double duration, double lane_width) {
  if (!(duration > kMinDuration) || !std::isfinite(duration)) {
    throw InfeasibleError("quintic duration must be positive, got " +
                          std::to_string(duration));
  }
  if (!(lane_width > 0.0)) {
    throw InfeasibleError("lane width must be positive");
  }
  QuinticPair q;
  q.t_start = t_start;
  q.t_end = t_start + duration;
  q.a = SolveAxis(start,
                  {start.position + end.displacement, end.speed, end.accel},
                  duration);
  q.b = SolveAxis({0.0, 0.0, 0.0}, {lane_width, 0.0, 0.0}, duration);
  return q;
}

std::array<double, 4> EvaluateQuintic(const std::array<double, 6>& c,
                                      double tau) {
  // Horner for the value and each derivative.
  double p = c[5], d1 = 5 * c[5], d2 = 20 * c[5], d3 = 60 * c[5];
  for (int i = 4; i >= 0; --i) p = p * tau + c[i];
  for (int i = 4; i >= 1; --i) d1 = d1 * tau + i * c[i];
  for (int i = 4; i >= 2; --i) d2 = d2 * tau + i * (i - 1) * c[i];
  for (int i = 4; i >= 3; --i) d3 = d3 * tau + i * (i - 1) * (i - 2) * c[i];
  return {p, d1, d2, d3};
}

TrajectorySample SampleAt(const QuinticPair& q, double t) {
  const double tau = t - q.t_start;
  const auto x = EvaluateQuintic(q.a, tau);
  const auto y = EvaluateQuintic(q.b, tau);
  TrajectorySample s;
  s.t = t;
  s.x = x[0];
  s.vx = x[1];
  s.ax = x[2];
  s.jx = x[3];
  s.y = y[0];
  s.vy = y[1];
  s.ay = y[2];
  s.jy = y[3];
  s.heading = std::atan2(s.vy, s.vx);
  return s;
}

std::vector<TrajectorySample> SampleTrajectory(const QuinticPair& q,
                                               double dt) {
  std::vector<TrajectorySample> out;
  if (!(dt > 0.0)) return out;
  const double duration = q.duration();
  const auto steps =
      static_cast<long>(std::floor(duration / dt + 1e-9));
  out.reserve(static_cast<std::size_t>(steps) + 2);
  for (long i = 0; i <= steps; ++i) {
    out.push_back(SampleAt(q, q.t_start + static_cast<double>(i) * dt));
  }
  if (duration - static_cast<double>(steps) * dt > 1e-9) {
    out.push_back(SampleAt(q, q.t_end));
  } else {
    // Land exactly on t_end despite accumulated rounding.
    out.back() = SampleAt(q, q.t_end);
  }
  return out;
}

double CheckKinematicLimits(const std::vector<TrajectorySample>& samples,
                            const KinematicBounds& bounds) {
  if (samples.empty()) return 0.0;
  double v_hi = 0, v_lo = 0, a_hi = 0, a_lo = 0, j_hi = 0, j_lo = 0;
  double y_drop = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    const double speed = std::hypot(s.vx, s.vy);
    v_hi = std::max(v_hi, Excess(speed, bounds.v_max, true));
    v_lo = std::max(v_lo, Excess(speed, bounds.v_min, false));
    for (double a : {s.ax, s.ay}) {
      a_hi = std::max(a_hi, Excess(a, bounds.a_max, true));
      a_lo = std::max(a_lo, Excess(a, bounds.a_min, false));
    }
    for (double j : {s.jx, s.jy}) {
      j_hi = std::max(j_hi, Excess(j, bounds.j_max, true));
      j_lo = std::max(j_lo, Excess(j, bounds.j_min, false));
    }
    if (i > 0) y_drop += std::max(0.0, samples[i - 1].y - s.y);
  }
  const double duration = samples.back().t - samples.front().t;
  const double displacement = samples.back().x - samples.front().x;
  const double span = std::abs(samples.back().y - samples.front().y);
  double violation = v_hi + v_lo + a_hi + a_lo + j_hi + j_lo;
  violation += Excess(duration, bounds.t_lc_min, false) +
               Excess(duration, bounds.t_lc_max, true) +
               Excess(displacement, bounds.x_lc_min, false) +
               Excess(displacement, bounds.x_lc_max, true);
  if (y_drop > kSlack) violation += y_drop / std::max(span, 1.0);
  return violation;
}

}  // namespace lanepareto
