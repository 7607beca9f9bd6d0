#include "lanepareto/collision.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "lanepareto/errors.h"

namespace lanepareto {
namespace {

constexpr int kCoarseSamples = 96;
constexpr int kRefinedMinima = 3;
constexpr double kOverlapTolerance = 1e-12;

Eigen::Vector2d ToLocal(const EllipseBoundary& e, const Eigen::Vector2d& p) {
  const Eigen::Vector2d d = p - e.center;
  const double c = std::cos(e.heading), s = std::sin(e.heading);
  return {d.x() * c - d.y() * s, d.x() * s + d.y() * c};
}

Eigen::Vector2d ToWorld(const EllipseBoundary& e, const Eigen::Vector2d& m) {
  const double c = std::cos(e.heading), s = std::sin(e.heading);
  return e.center + Eigen::Vector2d(m.x() * c + m.y() * s,
                                    -m.x() * s + m.y() * c);
}

// Root of (r0 z0/(s+r0))^2 + (z1/(s+1))^2 = 1 by bisection (Eberly).
double EllipseRoot(double r0, double z0, double z1, double g) {
  const double n0 = r0 * z0;
  double s0 = z1 - 1.0;
  double s1 = g < 0.0 ? 0.0 : std::hypot(n0, z1) - 1.0;
  double s = 0.0;
  for (int i = 0; i < 1100; ++i) {
    s = 0.5 * (s0 + s1);
    if (s == s0 || s == s1) break;
    const double ratio0 = n0 / (s + r0);
    const double ratio1 = z1 / (s + 1.0);
    g = ratio0 * ratio0 + ratio1 * ratio1 - 1.0;
    if (g > 0.0) {
      s0 = s;
    } else if (g < 0.0) {
      s1 = s;
    } else {
      break;
    }
  }
  return s;
}

// Unsigned distance from (y0, y1) in the first quadrant to the axis-aligned
// ellipse with semi-axes e0 >= e1.
double QuadrantDistance(double e0, double e1, double y0, double y1) {
  if (y1 > 0.0) {
    if (y0 > 0.0) {
      const double z0 = y0 / e0, z1 = y1 / e1;
      const double g = z0 * z0 + z1 * z1 - 1.0;
      if (g == 0.0) return 0.0;
      const double r0 = (e0 / e1) * (e0 / e1);
      const double sbar = EllipseRoot(r0, z0, z1, g);
      const double x0 = r0 * y0 / (sbar + r0);
      const double x1 = y1 / (sbar + 1.0);
      return std::hypot(x0 - y0, x1 - y1);
    }
    return std::abs(y1 - e1);
  }
  const double numer0 = e0 * y0;
  const double denom0 = e0 * e0 - e1 * e1;
  if (numer0 < denom0) {
    const double xde0 = numer0 / denom0;
    const double x0 = e0 * xde0;
    const double x1 = e1 * std::sqrt(std::max(0.0, 1.0 - xde0 * xde0));
    return std::hypot(x0 - y0, x1);
  }
  return std::abs(y0 - e0);
}

double SignedLocalDistance(double ca, double cb, Eigen::Vector2d m) {
  double y0 = std::abs(m.x()), y1 = std::abs(m.y());
  double e0 = ca, e1 = cb;
  if (e0 < e1) {
    std::swap(e0, e1);
    std::swap(y0, y1);
  }
  const double d = QuadrantDistance(e0, e1, y0, y1);
  const double value = (m.x() / ca) * (m.x() / ca) + (m.y() / cb) * (m.y() / cb);
  return value < 1.0 ? -d : d;
}

// Golden-section refinement of f on [lo, hi].
template <typename F>
std::pair<double, double> GoldenMinimum(F&& f, double lo, double hi) {
  constexpr double kInvPhi = 0.6180339887498949;
  double x1 = hi - kInvPhi * (hi - lo);
  double x2 = lo + kInvPhi * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  for (int i = 0; i < 80 && hi - lo > 1e-12; ++i) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - kInvPhi * (hi - lo);
      f1 = f(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + kInvPhi * (hi - lo);
      f2 = f(x2);
    }
  }
  return f1 < f2 ? std::pair{x1, f1} : std::pair{x2, f2};
}

}  // namespace

double WorstCornerValue(const EllipseRadii& radii, double length,
                        double width) {
  const double m = 0.5 * length / radii.semi_major;
  const double n = 0.5 * width / radii.semi_minor;
  return m * m + n * n;
}

EllipseBoundary MakeBoundary(const Pose& pose, const EllipseRadii& radii) {
  return {Eigen::Vector2d(pose.x, pose.y), pose.heading, radii.semi_major,
          radii.semi_minor};
}

double BoundaryValue(const EllipseBoundary& e, const Eigen::Vector2d& p) {
  const Eigen::Vector2d m = ToLocal(e, p);
  return (m.x() / e.semi_major) * (m.x() / e.semi_major) +
         (m.y() / e.semi_minor) * (m.y() / e.semi_minor);
}

Eigen::Vector2d BoundaryPoint(const EllipseBoundary& e, double alpha) {
  return ToWorld(e, {e.semi_major * std::cos(alpha),
                     e.semi_minor * std::sin(alpha)});
}

double SignedDistanceToBoundary(const EllipseBoundary& e,
                                const Eigen::Vector2d& p) {
  return SignedLocalDistance(e.semi_major, e.semi_minor, ToLocal(e, p));
}

Separation MinSeparation(const EllipseBoundary& e1,
                         const EllipseBoundary& e2) {
  if (BoundaryValue(e2, e1.center) < 1.0 ||
      BoundaryValue(e1, e2.center) < 1.0) {
    return {0.0, true};
  }
  // Minimise the signed distance from e1's boundary to e2 over e1's angle.
  auto f = [&](double alpha) {
    return SignedDistanceToBoundary(e2, BoundaryPoint(e1, alpha));
  };
  constexpr double kStep = 2.0 * std::numbers::pi / kCoarseSamples;
  std::array<double, kCoarseSamples> coarse{};
  for (int i = 0; i < kCoarseSamples; ++i) coarse[i] = f(i * kStep);

  std::vector<int> minima;
  for (int i = 0; i < kCoarseSamples; ++i) {
    const double prev = coarse[(i + kCoarseSamples - 1) % kCoarseSamples];
    const double next = coarse[(i + 1) % kCoarseSamples];
    if (coarse[i] <= prev && coarse[i] <= next) minima.push_back(i);
  }
  std::sort(minima.begin(), minima.end(),
            [&](int a, int b) { return coarse[a] < coarse[b]; });
  if (minima.size() > kRefinedMinima) minima.resize(kRefinedMinima);

  double best = std::numeric_limits<double>::infinity();
  for (int i : minima) {
    best = std::min(best, coarse[i]);
    if (best < -kOverlapTolerance) break;
    const auto [alpha, value] =
        GoldenMinimum(f, (i - 1) * kStep, (i + 1) * kStep);
    (void)alpha;
    best = std::min(best, value);
  }
  if (best < -kOverlapTolerance) return {0.0, true};
  return {std::max(best, 0.0), false};
}

bool Overlapping(const EllipseBoundary& e1, const EllipseBoundary& e2) {
  const double reach = std::max(e1.semi_major, e1.semi_minor) +
                       std::max(e2.semi_major, e2.semi_minor);
  if ((e1.center - e2.center).squaredNorm() > reach * reach) return false;
  const double inner = std::min(e1.semi_major, e1.semi_minor) +
                       std::min(e2.semi_major, e2.semi_minor);
  if ((e1.center - e2.center).squaredNorm() < inner * inner) return true;
  return MinSeparation(e1, e2).overlapping;
}

double ClearanceOverHorizon(std::span<const Pose> subject,
                            const std::vector<std::vector<Pose>>& neighbors,
                            const EllipseRadii& radii) {
  for (const auto& trace : neighbors) {
    if (trace.size() != subject.size()) {
      throw Error("neighbour trace length " + std::to_string(trace.size()) +
                  " does not match subject length " +
                  std::to_string(subject.size()));
    }
  }
  if (subject.empty()) return 0.0;
  std::size_t overlapping_ticks = 0;
  for (std::size_t k = 0; k < subject.size(); ++k) {
    const EllipseBoundary own = MakeBoundary(subject[k], radii);
    for (const auto& trace : neighbors) {
      if (Overlapping(own, MakeBoundary(trace[k], radii))) {
        ++overlapping_ticks;
        break;
      }
    }
  }
  return static_cast<double>(overlapping_ticks) /
         static_cast<double>(subject.size());
}

std::vector<Pose> PosesOf(std::span<const TrajectorySample> samples) {
  std::vector<Pose> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back({s.x, s.y, s.heading});
  return out;
}

std::vector<Pose> PosesOf(std::span<const VehicleState> states) {
  std::vector<Pose> out;
  out.reserve(states.size());
  for (const auto& s : states) out.push_back({s.x, s.y, s.heading});
  return out;
}

}  // namespace lanepareto
