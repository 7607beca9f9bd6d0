#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "lanepareto/trajectory.h"
#include "lanepareto/vehicle.h"

namespace lanepareto {

struct EllipseRadii {
  double semi_major = 2.5;  // C_a, m
  double semi_minor = 1.0;  // C_b, m
};

// Collision boundary M^2/C_a^2 + N^2/C_b^2 = 1 around a vehicle centre with
//   M = dx cos(theta) - dy sin(theta),  N = dx sin(theta) + dy cos(theta).
struct EllipseBoundary {
  Eigen::Vector2d center = Eigen::Vector2d::Zero();
  double heading = 0.0;
  double semi_major = 2.5;
  double semi_minor = 1.0;
};

struct Pose {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;
};

struct Separation {
  double distance = 0.0;  // m, 0 when overlapping or touching
  bool overlapping = false;
};

// Largest boundary value over the four corners of a length x width rectangle;
// <= 1 means the ellipse circumscribes the vehicle footprint.
double WorstCornerValue(const EllipseRadii& radii, double length,
                        double width);

EllipseBoundary MakeBoundary(const Pose& pose, const EllipseRadii& radii);

double BoundaryValue(const EllipseBoundary& e, const Eigen::Vector2d& p);

// Point on the boundary at parameter angle alpha (M = C_a cos, N = C_b sin).
Eigen::Vector2d BoundaryPoint(const EllipseBoundary& e, double alpha);

// Signed Euclidean distance from p to the boundary of e (negative inside).
double SignedDistanceToBoundary(const EllipseBoundary& e,
                                const Eigen::Vector2d& p);

Separation MinSeparation(const EllipseBoundary& e1, const EllipseBoundary& e2);

// Overlap test only; cheaper than MinSeparation for far-apart pairs.
bool Overlapping(const EllipseBoundary& e1, const EllipseBoundary& e2);

// Fraction of ticks at which the lane changer's boundary overlaps any
// neighbour's. Every neighbour trace must be as long as `subject`; throws
// Error otherwise.
double ClearanceOverHorizon(std::span<const Pose> subject,
                            const std::vector<std::vector<Pose>>& neighbors,
                            const EllipseRadii& radii);

std::vector<Pose> PosesOf(std::span<const TrajectorySample> samples);
std::vector<Pose> PosesOf(std::span<const VehicleState> states);

}  // namespace lanepareto
