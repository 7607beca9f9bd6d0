#include "oracles.h"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace lanepareto::oracle {

double Bisect(const std::function<double(double)>& f, double lo, double hi,
              double tol) {
  double flo = f(lo);
  if (flo * f(hi) > 0.0) throw std::runtime_error("bracket has no sign change");
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if ((fm > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double IdmEquilibriumByBisection(double v, const IdmParams& p, double length) {
  auto accel = [&](double spacing) {
    FollowingPair pair{v, 0.0, v, 0.0, spacing, length};
    return IdmAccel(pair, p);
  };
  return Bisect(accel, length + 1e-9, 1e5, 1e-11);
}

double LcmEquilibriumByBisection(double v, const LcmParams& p, double length) {
  auto accel = [&](double spacing) {
    FollowingPair pair{v, 0.0, v, 0.0, spacing, length};
    return LcmAccel(pair, p);
  };
  return Bisect(accel, length + 1e-9, 1e5, 1e-11);
}

double PairJerk(const std::function<double(const FollowingPair&)>& accel,
                const FollowingPair& p, double h) {
  auto at = [&](double t) {
    FollowingPair q = p;
    q.v = p.v + p.a * t;
    q.leader_v = p.leader_v + p.leader_a * t;
    q.spacing = p.spacing + (p.leader_v - p.v) * t + 0.5 * (p.leader_a - p.a) * t * t;
    return accel(q);
  };
  return (at(h) - at(-h)) / (2.0 * h);
}

std::array<double, 6> QuinticAbsolute(double t0, double t1,
                                      const std::array<double, 3>& start,
                                      const std::array<double, 3>& end) {
  Eigen::Matrix<double, 6, 6> M = Eigen::Matrix<double, 6, 6>::Zero();
  Eigen::Matrix<double, 6, 1> rhs;
  const double ts[2] = {t0, t1};
  for (int side = 0; side < 2; ++side) {
    const double t = ts[side];
    for (int i = 0; i < 6; ++i) {
      M(3 * side, i) = std::pow(t, i);
      if (i >= 1) M(3 * side + 1, i) = i * std::pow(t, i - 1);
      if (i >= 2) M(3 * side + 2, i) = i * (i - 1) * std::pow(t, i - 2);
    }
    const auto& bc = side == 0 ? start : end;
    for (int r = 0; r < 3; ++r) rhs[3 * side + r] = bc[r];
  }
  const Eigen::Matrix<double, 6, 1> c = M.colPivHouseholderQr().solve(rhs);
  return {c[0], c[1], c[2], c[3], c[4], c[5]};
}

DenseSeparation DenseEllipseSeparation(const EllipseBoundary& a,
                                       const EllipseBoundary& b, int samples) {
  auto points = [samples](const EllipseBoundary& e) {
    std::vector<Eigen::Vector2d> pts;
    const double c = std::cos(e.heading), s = std::sin(e.heading);
    for (int i = 0; i < samples; ++i) {
      const double t = 2.0 * std::numbers::pi * i / samples;
      // Local frame (major axis along u) mapped by the literal boundary
      // convention M = dx cos - dy sin, N = dx sin + dy cos, inverted.
      const double m = e.semi_major * std::cos(t);
      const double n = e.semi_minor * std::sin(t);
      pts.emplace_back(e.center.x() + m * c + n * s,
                       e.center.y() - m * s + n * c);
    }
    return pts;
  };
  auto inside = [](const EllipseBoundary& e, const Eigen::Vector2d& p) {
    const double dx = p.x() - e.center.x(), dy = p.y() - e.center.y();
    const double c = std::cos(e.heading), s = std::sin(e.heading);
    const double m = dx * c - dy * s, n = dx * s + dy * c;
    return m * m / (e.semi_major * e.semi_major) +
               n * n / (e.semi_minor * e.semi_minor) <
           1.0;
  };
  const auto pa = points(a), pb = points(b);
  DenseSeparation out;
  out.distance = std::numeric_limits<double>::infinity();
  for (const auto& p : pa) {
    for (const auto& q : pb) out.distance = std::min(out.distance, (p - q).norm());
  }
  for (const auto& p : pa) out.overlapping = out.overlapping || inside(b, p);
  for (const auto& q : pb) out.overlapping = out.overlapping || inside(a, q);
  out.overlapping = out.overlapping || inside(a, b.center) || inside(b, a.center);
  return out;
}

namespace {

bool Dominates(const Evaluation& a, const Evaluation& b) {
  const bool fa = a.violation <= 0.0, fb = b.violation <= 0.0;
  if (fa && !fb) return true;
  if (!fa && fb) return false;
  if (!fa && !fb) return a.violation < b.violation;
  bool strictly = false;
  for (int k = 0; k < 2; ++k) {
    if (a.objectives[k] > b.objectives[k]) return false;
    if (a.objectives[k] < b.objectives[k]) strictly = true;
  }
  return strictly;
}

}  // namespace

std::vector<int> PeelRanks(const std::vector<Evaluation>& pop) {
  const std::size_t n = pop.size();
  std::vector<int> rank(n, -1);
  std::size_t assigned = 0;
  for (int level = 0; assigned < n; ++level) {
    std::vector<std::size_t> layer;
    for (std::size_t i = 0; i < n; ++i) {
      if (rank[i] >= 0) continue;
      bool dominated = false;
      for (std::size_t j = 0; j < n && !dominated; ++j) {
        dominated = j != i && rank[j] < 0 && Dominates(pop[j], pop[i]);
      }
      if (!dominated) layer.push_back(i);
    }
    for (std::size_t i : layer) rank[i] = level;
    assigned += layer.size();
  }
  return rank;
}

void EulerJacobian(const ReferencePoint& ref, double wheelbase, double T,
                   double h, Eigen::Matrix3d* A, Eigen::Matrix<double, 3, 2>* B) {
  auto step = [&](const Eigen::Vector3d& q, const Eigen::Vector2d& u) {
    const Eigen::Vector3d f(u[0] * std::cos(q[2]), u[0] * std::sin(q[2]),
                            u[0] * std::tan(u[1]) / wheelbase);
    return Eigen::Vector3d(q + T * f);
  };
  const Eigen::Vector3d q(ref.x, ref.y, ref.yaw);
  const Eigen::Vector2d u(ref.speed, ref.steer);
  for (int j = 0; j < 3; ++j) {
    Eigen::Vector3d dq = Eigen::Vector3d::Zero();
    dq[j] = h;
    A->col(j) = (step(q + dq, u) - step(q - dq, u)) / (2.0 * h);
  }
  for (int j = 0; j < 2; ++j) {
    Eigen::Vector2d du = Eigen::Vector2d::Zero();
    du[j] = h;
    B->col(j) = (step(q, u + du) - step(q, u - du)) / (2.0 * h);
  }
}

Eigen::VectorXd StackedLeastSquares(const KinematicState& current,
                                    const std::vector<ReferencePoint>& window,
                                    const Eigen::Vector2d& prev_input_error,
                                    const MpcConfig& cfg) {
  const int np = cfg.prediction_horizon, nc = cfg.control_horizon;
  const int nu = 2 * nc;
  // Error trajectory for a given increment sequence, by direct simulation.
  auto simulate = [&](const Eigen::VectorXd& du) {
    Eigen::VectorXd stacked(3 * np);
    Eigen::Vector3d e(current.x - window[0].x, current.y - window[0].y,
                      std::remainder(current.yaw - window[0].yaw,
                                     2.0 * std::numbers::pi));
    Eigen::Vector2d u = prev_input_error;
    for (int j = 0; j < np; ++j) {
      if (j < nc) u += du.segment<2>(2 * j);
      const ReferencePoint& r = window[j];
      // Partial derivatives of the Euler step, written out by hand.
      const double T = cfg.sample_time, l = cfg.wheelbase;
      Eigen::Matrix3d A = Eigen::Matrix3d::Identity();
      A(0, 2) = -T * r.speed * std::sin(r.yaw);
      A(1, 2) = T * r.speed * std::cos(r.yaw);
      Eigen::Matrix<double, 3, 2> B;
      B << T * std::cos(r.yaw), 0.0, T * std::sin(r.yaw), 0.0,
          T * std::tan(r.steer) / l,
          T * r.speed / (l * std::pow(std::cos(r.steer), 2));
      e = A * e + B * u;
      stacked.segment<3>(3 * j) = e;
    }
    return stacked;
  };
  const Eigen::VectorXd base = simulate(Eigen::VectorXd::Zero(nu));
  Eigen::MatrixXd M(3 * np, nu);
  for (int k = 0; k < nu; ++k) {
    Eigen::VectorXd unit = Eigen::VectorXd::Zero(nu);
    unit[k] = 1.0;
    M.col(k) = simulate(unit) - base;
  }
  const Eigen::Matrix3d q_half = cfg.Q.llt().matrixU();
  const Eigen::Matrix2d r_half = cfg.R.llt().matrixU();
  Eigen::MatrixXd lhs = Eigen::MatrixXd::Zero(3 * np + nu, nu);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(3 * np + nu);
  for (int j = 0; j < np; ++j) {
    lhs.block(3 * j, 0, 3, nu) = q_half * M.block(3 * j, 0, 3, nu);
    rhs.segment<3>(3 * j) = -q_half * base.segment<3>(3 * j);
  }
  for (int i = 0; i < nc; ++i) lhs.block(3 * np + 2 * i, 2 * i, 2, 2) = r_half;
  return lhs.colPivHouseholderQr().solve(rhs);
}

Objectives Zdt1(std::span<const double> x) {
  const double f1 = x[0];
  double sum = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) sum += x[i];
  const double g = 1.0 + 9.0 * sum / static_cast<double>(x.size() - 1);
  return {f1, g * (1.0 - std::sqrt(f1 / g))};
}

}  // namespace lanepareto::oracle
