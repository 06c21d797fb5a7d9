#include "morphquad/trajectory.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace morphquad {

Eigen::Matrix<double, 1, 6> poly_basis(double t, int order) {
  Eigen::Matrix<double, 1, 6> b = Eigen::Matrix<double, 1, 6>::Zero();
  for (int j = order; j < 6; ++j) {
    double coeff = 1.0;
    for (int m = 0; m < order; ++m) coeff *= j - m;
    b(j) = coeff * std::pow(t, j - order);
  }
  return b;
}

void MincoTrajectory::solve(const BoundaryState& start, const BoundaryState& goal,
                            const Eigen::Matrix3Xd& q, const Eigen::VectorXd& durations) {
  const int K = static_cast<int>(durations.size());
  if (K < 1) throw Error(ErrorCode::kDegenerateTime, "trajectory needs at least one piece");
  if (q.cols() != K - 1) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("{} pieces need {} waypoints, got {}", K, K - 1, q.cols()));
  }
  for (int k = 0; k < K; ++k) {
    if (!(durations[k] > 0.0) || !std::isfinite(durations[k])) {
      throw Error(ErrorCode::kDegenerateTime,
                  fmt::format("piece {} has duration {}", k, durations[k]), k);
    }
  }
  start_ = start;
  goal_ = goal;
  q_ = q;
  durations_ = durations;

  const int n = 6 * K;
  system_.reset(n, 4, 2);
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(n, 3);

  for (int d = 0; d < 3; ++d) system_(d, d) = poly_basis(0.0, d)(d);
  rhs.row(0) = start.p.transpose();
  rhs.row(1) = start.v.transpose();
  rhs.row(2) = start.a.transpose();

  for (int i = 0; i + 1 < K; ++i) {
    const int row = 6 * i + 3;
    const int col = 6 * i;
    const auto pos = poly_basis(durations[i], 0);
    for (int j = 0; j < 6; ++j) system_(row, col + j) = pos(j);
    rhs.row(row) = q.col(i).transpose();
    for (int d = 0; d < 5; ++d) {
      const auto b = poly_basis(durations[i], d);
      for (int j = d; j < 6; ++j) system_(row + 1 + d, col + j) = b(j);
      system_(row + 1 + d, col + 6 + d) = -poly_basis(0.0, d)(d);
    }
  }

  const int tail = n - 3;
  for (int d = 0; d < 3; ++d) {
    const auto b = poly_basis(durations[K - 1], d);
    for (int j = d; j < 6; ++j) system_(tail + d, 6 * (K - 1) + j) = b(j);
  }
  rhs.row(tail) = goal.p.transpose();
  rhs.row(tail + 1) = goal.v.transpose();
  rhs.row(tail + 2) = goal.a.transpose();

  if (!system_.factorize()) {
    throw Error(ErrorCode::kDegenerateTime, "coefficient system is singular");
  }
  system_.solve(rhs);
  coeffs_ = rhs;
}

std::pair<int, double> MincoTrajectory::locate(double t) const {
  const int K = pieces();
  int k = 0;
  while (k < K - 1 && t > durations_[k]) {
    t -= durations_[k];
    ++k;
  }
  return {k, std::clamp(t, 0.0, durations_[k])};
}

Vec3 MincoTrajectory::evaluate(double t, int order) const {
  if (pieces() == 0) throw Error(ErrorCode::kOutOfDomain, "trajectory not solved");
  const double total = duration();
  if (!(t >= -1e-12) || !(t <= total * (1.0 + 1e-12) + 1e-12)) {
    throw Error(ErrorCode::kOutOfDomain, fmt::format("t = {} outside [0, {}]", t, total));
  }
  if (order < 0 || order > 5) {
    throw Error(ErrorCode::kInvalidArgument, fmt::format("derivative order {} unsupported", order));
  }
  const auto [k, local] = locate(t);
  return (poly_basis(local, order) * coeffs_.middleRows<6>(6 * k)).transpose();
}

namespace {

// Gram matrix of the third derivatives of the basis over [0, T].
Eigen::Matrix<double, 6, 6> jerk_gram(double T) {
  Eigen::Matrix<double, 6, 6> Q = Eigen::Matrix<double, 6, 6>::Zero();
  for (int i = 3; i < 6; ++i) {
    for (int j = 3; j < 6; ++j) {
      const double ci = i * (i - 1) * (i - 2);
      const double cj = j * (j - 1) * (j - 2);
      const int p = i + j - 5;
      Q(i, j) = ci * cj * std::pow(T, p) / p;
    }
  }
  return Q;
}

}  // namespace

double MincoTrajectory::jerk_cost() const {
  double cost = 0.0;
  for (int k = 0; k < pieces(); ++k) {
    const auto c = piece(k);
    cost += (c.transpose() * jerk_gram(durations_[k]) * c).trace();
  }
  return cost;
}

void MincoTrajectory::add_jerk_gradient(Eigen::MatrixX3d& dj_dc, Eigen::VectorXd& dj_dt) const {
  for (int k = 0; k < pieces(); ++k) {
    const auto c = piece(k);
    dj_dc.middleRows<6>(6 * k) += 2.0 * jerk_gram(durations_[k]) * c;
    const Vec3 jerk = (poly_basis(durations_[k], 3) * c).transpose();
    dj_dt[k] += jerk.squaredNorm();
  }
}

void MincoTrajectory::propagate_gradient(const Eigen::MatrixX3d& dj_dc,
                                         const Eigen::VectorXd& dj_dt_direct,
                                         Eigen::Matrix3Xd& dj_dq, Eigen::VectorXd& dj_dt) const {
  const int K = pieces();
  Eigen::MatrixXd G = dj_dc;
  system_.solve_transposed(G);

  dj_dq.resize(3, K - 1);
  for (int i = 0; i + 1 < K; ++i) dj_dq.col(i) = G.row(6 * i + 3).transpose();

  // dc/dT_i = -A^{-1} (dA/dT_i) c; only rows evaluating piece i at T_i move.
  dj_dt = dj_dt_direct;
  for (int i = 0; i < K; ++i) {
    const auto c = piece(i);
    const double T = durations_[i];
    double acc = 0.0;
    if (i + 1 < K) {
      const int row = 6 * i + 3;
      acc += G.row(row).dot(poly_basis(T, 1) * c);
      for (int d = 0; d < 5; ++d) acc += G.row(row + 1 + d).dot(poly_basis(T, d + 1) * c);
    } else {
      const int tail = 6 * K - 3;
      for (int d = 0; d < 3; ++d) acc += G.row(tail + d).dot(poly_basis(T, d + 1) * c);
    }
    dj_dt[i] -= acc;
  }
}

Eigen::MatrixX3d solve_coefficients(const BoundaryState& start, const BoundaryState& goal,
                                    const Eigen::Matrix3Xd& q, const Eigen::VectorXd& durations) {
  MincoTrajectory traj;
  traj.solve(start, goal, q, durations);
  return traj.coefficients();
}

}  // namespace morphquad
