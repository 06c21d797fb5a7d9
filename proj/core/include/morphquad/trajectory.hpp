#pragma once

#include <utility>

#include "morphquad/banded.hpp"
#include "morphquad/common.hpp"

namespace morphquad {

/// Position, velocity and acceleration at one end of the trajectory.
struct BoundaryState {
  Vec3 p = Vec3::Zero();
  Vec3 v = Vec3::Zero();
  Vec3 a = Vec3::Zero();

  static BoundaryState rest(const Vec3& p) { return {p, Vec3::Zero(), Vec3::Zero()}; }
};

/// Row vector of d-th derivative of [1, t, ..., t^5] at t.
[[nodiscard]] Eigen::Matrix<double, 1, 6> poly_basis(double t, int order);

/// Piecewise quintic minimum-jerk trajectory through intermediate waypoints
/// q_1..q_{K-1} with piece durations T_1..T_K. Coefficients come from one
/// banded solve that enforces the boundary states, waypoint interpolation
/// and continuity up to the fourth derivative at every junction.
///
/// Coefficients are stacked piece by piece, 6 rows each, ascending powers of
/// the local time.
class MincoTrajectory {
 public:
  static constexpr int kOrder = 6;

  MincoTrajectory() = default;

  /// `q` is 3 x (K-1), `durations` has K entries. Throws kDegenerateTime for
  /// a non-positive or non-finite duration.
  void solve(const BoundaryState& start, const BoundaryState& goal, const Eigen::Matrix3Xd& q,
             const Eigen::VectorXd& durations);

  [[nodiscard]] int pieces() const { return static_cast<int>(durations_.size()); }
  [[nodiscard]] double duration() const { return durations_.sum(); }
  [[nodiscard]] const Eigen::VectorXd& durations() const { return durations_; }
  [[nodiscard]] const Eigen::Matrix3Xd& waypoints() const { return q_; }
  [[nodiscard]] const Eigen::MatrixX3d& coefficients() const { return coeffs_; }
  [[nodiscard]] const BoundaryState& start() const { return start_; }
  [[nodiscard]] const BoundaryState& goal() const { return goal_; }
  [[nodiscard]] Eigen::Matrix<double, 6, 3> piece(int k) const {
    return coeffs_.middleRows<6>(6 * k);
  }

  /// Piece index and local time for global time t (t is clamped to the
  /// domain after the check).
  [[nodiscard]] std::pair<int, double> locate(double t) const;

  /// Derivative `order` (0..5) at global time t. Throws kOutOfDomain outside
  /// [0, duration()].
  [[nodiscard]] Vec3 evaluate(double t, int order) const;

  /// Sum over pieces of the integral of the squared jerk norm.
  [[nodiscard]] double jerk_cost() const;
  /// Adds the partial derivatives of jerk_cost() to the two accumulators.
  void add_jerk_gradient(Eigen::MatrixX3d& dj_dc, Eigen::VectorXd& dj_dt) const;

  /// Chains the partials of a scalar J(c(q, T), T) through the coefficient
  /// map. `dj_dt_direct` holds the explicit dependence on T.
  void propagate_gradient(const Eigen::MatrixX3d& dj_dc, const Eigen::VectorXd& dj_dt_direct,
                          Eigen::Matrix3Xd& dj_dq, Eigen::VectorXd& dj_dt) const;

 private:
  BoundaryState start_;
  BoundaryState goal_;
  Eigen::Matrix3Xd q_;
  Eigen::VectorXd durations_;
  Eigen::MatrixX3d coeffs_;
  BandedMatrix system_;
};

/// Coefficient blocks of the trajectory through (q, T); see MincoTrajectory.
[[nodiscard]] Eigen::MatrixX3d solve_coefficients(const BoundaryState& start,
                                                  const BoundaryState& goal,
                                                  const Eigen::Matrix3Xd& q,
                                                  const Eigen::VectorXd& durations);

}  // namespace morphquad
