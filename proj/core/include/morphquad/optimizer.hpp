#pragma once

#include <vector>

#include "morphquad/corridor.hpp"
#include "morphquad/dynamics.hpp"
#include "morphquad/lbfgs.hpp"
#include "morphquad/morph_schedule.hpp"
#include "morphquad/morphology.hpp"
#include "morphquad/trajectory.hpp"

namespace morphquad {

struct OptimizerWeights {
  double rho_T = 20.0;
  double rho_v = 1e5;
  double rho_w = 1e5;
  double rho_c = 1e6;
  double v_max = 1.0;      // [m/s]
  double omega_max = 3.0;  // [rad/s]
  int L = 16;              // quadrature intervals per piece
  /// Added to every collision constraint so the penalty equilibrium sits
  /// inside the corridor [m].
  double collision_margin = 0.01;

  /// Penalty weights (velocity, body rate, collision).
  [[nodiscard]] Vec3 chi() const { return {rho_v, rho_w, rho_c}; }
  void validate() const;
};

/// Everything the objective needs besides the decision variables.
struct PlanProblem {
  std::vector<Polytope> polytopes;
  /// Polytope that bounds each piece; its size fixes K.
  std::vector<int> piece_polytope;
  BoundaryState start;
  BoundaryState goal;
  double yaw = 0.0;
  double mass = 1.5;
  DragParams drag;
  double gravity = kGravity;
  GeometryParams geom;
  /// Body box used by the collision penalty on each piece.
  std::vector<HalfExtents> piece_extents;
  /// Arm angles over time, used by the dense post-check.
  MorphProfile profile;
  Eigen::Matrix3Xd initial_q;
  Eigen::VectorXd initial_T;

  [[nodiscard]] int pieces() const { return static_cast<int>(piece_polytope.size()); }
};

struct CostTerms {
  double total = 0.0;
  double jerk = 0.0;
  double time = 0.0;
  double velocity = 0.0;
  double omega = 0.0;
  double collision = 0.0;
};

/// Penalized objective and its gradient in (q, tau) with T = exp(tau).
/// Velocity, body-rate and full-body collision constraints enter as
/// max(G, 0)^3 sampled on L + 1 trapezoidal nodes per piece.
CostTerms cost_and_gradient(const PlanProblem& problem, const OptimizerWeights& weights,
                            const Eigen::Matrix3Xd& q, const Eigen::VectorXd& tau,
                            Eigen::Matrix3Xd& grad_q, Eigen::VectorXd& grad_tau);

struct Residuals {
  double max_speed = 0.0;
  double max_omega = 0.0;
  double max_violation = 0.0;  // worst body-vertex face value [m]
};

enum class PlanStatus { kSuccess, kDidNotConverge, kConstraintViolation };

[[nodiscard]] std::string_view to_string(PlanStatus status);

struct PlanResult {
  PlanStatus status = PlanStatus::kDidNotConverge;
  MincoTrajectory trajectory;
  MorphProfile profile;
  std::vector<int> piece_polytope;
  CostTerms cost;
  Residuals residuals;
  LbfgsStatus solver_status = LbfgsStatus::kMaxIterations;
  int iterations = 0;
  int evaluations = 0;
  int schedule_rounds = 0;
  double wall_ms = 0.0;

  [[nodiscard]] bool success() const { return status == PlanStatus::kSuccess; }
};

/// Dense check at 4L nodes per piece with the actual arm angles.
[[nodiscard]] Residuals check_trajectory(const PlanProblem& problem,
                                         const OptimizerWeights& weights,
                                         const MincoTrajectory& traj);

/// Runs L-BFGS from the problem's initial guess. Throws kInfeasibleStart if
/// an end point lies outside its polytope.
[[nodiscard]] PlanResult plan(const PlanProblem& problem, const OptimizerWeights& weights,
                              const LbfgsParams& solver = {});

/// Initial durations from a trapezoidal speed profile at v_max / 2 along
/// start -> q -> goal.
[[nodiscard]] Eigen::VectorXd initial_durations(const Vec3& start, const Eigen::Matrix3Xd& q,
                                                const Vec3& goal, double v_max);

struct CorridorPlanOptions {
  MorphPolicy morph;
  int max_pieces = 10;
  int max_schedule_rounds = 3;
  LbfgsParams solver;
};

/// Two-stage planning through a corridor: pick per-polytope arm angles,
/// optimize with conservative body boxes, reschedule the morph profile on
/// the optimized times and replan until the boxes stop changing.
[[nodiscard]] PlanResult plan_through_corridor(const Corridor& corridor,
                                               const BoundaryState& start,
                                               const BoundaryState& goal, double yaw,
                                               const GeometryParams& geom,
                                               const PlantParams& plant,
                                               const OptimizerWeights& weights,
                                               const CorridorPlanOptions& options = {});

}  // namespace morphquad
