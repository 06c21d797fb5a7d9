#include "morphquad/optimizer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "morphquad/flatness.hpp"

namespace morphquad {

void OptimizerWeights::validate() const {
  if (rho_T < 0.0 || rho_v < 0.0 || rho_w < 0.0 || rho_c < 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "optimizer weights must be nonnegative");
  }
  if (L < 8) throw Error(ErrorCode::kInvalidArgument, "at least 8 quadrature intervals required");
  if (!(v_max > 0.0) || !(omega_max > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "v_max and omega_max must be positive");
  }
}

std::string_view to_string(PlanStatus status) {
  switch (status) {
    case PlanStatus::kSuccess: return "success";
    case PlanStatus::kDidNotConverge: return "did_not_converge";
    case PlanStatus::kConstraintViolation: return "constraint_violation";
  }
  return "unknown";
}

namespace {

struct Attitude {
  Mat3 R = Mat3::Identity();
  Vec3 omega = Vec3::Zero();
  Vec3 thrust = Vec3::Zero();
  bool ok = false;
};

Attitude attitude_at(const PlanProblem& pb, const Vec3& v, const Vec3& a, const Vec3& j) {
  FlatOutputs flat;
  flat.v = v;
  flat.a = a;
  flat.j = j;
  flat.psi = pb.yaw;
  FlatReference ref;
  Attitude out;
  out.ok = compute_flat_reference(flat, pb.mass, pb.drag, pb.gravity, ref) == FlatStatus::kOk;
  if (out.ok) {
    out.R = ref.R;
    out.omega = ref.omega;
    out.thrust = ref.thrust_acc;
  }
  return out;
}

double fd_step(double x) { return 1e-6 * std::max(1.0, std::abs(x)); }

struct NodeGradient {
  double cost_v = 0.0;
  double cost_w = 0.0;
  double cost_c = 0.0;
  Vec3 gp = Vec3::Zero();
  Vec3 gv = Vec3::Zero();
  Vec3 ga = Vec3::Zero();
  Vec3 gj = Vec3::Zero();

  [[nodiscard]] double cost() const { return cost_v + cost_w + cost_c; }
};

NodeGradient node_penalty(const PlanProblem& pb, const OptimizerWeights& w,
                          const std::array<Vec3, 8>& vertices, const Polytope& poly,
                          const Vec3& p, const Vec3& v, const Vec3& a, const Vec3& j) {
  NodeGradient out;

  const double gv = v.squaredNorm() - w.v_max * w.v_max;
  if (gv > 0.0) {
    out.cost_v = w.rho_v * gv * gv * gv;
    out.gv += w.rho_v * 3.0 * gv * gv * 2.0 * v;
  }

  const Attitude att = attitude_at(pb, v, a, j);
  if (!att.ok) return out;

  Vec3 d_omega = Vec3::Zero();
  const double gw = att.omega.squaredNorm() - w.omega_max * w.omega_max;
  if (gw > 0.0) {
    out.cost_w = w.rho_w * gw * gw * gw;
    d_omega = w.rho_w * 3.0 * gw * gw * 2.0 * att.omega;
  }

  // dC/dR accumulated as sum of weight * n * vertex^T.
  Mat3 d_R = Mat3::Zero();
  for (const Vec3& qv : vertices) {
    const Vec3 world = p + att.R * qv;
    for (const auto& f : poly.faces) {
      const double g = f.eval(world) + w.collision_margin;
      if (g <= 0.0) continue;
      out.cost_c += w.rho_c * g * g * g;
      const double k = w.rho_c * 3.0 * g * g;
      out.gp += k * f.n;
      d_R += k * f.n * qv.transpose();
    }
  }

  const bool need_omega = gw > 0.0;
  const bool need_R = out.cost_c > 0.0;
  if (!need_omega && !need_R) return out;

  if (need_omega) {
    // The body rate is differentiated numerically in v, a and j; the same
    // perturbed solves give dR for the collision term.
    for (int var = 0; var < 3; ++var) {
      const Vec3& base = var == 0 ? v : (var == 1 ? a : j);
      Vec3& grad = var == 0 ? out.gv : (var == 1 ? out.ga : out.gj);
      for (int i = 0; i < 3; ++i) {
        const double h = fd_step(base[i]);
        Vec3 hi = base, lo = base;
        hi[i] += h;
        lo[i] -= h;
        const Attitude ap =
            attitude_at(pb, var == 0 ? hi : v, var == 1 ? hi : a, var == 2 ? hi : j);
        const Attitude am =
            attitude_at(pb, var == 0 ? lo : v, var == 1 ? lo : a, var == 2 ? lo : j);
        if (!ap.ok || !am.ok) continue;
        grad[i] += d_omega.dot((ap.omega - am.omega) / (2.0 * h));
        if (need_R && var < 2) grad[i] += d_R.cwiseProduct((ap.R - am.R) / (2.0 * h)).sum();
      }
    }
    return out;
  }

  // Collision only. R depends on (v, a) through the thrust fixed point
  // t = a + g e3 + R(t) D R(t)^T v, so dt = (I - G)^-1 (da + W dv) with
  // G = d(R D R^T v)/dt. Only dR/dt is differenced, which needs no
  // iteration.
  const Mat3 D = pb.drag.d_matrix();
  const Mat3 W = att.R * D * att.R.transpose();
  Mat3 G;
  Vec3 g_t;
  for (int i = 0; i < 3; ++i) {
    const double h = fd_step(att.thrust[i]);
    Vec3 hi = att.thrust, lo = att.thrust;
    hi[i] += h;
    lo[i] -= h;
    Mat3 Rp, Rm;
    if (attitude_from_thrust(hi, pb.yaw, Rp) != FlatStatus::kOk ||
        attitude_from_thrust(lo, pb.yaw, Rm) != FlatStatus::kOk) {
      return out;
    }
    const Mat3 dR = (Rp - Rm) / (2.0 * h);
    G.col(i) = (dR * D * att.R.transpose() + att.R * D * dR.transpose()) * v;
    g_t[i] = d_R.cwiseProduct(dR).sum();
  }
  const Vec3 g_a = (Mat3::Identity() - G).transpose().partialPivLu().solve(g_t);
  out.ga += g_a;
  out.gv += W.transpose() * g_a;
  return out;
}

bool inside(const Polytope& poly, const Vec3& x) { return point_violation(poly, x) <= 1e-9; }

}  // namespace

CostTerms cost_and_gradient(const PlanProblem& pb, const OptimizerWeights& w,
                            const Eigen::Matrix3Xd& q, const Eigen::VectorXd& tau,
                            Eigen::Matrix3Xd& grad_q, Eigen::VectorXd& grad_tau) {
  const int K = pb.pieces();
  const Eigen::VectorXd T = tau.array().exp();
  MincoTrajectory traj;
  traj.solve(pb.start, pb.goal, q, T);

  CostTerms terms;
  Eigen::MatrixX3d dj_dc = Eigen::MatrixX3d::Zero(6 * K, 3);
  Eigen::VectorXd dj_dt = Eigen::VectorXd::Zero(K);

  terms.jerk = traj.jerk_cost();
  traj.add_jerk_gradient(dj_dc, dj_dt);
  terms.time = w.rho_T * T.sum();
  dj_dt.array() += w.rho_T;

  const int L = w.L;
  for (int k = 0; k < K; ++k) {
    const auto c = traj.piece(k);
    const Polytope& poly = pb.polytopes[pb.piece_polytope[k]];
    const auto vertices = body_vertices(pb.piece_extents[k]);
    const double step = T[k] / L;
    for (int n = 0; n <= L; ++n) {
      const double weight = (n == 0 || n == L) ? 0.5 : 1.0;
      const double t = n * step;
      const auto b0 = poly_basis(t, 0), b1 = poly_basis(t, 1), b2 = poly_basis(t, 2);
      const auto b3 = poly_basis(t, 3), b4 = poly_basis(t, 4);
      const Vec3 p = (b0 * c).transpose(), v = (b1 * c).transpose();
      const Vec3 a = (b2 * c).transpose(), j = (b3 * c).transpose();
      const Vec3 s = (b4 * c).transpose();

      const NodeGradient g = node_penalty(pb, w, vertices, poly, p, v, a, j);
      const double cost = g.cost();
      if (cost == 0.0) continue;
      terms.velocity += weight * step * g.cost_v;
      terms.omega += weight * step * g.cost_w;
      terms.collision += weight * step * g.cost_c;

      dj_dc.middleRows<6>(6 * k) +=
          weight * step *
          (b0.transpose() * g.gp.transpose() + b1.transpose() * g.gv.transpose() +
           b2.transpose() * g.ga.transpose() + b3.transpose() * g.gj.transpose());
      const double rate = g.gp.dot(v) + g.gv.dot(a) + g.ga.dot(j) + g.gj.dot(s);
      dj_dt[k] += weight * (cost / L + step * (static_cast<double>(n) / L) * rate);
    }
  }
  terms.total = terms.jerk + terms.time + terms.velocity + terms.omega + terms.collision;

  Eigen::VectorXd dj_dt_total;
  traj.propagate_gradient(dj_dc, dj_dt, grad_q, dj_dt_total);
  grad_tau = dj_dt_total.cwiseProduct(T);
  return terms;
}

Residuals check_trajectory(const PlanProblem& pb, const OptimizerWeights& w,
                           const MincoTrajectory& traj) {
  Residuals res;
  res.max_violation = -std::numeric_limits<double>::infinity();
  const int dense = 4 * w.L;
  double t0 = 0.0;
  for (int k = 0; k < traj.pieces(); ++k) {
    const auto c = traj.piece(k);
    const double T = traj.durations()[k];
    const Polytope& poly = pb.polytopes[pb.piece_polytope[k]];
    for (int n = 0; n <= dense; ++n) {
      const double t = T * n / dense;
      const Vec3 p = (poly_basis(t, 0) * c).transpose();
      const Vec3 v = (poly_basis(t, 1) * c).transpose();
      const Vec3 a = (poly_basis(t, 2) * c).transpose();
      const Vec3 j = (poly_basis(t, 3) * c).transpose();
      res.max_speed = std::max(res.max_speed, v.norm());
      const Attitude att = attitude_at(pb, v, a, j);
      if (!att.ok) {
        res.max_omega = std::numeric_limits<double>::infinity();
        continue;
      }
      res.max_omega = std::max(res.max_omega, att.omega.norm());
      const auto verts = body_vertices(bounding_half_extents(pb.geom, pb.profile.at(t0 + t)));
      for (const Vec3& qv : verts) {
        res.max_violation = std::max(res.max_violation, point_violation(poly, p + att.R * qv));
      }
    }
    t0 += T;
  }
  return res;
}

namespace {

bool residuals_ok(const Residuals& r, const OptimizerWeights& w) {
  return r.max_speed <= 1.02 * w.v_max && r.max_omega <= 1.02 * w.omega_max &&
         r.max_violation <= 0.01;
}

PlanStatus classify(const Residuals& r, const OptimizerWeights& w, LbfgsStatus solver) {
  if (residuals_ok(r, w)) return PlanStatus::kSuccess;
  if (solver == LbfgsStatus::kMaxIterations) return PlanStatus::kDidNotConverge;
  return PlanStatus::kConstraintViolation;
}

}  // namespace

PlanResult plan(const PlanProblem& pb, const OptimizerWeights& w, const LbfgsParams& solver) {
  const auto clock_start = std::chrono::steady_clock::now();
  w.validate();
  const int K = pb.pieces();
  if (K < 1 || pb.initial_q.cols() != K - 1 || pb.initial_T.size() != K ||
      static_cast<int>(pb.piece_extents.size()) != K) {
    throw Error(ErrorCode::kInvalidArgument, "plan problem sizes are inconsistent");
  }
  for (int idx : pb.piece_polytope) {
    if (idx < 0 || idx >= static_cast<int>(pb.polytopes.size())) {
      throw Error(ErrorCode::kInvalidArgument, "piece assigned to a missing polytope");
    }
  }
  if (!inside(pb.polytopes[pb.piece_polytope.front()], pb.start.p)) {
    throw Error(ErrorCode::kInfeasibleStart, "start lies outside the first polytope", 0);
  }
  if (!inside(pb.polytopes[pb.piece_polytope.back()], pb.goal.p)) {
    throw Error(ErrorCode::kInfeasibleStart, "goal lies outside the last polytope", K - 1);
  }

  const Eigen::Index nq = 3 * (K - 1);
  Eigen::VectorXd x(nq + K);
  x.head(nq) = Eigen::Map<const Eigen::VectorXd>(pb.initial_q.data(), nq);
  x.tail(K) = pb.initial_T.array().log();

  Eigen::Matrix3Xd q(3, K - 1), gq(3, K - 1);
  Eigen::VectorXd gt(K);
  const Objective objective = [&](const Eigen::VectorXd& xv, Eigen::VectorXd& grad) {
    q = Eigen::Map<const Eigen::Matrix3Xd>(xv.data(), 3, K - 1);
    const CostTerms terms = cost_and_gradient(pb, w, q, xv.tail(K), gq, gt);
    grad.resize(xv.size());
    grad.head(nq) = Eigen::Map<const Eigen::VectorXd>(gq.data(), nq);
    grad.tail(K) = gt;
    return terms.total;
  };
  const LbfgsResult lr = lbfgs_minimize(x, objective, solver);

  PlanResult result;
  q = Eigen::Map<const Eigen::Matrix3Xd>(x.data(), 3, K - 1);
  const Eigen::VectorXd T = x.tail(K).array().exp();
  result.trajectory.solve(pb.start, pb.goal, q, T);
  result.cost = cost_and_gradient(pb, w, q, x.tail(K), gq, gt);
  result.residuals = check_trajectory(pb, w, result.trajectory);
  result.solver_status = lr.status;
  result.iterations = lr.iterations;
  result.evaluations = lr.evaluations;
  result.status = classify(result.residuals, w, lr.status);
  result.profile = pb.profile;
  result.piece_polytope = pb.piece_polytope;
  result.schedule_rounds = 1;
  result.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                             clock_start)
                       .count();
  return result;
}

Eigen::VectorXd initial_durations(const Vec3& start, const Eigen::Matrix3Xd& q, const Vec3& goal,
                                  double v_max) {
  const Eigen::Index K = q.cols() + 1;
  std::vector<double> cumulative{0.0};
  Vec3 prev = start;
  for (Eigen::Index k = 0; k < K; ++k) {
    const Vec3 next = k + 1 < K ? Vec3(q.col(k)) : goal;
    cumulative.push_back(cumulative.back() + (next - prev).norm());
    prev = next;
  }
  const double total = cumulative.back();
  const double cruise = 0.5 * v_max;
  const double acc = v_max;
  const double ramp_dist = cruise * cruise / (2.0 * acc);

  auto time_at = [&](double s) {
    if (total < 2.0 * ramp_dist) {
      const double peak_t = std::sqrt(total / acc);
      return s <= total / 2 ? std::sqrt(2.0 * s / acc)
                            : 2.0 * peak_t - std::sqrt(2.0 * std::max(total - s, 0.0) / acc);
    }
    const double ramp_t = cruise / acc;
    const double total_t = 2.0 * ramp_t + (total - 2.0 * ramp_dist) / cruise;
    if (s < ramp_dist) return std::sqrt(2.0 * s / acc);
    if (s <= total - ramp_dist) return ramp_t + (s - ramp_dist) / cruise;
    return total_t - std::sqrt(2.0 * std::max(total - s, 0.0) / acc);
  };

  Eigen::VectorXd T(K);
  for (Eigen::Index k = 0; k < K; ++k) {
    T[k] = std::max(time_at(cumulative[k + 1]) - time_at(cumulative[k]), 0.05);
  }
  return T;
}

namespace {

bool same_extents(const std::vector<HalfExtents>& a, const std::vector<HalfExtents>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::abs(a[i].r - b[i].r) > 1e-9 || std::abs(a[i].w - b[i].w) > 1e-9) return false;
  }
  return true;
}

}  // namespace

PlanResult plan_through_corridor(const Corridor& corridor, const BoundaryState& start,
                                 const BoundaryState& goal, double yaw,
                                 const GeometryParams& geom, const PlantParams& plant,
                                 const OptimizerWeights& weights,
                                 const CorridorPlanOptions& options) {
  const auto clock_start = std::chrono::steady_clock::now();
  if (corridor.polytopes.empty()) {
    throw Error(ErrorCode::kCorridorFailure, "corridor has no polytopes");
  }
  const int K = static_cast<int>(corridor.polytopes.size());

  PlanProblem pb;
  pb.polytopes = corridor.polytopes;
  pb.start = start;
  pb.goal = goal;
  pb.yaw = yaw;
  pb.mass = plant.mass;
  pb.drag = plant.drag;
  pb.gravity = plant.gravity;
  pb.geom = geom;
  for (int k = 0; k < K; ++k) pb.piece_polytope.push_back(k);

  const std::vector<double> targets = polytope_alpha_targets(corridor, geom, yaw, options.morph);
  std::vector<double> piece_alpha;
  for (int idx : pb.piece_polytope) piece_alpha.push_back(targets[idx]);

  pb.initial_q.resize(3, K - 1);
  for (int k = 0; k + 1 < K; ++k) {
    const auto mid = intersection_interior_point(corridor.polytopes[k], corridor.polytopes[k + 1]);
    if (!mid) {
      throw Error(ErrorCode::kCorridorFailure,
                  fmt::format("polytopes {} and {} do not overlap", k, k + 1), k);
    }
    pb.initial_q.col(k) = *mid;
  }
  pb.initial_T = initial_durations(start.p, pb.initial_q, goal.p, weights.v_max);
  pb.profile = schedule_morph(piece_alpha, pb.initial_T, options.morph);
  pb.piece_extents = piece_extents(pb.profile, pb.initial_T, geom);

  PlanResult result;
  int evaluations = 0, iterations = 0;
  for (int round = 1; round <= options.max_schedule_rounds; ++round) {
    result = plan(pb, weights, options.solver);
    evaluations += result.evaluations;
    iterations += result.iterations;
    result.schedule_rounds = round;

    const Eigen::VectorXd& T = result.trajectory.durations();
    pb.profile = schedule_morph(piece_alpha, T, options.morph);
    const auto extents = piece_extents(pb.profile, T, geom);
    const bool stable = same_extents(extents, pb.piece_extents);
    pb.piece_extents = extents;
    pb.initial_q = result.trajectory.waypoints();
    pb.initial_T = T;
    if (stable) break;
  }

  // Final residuals against the profile that will actually be flown.
  result.profile = pb.profile;
  result.residuals = check_trajectory(pb, weights, result.trajectory);
  result.status = classify(result.residuals, weights, result.solver_status);
  result.evaluations = evaluations;
  result.iterations = iterations;
  result.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                             clock_start)
                       .count();
  return result;
}

}  // namespace morphquad
