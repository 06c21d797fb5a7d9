#include "morphquad/dynamics.hpp"

#include <fmt/format.h>

namespace morphquad {

DragParams DragParams::none() {
  DragParams d;
  d.rotor_drag.setZero();
  return d;
}

namespace {

Vec4 quat_rate(const Quat& q, const Vec3& omega) {
  // 1/2 q (x) (0, omega), Hamilton product, (w, x, y, z) ordering.
  const double w = q.w(), x = q.x(), y = q.y(), z = q.z();
  const double p = omega.x(), r = omega.y(), s = omega.z();
  return 0.5 * Vec4(-x * p - y * r - z * s,
                     w * p + y * s - z * r,
                     w * r - x * s + z * p,
                     w * s + x * r - y * p);
}

RigidState advance(const RigidState& s, const StateDerivative& k, double h) {
  RigidState out;
  out.p = s.p + h * k.p_dot;
  out.v = s.v + h * k.v_dot;
  out.q = Quat(s.q.w() + h * k.q_dot[0], s.q.x() + h * k.q_dot[1], s.q.y() + h * k.q_dot[2],
               s.q.z() + h * k.q_dot[3]);
  out.omega = s.omega + h * k.omega_dot;
  return out;
}

}  // namespace

StateDerivative state_derivative(const RigidState& s, const WrenchInput& u,
                                 const PlantParams& plant) {
  const Mat3 R = s.rotation();
  const Mat3& J = plant.props.inertia;
  const Vec3 e3 = Vec3::UnitZ();
  const Vec3 v_body = R.transpose() * s.v;

  StateDerivative d;
  d.p_dot = s.v;
  d.v_dot = -plant.gravity * e3 + R * (u.f / plant.mass * e3) -
            R * (plant.drag.rotor_drag.asDiagonal() * v_body);
  d.q_dot = quat_rate(s.q, s.omega);
  d.omega_dot = J.ldlt().solve(u.tau - s.omega.cross(J * s.omega) -
                               plant.drag.translational_moment * v_body -
                               plant.drag.rotational_damping * s.omega);

  if (!d.p_dot.allFinite() || !d.v_dot.allFinite() || !d.q_dot.allFinite() ||
      !d.omega_dot.allFinite()) {
    throw Error(ErrorCode::kNonFiniteState, "state derivative is not finite");
  }
  return d;
}

RigidState rk4_step(const RigidState& s, const WrenchInput& u, const PlantParams& plant,
                    double dt) {
  if (!(dt > 0.0) || dt > 0.01) {
    throw Error(ErrorCode::kInvalidArgument, fmt::format("rk4 step {} outside (0, 0.01]", dt));
  }
  const StateDerivative k1 = state_derivative(s, u, plant);
  const StateDerivative k2 = state_derivative(advance(s, k1, dt / 2), u, plant);
  const StateDerivative k3 = state_derivative(advance(s, k2, dt / 2), u, plant);
  const StateDerivative k4 = state_derivative(advance(s, k3, dt), u, plant);

  StateDerivative avg;
  avg.p_dot = (k1.p_dot + 2 * k2.p_dot + 2 * k3.p_dot + k4.p_dot) / 6.0;
  avg.v_dot = (k1.v_dot + 2 * k2.v_dot + 2 * k3.v_dot + k4.v_dot) / 6.0;
  avg.q_dot = (k1.q_dot + 2 * k2.q_dot + 2 * k3.q_dot + k4.q_dot) / 6.0;
  avg.omega_dot = (k1.omega_dot + 2 * k2.omega_dot + 2 * k3.omega_dot + k4.omega_dot) / 6.0;

  RigidState out = advance(s, avg, dt);
  out.q.normalize();
  if (!out.finite()) throw Error(ErrorCode::kNonFiniteState, "rk4 step produced non-finite state");
  return out;
}

double kinetic_energy(const RigidState& s, const PlantParams& plant) {
  return 0.5 * plant.mass * s.v.squaredNorm() +
         0.5 * s.omega.dot(plant.props.inertia * s.omega);
}

}  // namespace morphquad
