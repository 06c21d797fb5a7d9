#pragma once

#include "morphquad/common.hpp"
#include "morphquad/morphology.hpp"

namespace morphquad {

/// Rigid-body state of the vehicle. `p` is the CoG in the world frame,
/// `omega` the angular velocity in body axes.
struct RigidState {
  Vec3 p = Vec3::Zero();
  Vec3 v = Vec3::Zero();
  Quat q = Quat::Identity();
  Vec3 omega = Vec3::Zero();

  [[nodiscard]] Mat3 rotation() const { return q.normalized().toRotationMatrix(); }
  [[nodiscard]] bool finite() const {
    return p.allFinite() && v.allFinite() && q.coeffs().allFinite() && omega.allFinite();
  }
};

/// Tangent of RigidState; the quaternion rate is stored as (w, x, y, z).
struct StateDerivative {
  Vec3 p_dot = Vec3::Zero();
  Vec3 v_dot = Vec3::Zero();
  Vec4 q_dot = Vec4::Zero();
  Vec3 omega_dot = Vec3::Zero();
};

/// Aerodynamic parameters. `rotor_drag` holds the diagonal of the
/// mass-normalized rotor drag matrix D [1/s]; `translational_moment` (A)
/// couples body-frame velocity into torque and `rotational_damping` (B)
/// damps body rates.
struct DragParams {
  Vec3 rotor_drag = Vec3(0.3, 0.3, 0.1);
  Mat3 translational_moment = Mat3::Zero();
  Mat3 rotational_damping = Mat3::Zero();

  [[nodiscard]] Mat3 d_matrix() const { return rotor_drag.asDiagonal(); }
  static DragParams none();
};

struct WrenchInput {
  double f = 0.0;
  Vec3 tau = Vec3::Zero();
};

/// Everything the equations of motion need besides state and input.
struct PlantParams {
  InertialProps props;
  DragParams drag;
  double mass = 1.5;
  double gravity = kGravity;
};

/// Continuous dynamics with rotor drag:
///   p' = v
///   v' = -g e3 + R (f/m) e3 - R D R^T v
///   q' = 1/2 q (x) (0, omega)
///   omega' = J^-1 (tau - omega x J omega - A R^T v - B omega)
/// Throws kNonFiniteState if the result is not finite.
[[nodiscard]] StateDerivative state_derivative(const RigidState& s, const WrenchInput& u,
                                               const PlantParams& plant);

/// Classical fourth-order Runge-Kutta step with quaternion renormalization.
/// `dt` must lie in (0, 0.01].
[[nodiscard]] RigidState rk4_step(const RigidState& s, const WrenchInput& u,
                                  const PlantParams& plant, double dt);

/// Translational plus rotational kinetic energy.
[[nodiscard]] double kinetic_energy(const RigidState& s, const PlantParams& plant);

}  // namespace morphquad
