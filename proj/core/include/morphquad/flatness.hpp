#pragma once

#include <functional>
#include <optional>

#include "morphquad/common.hpp"
#include "morphquad/dynamics.hpp"

namespace morphquad {

/// Position derivatives and yaw along a reference. Snap is optional; without
/// it the body-rate derivative is left at zero (see numeric_omega_dot).
struct FlatOutputs {
  Vec3 p = Vec3::Zero();
  Vec3 v = Vec3::Zero();
  Vec3 a = Vec3::Zero();
  Vec3 j = Vec3::Zero();
  std::optional<Vec3> snap;
  double psi = 0.0;
  double psi_dot = 0.0;
  double psi_ddot = 0.0;
};

struct FlatReference {
  Mat3 R = Mat3::Identity();
  Quat q = Quat::Identity();
  Vec3 omega = Vec3::Zero();
  Vec3 omega_dot = Vec3::Zero();
  /// Mass-normalized thrust vector a + g e3 + R D R^T v [m/s^2].
  Vec3 thrust_acc = Vec3(0.0, 0.0, kGravity);
  double f = 0.0;  // collective thrust [N]
};

enum class FlatStatus { kOk, kSingularYaw, kDegenerateThrust };

/// Body rotation with third column along `thrust` and first column in the
/// plane orthogonal to y_C = (-sin psi, cos psi, 0).
[[nodiscard]] FlatStatus attitude_from_thrust(const Vec3& thrust, double psi, Mat3& R);

/// Attitude and mass-normalized thrust vector only (no body rates). The
/// drag term depends on R, so the thrust is found by fixed-point iteration.
[[nodiscard]] FlatStatus flat_attitude(const Vec3& v, const Vec3& a, double psi,
                                       const DragParams& drag, double gravity, Mat3& R,
                                       Vec3& thrust);

/// Non-throwing core of flat_to_reference. The drag term depends on R, so
/// the thrust vector is found by fixed-point iteration.
[[nodiscard]] FlatStatus compute_flat_reference(const FlatOutputs& flat, double mass,
                                                const DragParams& drag, double gravity,
                                                FlatReference& out);

/// Throws kSingularYaw or kDegenerateThrust.
[[nodiscard]] FlatReference flat_to_reference(const FlatOutputs& flat, double mass,
                                              const DragParams& drag,
                                              double gravity = kGravity);

/// Central difference of the body rate along a sampled reference, for
/// callers without snap: (omega(t + h) - omega(t - h)) / 2h.
[[nodiscard]] Vec3 numeric_omega_dot(const std::function<FlatOutputs(double)>& sample, double t,
                                     double mass, const DragParams& drag,
                                     double gravity = kGravity, double h = 1e-3);

}  // namespace morphquad
