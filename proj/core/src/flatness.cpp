#include "morphquad/flatness.hpp"

#include <cmath>

#include <fmt/format.h>

namespace morphquad {

namespace {

constexpr double kMinThrust = 1e-3;  // [m/s^2]
constexpr double kMinYawLever = 1e-6;

}  // namespace

FlatStatus attitude_from_thrust(const Vec3& thrust, double psi, Mat3& R) {
  const double n = thrust.norm();
  if (!(n > kMinThrust)) return FlatStatus::kDegenerateThrust;
  const Vec3 z = thrust / n;
  const Vec3 yc(-std::sin(psi), std::cos(psi), 0.0);
  const Vec3 u = yc.cross(z);
  const double m = u.norm();
  if (!(m > kMinYawLever)) return FlatStatus::kSingularYaw;
  const Vec3 x = u / m;
  R.col(0) = x;
  R.col(1) = z.cross(x);
  R.col(2) = z;
  return FlatStatus::kOk;
}

FlatStatus flat_attitude(const Vec3& v, const Vec3& a, double psi, const DragParams& drag,
                         double gravity, Mat3& R, Vec3& thrust) {
  const Mat3 D = drag.d_matrix();
  const Vec3 base = a + gravity * Vec3::UnitZ();
  Vec3 t = base;
  for (int iter = 0; iter < 50; ++iter) {
    if (auto s = attitude_from_thrust(t, psi, R); s != FlatStatus::kOk) return s;
    const Vec3 next = base + R * D * R.transpose() * v;
    const bool done = (next - t).norm() <= 1e-13 * (1.0 + t.norm());
    t = next;
    if (done) break;
  }
  thrust = t;
  return attitude_from_thrust(t, psi, R);
}

FlatStatus compute_flat_reference(const FlatOutputs& flat, double mass, const DragParams& drag,
                                  double gravity, FlatReference& out) {
  const Mat3 D = drag.d_matrix();
  Mat3 R;
  Vec3 t;
  if (auto s = flat_attitude(flat.v, flat.a, flat.psi, drag, gravity, R, t);
      s != FlatStatus::kOk) {
    return s;
  }

  const double n = t.norm();
  const Vec3 x = R.col(0), y = R.col(1), z = R.col(2);
  const double sp = std::sin(flat.psi), cp = std::cos(flat.psi);
  const Vec3 yc(-sp, cp, 0.0);
  const Vec3 yc_dot = flat.psi_dot * Vec3(-cp, -sp, 0.0);
  const Vec3 yc_ddot =
      flat.psi_ddot * Vec3(-cp, -sp, 0.0) + flat.psi_dot * flat.psi_dot * Vec3(sp, -cp, 0.0);
  const Vec3 u = yc.cross(z);
  const double m = u.norm();
  const Mat3 W = R * D * R.transpose();

  // The drag term's rate depends on omega itself; a few passes converge.
  Vec3 omega = Vec3::Zero();
  Vec3 t_dot, z_dot, u_dot;
  Mat3 X, W_dot;
  for (int iter = 0; iter < 20; ++iter) {
    X = hat(omega) * D - D * hat(omega);
    W_dot = R * X * R.transpose();
    t_dot = flat.j + W_dot * flat.v + W * flat.a;
    z_dot = (t_dot - z.dot(t_dot) * z) / n;
    u_dot = yc_dot.cross(z) + yc.cross(z_dot);
    const Vec3 next(-y.dot(z_dot), x.dot(z_dot), y.dot(u_dot) / m);
    const bool done = (next - omega).norm() <= 1e-14 * (1.0 + omega.norm());
    omega = next;
    if (done) break;
  }

  Vec3 omega_dot = Vec3::Zero();
  if (flat.snap) {
    const Vec3 y_dot = -omega.z() * x + omega.x() * z;
    const double m_dot = x.dot(u_dot);
    for (int iter = 0; iter < 20; ++iter) {
      const Mat3 X_dot = hat(omega_dot) * D - D * hat(omega_dot);
      const Mat3 W_ddot = R * (hat(omega) * X - X * hat(omega) + X_dot) * R.transpose();
      const Vec3 t_ddot = *flat.snap + W_ddot * flat.v + 2.0 * W_dot * flat.a + W * flat.j;
      const Vec3 z_ddot =
          (t_ddot - (z_dot.dot(t_dot) + z.dot(t_ddot)) * z - 2.0 * z.dot(t_dot) * z_dot) / n;
      const Vec3 u_ddot = yc_ddot.cross(z) + 2.0 * yc_dot.cross(z_dot) + yc.cross(z_ddot);
      const Vec3 next(omega.z() * omega.y() - y.dot(z_ddot),
                      -omega.z() * omega.x() + x.dot(z_ddot),
                      y_dot.dot(u_dot) / m + y.dot(u_ddot) / m - y.dot(u_dot) * m_dot / (m * m));
      const bool done = (next - omega_dot).norm() <= 1e-14 * (1.0 + omega_dot.norm());
      omega_dot = next;
      if (done) break;
    }
  }

  out.R = R;
  out.q = Quat(R);
  out.omega = omega;
  out.omega_dot = omega_dot;
  out.thrust_acc = t;
  out.f = mass * n;
  return FlatStatus::kOk;
}

FlatReference flat_to_reference(const FlatOutputs& flat, double mass, const DragParams& drag,
                                double gravity) {
  FlatReference ref;
  switch (compute_flat_reference(flat, mass, drag, gravity, ref)) {
    case FlatStatus::kOk: return ref;
    case FlatStatus::kSingularYaw:
      throw Error(ErrorCode::kSingularYaw,
                  fmt::format("thrust direction parallel to the yaw axis (psi = {})", flat.psi));
    case FlatStatus::kDegenerateThrust:
      throw Error(ErrorCode::kDegenerateThrust, "commanded thrust vanishes (free fall)");
  }
  return ref;
}

Vec3 numeric_omega_dot(const std::function<FlatOutputs(double)>& sample, double t, double mass,
                       const DragParams& drag, double gravity, double h) {
  FlatOutputs plus = sample(t + h);
  FlatOutputs minus = sample(t - h);
  plus.snap.reset();
  minus.snap.reset();
  const FlatReference a = flat_to_reference(plus, mass, drag, gravity);
  const FlatReference b = flat_to_reference(minus, mass, drag, gravity);
  return (a.omega - b.omega) / (2.0 * h);
}

}  // namespace morphquad
