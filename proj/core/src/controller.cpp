#include "morphquad/controller.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>
#include <utility>

namespace morphquad {

RlsState rls_update(const RlsState& rls, double a_cmd_z, double a_meas_z) {
  RlsState next = rls;
  const double c = a_cmd_z / rls.H;
  next.K = rls.P * c / (rls.rho + c * rls.P * c);
  next.P = (rls.P - next.K * c * rls.P) / rls.rho;
  next.H = rls.H + next.K * (a_meas_z - c * rls.H);
  next.c = c;
  return next;
}

ReferenceSample sample_reference(const MincoTrajectory& traj, const MorphProfile& profile,
                                 double t, double yaw, double mass, const DragParams& drag,
                                 double gravity) {
  ReferenceSample ref;
  const double end = traj.duration();
  const double tc = std::clamp(t, 0.0, end);
  ref.flat.p = traj.evaluate(tc, 0);
  if (t < end) {
    ref.flat.v = traj.evaluate(tc, 1);
    ref.flat.a = traj.evaluate(tc, 2);
    ref.flat.j = traj.evaluate(tc, 3);
    ref.flat.snap = traj.evaluate(tc, 4);
  } else {
    ref.flat.snap = Vec3::Zero();
  }
  ref.flat.psi = yaw;
  ref.attitude = flat_to_reference(ref.flat, mass, drag, gravity);
  ref.morph = profile.at(t);
  return ref;
}

ReferenceSample hover_reference(const Vec3& p, double yaw, const MorphState& morph, double mass,
                                double gravity) {
  ReferenceSample ref;
  ref.flat.p = p;
  ref.flat.psi = yaw;
  ref.flat.snap = Vec3::Zero();
  ref.attitude = flat_to_reference(ref.flat, mass, DragParams::none(), gravity);
  ref.morph = morph;
  ref.morph.alpha_dot.fill(0.0);
  return ref;
}

Vec3 position_loop(const RigidState& state, const FlatOutputs& ref, const ControllerGains& gains,
                   const DragParams& drag, Vec3& integral, double dt, double gravity) {
  const Vec3 e_p = state.p - ref.p;
  const Vec3 e_v = state.v - ref.v;
  integral += e_p * dt;
  for (int i = 0; i < 3; ++i) {
    if (gains.ki_pos[i] > 0.0) {
      const double bound = gains.pos_integral_limit / gains.ki_pos[i];
      integral[i] = std::clamp(integral[i], -bound, bound);
    }
  }
  const Vec3 a_fb = gains.kp_pos.cwiseProduct(e_p) + gains.kv_pos.cwiseProduct(e_v) +
                    gains.ki_pos.cwiseProduct(integral);
  const Mat3 R = state.rotation();
  const Vec3 a_ff = R * drag.d_matrix() * R.transpose() * ref.v;
  return gains.K_a * ref.a + a_ff - a_fb + gravity * Vec3::UnitZ();
}

AttitudeCommand attitude_loop(const Vec3& a_cmd, double psi, const Quat& q, const Vec3& K_A,
                              const Vec3& omega_ff) {
  AttitudeCommand out;
  switch (attitude_from_thrust(a_cmd, psi, out.R_d)) {
    case FlatStatus::kOk: break;
    case FlatStatus::kSingularYaw:
      throw Error(ErrorCode::kSingularYaw, "commanded thrust parallel to the yaw axis");
    case FlatStatus::kDegenerateThrust:
      throw Error(ErrorCode::kDegenerateThrust, "commanded acceleration vanishes");
  }
  out.q_d = Quat(out.R_d);
  const Quat q_e = q.normalized().conjugate() * out.q_d;
  const double sign = q_e.w() < 0.0 ? -1.0 : 1.0;
  out.omega_cmd = sign * K_A.cwiseProduct(q_e.vec()) + omega_ff;
  return out;
}

Vec3 torque_loop(const Vec3& omega_cmd, const Vec3& omega_dot_ff, const Vec3& omega_dot_cmd,
                 const Mat3& R_d, const Vec3& v, const InertialProps& props,
                 const DragParams& drag) {
  const Mat3& J = props.inertia;
  return J * (omega_dot_ff + omega_dot_cmd) + omega_cmd.cross(J * omega_cmd) +
         drag.translational_moment * R_d.transpose() * v +
         drag.rotational_damping * omega_cmd;
}

namespace {

bool within(const Vec4& u, double u_max) {
  return (u.array() >= -1e-12).all() && (u.array() <= u_max + 1e-12).all();
}

// Interval of shifts d with lo <= u + d * dir <= hi componentwise.
std::pair<double, double> shift_range(const Vec4& u, const Vec4& dir, double u_max) {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 4; ++i) {
    if (dir[i] > 0.0) {
      lo = std::max(lo, -u[i] / dir[i]);
      hi = std::min(hi, (u_max - u[i]) / dir[i]);
    } else if (dir[i] < 0.0) {
      lo = std::max(lo, (u_max - u[i]) / dir[i]);
      hi = std::min(hi, -u[i] / dir[i]);
    } else if (u[i] < 0.0 || u[i] > u_max) {
      return {1.0, -1.0};
    }
  }
  return {lo, hi};
}

std::array<double, 4> clamp_to(const Vec4& u, double u_max) {
  std::array<double, 4> out;
  for (int i = 0; i < 4; ++i) out[i] = std::clamp(u[i], 0.0, u_max);
  return out;
}

}  // namespace

std::array<double, 4> allocate(double f, const Vec3& tau, const Mat4& M_C, double u_max) {
  const Mat4 inv = M_C.inverse();
  const Vec4 full = inv * Vec4(f, tau.x(), tau.y(), tau.z());
  if (within(full, u_max)) return clamp_to(full, u_max);

  const Vec4 yaw_dir = inv.col(3) * tau.z();
  const Vec4 thrust_dir = inv.col(0);
  auto with_yaw = [&](const Vec4& base) {
    const auto [lo, hi] = shift_range(base, yaw_dir, u_max);
    // `base` is feasible, so 0 lies in [lo, hi].
    return clamp_to(base + std::clamp(1.0, lo, hi) * yaw_dir, u_max);
  };

  // Roll and pitch kept, yaw dropped, thrust shifted as little as needed.
  auto roll_pitch = [&](double k) { return Vec4(inv * Vec4(f, k * tau.x(), k * tau.y(), 0.0)); };
  Vec4 base = roll_pitch(1.0);
  auto [lo, hi] = shift_range(base, thrust_dir, u_max);
  if (lo <= hi) return with_yaw(base + std::clamp(0.0, lo, hi) * thrust_dir);

  // Even roll/pitch alone do not fit: shrink them as little as possible.
  double good = 0.0, bad = 1.0;
  for (int it = 0; it < 40; ++it) {
    const double mid = 0.5 * (good + bad);
    const auto r = shift_range(roll_pitch(mid), thrust_dir, u_max);
    (r.first <= r.second ? good : bad) = mid;
  }
  base = roll_pitch(good);
  std::tie(lo, hi) = shift_range(base, thrust_dir, u_max);
  const double shift = lo <= hi ? std::clamp(0.0, lo, hi) : 0.0;
  return clamp_to(base + shift * thrust_dir, u_max);
}

double servo_loop(double alpha_d, double alpha_hat, double alpha_hat_dot,
                  const ControllerGains& gains, double alpha_d_dot) {
  const double e = alpha_d - alpha_hat;
  const double e_dot = alpha_d_dot - alpha_hat_dot;
  const double u = alpha_d_dot + gains.servo_kp * e + gains.servo_kd * e_dot;
  return std::clamp(u, -gains.servo_slew, gains.servo_slew);
}

NonlinearController::NonlinearController(GeometryParams geom, DragParams drag,
                                         NonlinearControllerConfig config)
    : geom_(std::move(geom)), drag_(std::move(drag)), config_(std::move(config)) {
  geom_.validate();
  if (!(config_.dt > 0.0) || config_.position_divider < 1) {
    throw Error(ErrorCode::kInvalidArgument, "controller period must be positive");
  }
  reset();
}

void NonlinearController::reset() {
  rls_ = config_.rls;
  pos_integral_.setZero();
  rate_integral_.setZero();
  last_omega_.setZero();
  a_cmd_.setZero();
  last_a_cmd_z_ = 0.0;
  tick_ = 0;
}

ControlCommand NonlinearController::update(const ControllerInput& in) {
  const ControllerGains& g = config_.gains;
  const double dt = config_.dt;
  const RigidState& s = in.state;
  const Mat3 R = s.rotation();
  const double mass = geom_.total_mass();

  if (tick_ % config_.position_divider == 0) {
    a_cmd_ = position_loop(s, in.ref.flat, g, drag_, pos_integral_,
                           dt * config_.position_divider, config_.gravity);
  }

  if (config_.use_rls && tick_ > 0 && last_a_cmd_z_ > 0.0) {
    // Remove the known rotor-drag part so only the thrust slope remains.
    const Vec3 v_body = R.transpose() * s.v;
    const double thrust_acc = in.accel_z + drag_.rotor_drag.z() * v_body.z();
    rls_ = rls_update(rls_, last_a_cmd_z_, thrust_acc);
    rls_.H = std::max(rls_.H, 0.2);
  }
  const double H = config_.use_rls ? rls_.H : 1.0;

  const double a_cmd_z = std::max(a_cmd_.dot(R.col(2)), 0.0);
  last_a_cmd_z_ = a_cmd_z;

  ControlCommand cmd;
  cmd.a_cmd = a_cmd_;
  cmd.H = H;
  cmd.f = mass * a_cmd_z / H;

  const AttitudeCommand att = attitude_loop(a_cmd_, in.ref.flat.psi, s.q, g.K_A,
                                            in.ref.attitude.omega);
  cmd.q_d = att.q_d;
  cmd.omega_cmd = att.omega_cmd;

  const Vec3 e_w = att.omega_cmd - s.omega;
  rate_integral_ += g.rate_i.cwiseProduct(e_w) * dt;
  rate_integral_ = rate_integral_.cwiseMax(-g.rate_integral_limit).cwiseMin(g.rate_integral_limit);
  const Vec3 omega_rate = tick_ > 0 ? Vec3((s.omega - last_omega_) / dt) : Vec3::Zero();
  last_omega_ = s.omega;
  const Vec3 omega_dot_cmd =
      g.rate_p.cwiseProduct(e_w) + rate_integral_ - g.rate_d.cwiseProduct(omega_rate);

  const InertialProps props = inertial_props(geom_, in.morph);
  cmd.tau = torque_loop(att.omega_cmd, in.ref.attitude.omega_dot, omega_dot_cmd, att.R_d, s.v,
                        props, drag_);
  const Mat4 M = allocation_matrix(geom_, props);
  cmd.U = allocate(cmd.f, cmd.tau / H, M, geom_.max_rotor_thrust);

  for (int i = 0; i < 4; ++i) {
    cmd.servo_rate[i] = servo_loop(in.ref.morph.alpha[i], in.morph.alpha[i],
                                   in.morph.alpha_dot[i], g, in.ref.morph.alpha_dot[i]);
  }
  ++tick_;
  return cmd;
}

}  // namespace morphquad
