#include "morphquad/baseline_controllers.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace morphquad {

namespace {

double wrap_angle(double a) { return std::remainder(a, 2.0 * kPi); }

std::array<double, 4> servo_rates(const ControllerInput& in, const ControllerGains& g) {
  std::array<double, 4> out;
  for (int i = 0; i < 4; ++i) {
    out[i] = servo_loop(in.ref.morph.alpha[i], in.morph.alpha[i], in.morph.alpha_dot[i], g,
                        in.ref.morph.alpha_dot[i]);
  }
  return out;
}

}  // namespace

PidCascadeController::PidCascadeController(GeometryParams geom, Gains gains, double dt,
                                           double gravity)
    : geom_(std::move(geom)), gains_(std::move(gains)), dt_(dt), gravity_(gravity) {
  nominal_ = inertial_props(geom_, MorphState::preset(MorphPreset::kX));
  nominal_allocation_ = allocation_matrix(geom_, nominal_);
}

void PidCascadeController::reset() { integral_.setZero(); }

ControlCommand PidCascadeController::update(const ControllerInput& in) {
  const RigidState& s = in.state;
  const FlatOutputs& ref = in.ref.flat;
  const Vec3 e_p = s.p - ref.p;
  const Vec3 e_v = s.v - ref.v;
  integral_ += e_p * dt_;
  for (int i = 0; i < 3; ++i) {
    if (gains_.ki[i] > 0.0) {
      const double bound = gains_.integral_limit / gains_.ki[i];
      integral_[i] = std::clamp(integral_[i], -bound, bound);
    }
  }
  const Vec3 acc = -gains_.kp.cwiseProduct(e_p) - gains_.kd.cwiseProduct(e_v) -
                   gains_.ki.cwiseProduct(integral_);

  const double psi = ref.psi;
  const double sp = std::sin(psi), cp = std::cos(psi);
  const double roll_d =
      std::clamp((acc.x() * sp - acc.y() * cp) / gravity_, -gains_.max_tilt, gains_.max_tilt);
  const double pitch_d =
      std::clamp((acc.x() * cp + acc.y() * sp) / gravity_, -gains_.max_tilt, gains_.max_tilt);

  const Mat3 R = s.rotation();
  const double roll = std::atan2(R(2, 1), R(2, 2));
  const double pitch = std::asin(std::clamp(-R(2, 0), -1.0, 1.0));
  const double yaw = std::atan2(R(1, 0), R(0, 0));
  const Vec3 e_att(roll_d - roll, pitch_d - pitch, wrap_angle(psi - yaw));
  const Vec3 rate_cmd = gains_.att_p.cwiseProduct(e_att);

  ControlCommand cmd;
  cmd.f = geom_.total_mass() * (gravity_ + acc.z());
  cmd.tau = nominal_.inertia * gains_.rate_p.cwiseProduct(rate_cmd - s.omega);
  cmd.U = allocate(cmd.f, cmd.tau, nominal_allocation_, geom_.max_rotor_thrust);
  cmd.a_cmd = acc + gravity_ * Vec3::UnitZ();
  cmd.omega_cmd = rate_cmd;
  cmd.q_d = Quat(Eigen::AngleAxisd(psi, Vec3::UnitZ()) * Eigen::AngleAxisd(pitch_d, Vec3::UnitY()) *
                 Eigen::AngleAxisd(roll_d, Vec3::UnitX()));
  cmd.servo_rate = servo_rates(in, ControllerGains{});
  return cmd;
}

Eigen::VectorXd integrator_chain_lqr(double dt, const Eigen::VectorXd& q, double r) {
  const Eigen::Index n = q.size();
  if (n < 1 || !(dt > 0.0) || !(r > 0.0) || (q.array() < 0.0).any()) {
    throw Error(ErrorCode::kInvalidArgument, "integrator chain LQR needs dt, r > 0 and q >= 0");
  }
  // Exact discretization: A = exp(N dt), B = integral of exp(N s) e_n.
  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd B(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double fact = 1.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      fact *= static_cast<double>(j - i);
      A(i, j) = std::pow(dt, static_cast<double>(j - i)) / fact;
    }
    B[i] = std::pow(dt, static_cast<double>(n - i)) / (fact * static_cast<double>(n - i));
  }
  const Eigen::MatrixXd Q = q.asDiagonal();
  Eigen::MatrixXd P = Q;
  Eigen::VectorXd K = Eigen::VectorXd::Zero(n);
  for (int it = 0; it < 5000000; ++it) {
    const Eigen::VectorXd PB = P * B;
    const Eigen::VectorXd K_next = A.transpose() * PB / (r + B.dot(PB));
    const Eigen::MatrixXd P_next = Q + A.transpose() * P * A - (A.transpose() * PB) * K_next.transpose();
    const bool done = (K_next - K).norm() <= 1e-12 * (1.0 + K_next.norm());
    K = K_next;
    P = 0.5 * (P_next + P_next.transpose());
    if (done) break;
  }
  return K;
}

LqrController::LqrController(GeometryParams geom, Weights weights, double dt, double gravity)
    : geom_(std::move(geom)), dt_(dt), gravity_(gravity) {
  k_pos_ = integrator_chain_lqr(dt_, weights.pos_q, weights.pos_r);
  k_att_ = integrator_chain_lqr(dt_, weights.att_q, weights.att_r);
}

ControlCommand LqrController::update(const ControllerInput& in) {
  const RigidState& s = in.state;
  const FlatOutputs& ref = in.ref.flat;
  const Vec3 e_p = s.p - ref.p;
  const Vec3 e_v = s.v - ref.v;
  integral_ += e_p * dt_;
  const Vec3 acc = ref.a - k_pos_[0] * integral_ - k_pos_[1] * e_p - k_pos_[2] * e_v +
                   gravity_ * Vec3::UnitZ();

  ControlCommand cmd;
  Mat3 R_d;
  if (attitude_from_thrust(acc, ref.psi, R_d) != FlatStatus::kOk) R_d = Mat3::Identity();
  const Mat3 R = s.rotation();
  const Mat3 E = R_d.transpose() * R - R.transpose() * R_d;
  const Vec3 e_R = 0.5 * Vec3(E(2, 1), E(0, 2), E(1, 0));
  const Vec3 alpha_cmd = -k_att_[0] * e_R - k_att_[1] * s.omega;

  const InertialProps props = inertial_props(geom_, in.morph);
  cmd.f = geom_.total_mass() * std::max(acc.dot(R.col(2)), 0.0);
  cmd.tau = props.inertia * alpha_cmd + s.omega.cross(props.inertia * s.omega);
  cmd.U = allocate(cmd.f, cmd.tau, allocation_matrix(geom_, props), geom_.max_rotor_thrust);
  cmd.a_cmd = acc;
  cmd.q_d = Quat(R_d);
  cmd.servo_rate = servo_rates(in, ControllerGains{});
  return cmd;
}

}  // namespace morphquad
