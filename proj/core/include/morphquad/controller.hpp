#pragma once

#include <array>
#include <memory>
#include <string>

#include "morphquad/dynamics.hpp"
#include "morphquad/flatness.hpp"
#include "morphquad/morph_schedule.hpp"
#include "morphquad/morphology.hpp"
#include "morphquad/trajectory.hpp"

namespace morphquad {

struct ControllerGains {
  Mat3 K_a = Mat3::Identity();
  /// Position feedback a_Fb = Kp e_p + Kv e_v + Ki int(e_p); errors are
  /// measured minus desired. The three gains place a triple pole at -2.
  Vec3 kp_pos = Vec3::Constant(12.0);
  Vec3 kv_pos = Vec3::Constant(6.0);
  Vec3 ki_pos = Vec3::Constant(8.0);
  double pos_integral_limit = 0.5;  // on Ki * int(e_p) [m/s^2]

  Vec3 K_A = Vec3(10.0, 10.0, 6.0);  // attitude [1/s]

  /// Body-rate PID producing the angular acceleration command; the
  /// derivative acts on the measured rate.
  Vec3 rate_p = Vec3(30.0, 30.0, 20.0);
  Vec3 rate_i = Vec3(5.0, 5.0, 2.0);
  Vec3 rate_d = Vec3(0.0, 0.0, 0.0);
  double rate_integral_limit = 5.0;  // [rad/s^2]

  double servo_kp = 5.0;
  double servo_kd = 0.3;
  double servo_slew = 3.0;  // [rad/s]
};

struct RlsState {
  double H = 1.0;    // slope of measured vs commanded normalized thrust
  double P = 100.0;  // covariance
  double rho = 0.995;
  double K = 0.0;
  double c = 0.0;  // regressor of the last update
};

/// One forgetting-factor least-squares step for a_meas_z = H c with
/// c = a_cmd_z / H_{n-1}. Order: gain, covariance, slope, then the stored
/// regressor.
[[nodiscard]] RlsState rls_update(const RlsState& rls, double a_cmd_z, double a_meas_z);

/// What a controller is asked to track at one instant.
struct ReferenceSample {
  FlatOutputs flat;
  FlatReference attitude;
  MorphState morph;
};

/// Reference at time t from a trajectory and morph profile. Past the end the
/// vehicle holds the goal.
[[nodiscard]] ReferenceSample sample_reference(const MincoTrajectory& traj,
                                               const MorphProfile& profile, double t,
                                               double yaw, double mass, const DragParams& drag,
                                               double gravity = kGravity);

/// Hover at `p` with constant arm angles.
[[nodiscard]] ReferenceSample hover_reference(const Vec3& p, double yaw, const MorphState& morph,
                                              double mass, double gravity = kGravity);

struct ControllerInput {
  RigidState state;
  MorphState morph;      // measured arm angles and rates
  double accel_z = 0.0;  // body-z specific force from the accelerometer [m/s^2]
  ReferenceSample ref;
};

struct ControlCommand {
  double f = 0.0;                      // collective thrust [N]
  Vec3 tau = Vec3::Zero();             // body torque [N m]
  std::array<double, 4> U{};           // rotor thrusts after saturation [N]
  std::array<double, 4> servo_rate{};  // arm rate commands [rad/s]
  Vec3 a_cmd = Vec3::Zero();
  Quat q_d = Quat::Identity();
  Vec3 omega_cmd = Vec3::Zero();
  double H = 1.0;
};

/// Interface shared by the proposed controller and the baselines.
class TrackingController {
 public:
  virtual ~TrackingController() = default;
  virtual ControlCommand update(const ControllerInput& in) = 0;
  virtual void reset() = 0;
  [[nodiscard]] virtual std::string name() const = 0;
};

// Individual loops, exposed for testing.

/// a_cmd = K_a a_d + R D R^T v_d - a_Fb + g e3. The integrator in
/// `integral` is advanced by dt and clamped.
[[nodiscard]] Vec3 position_loop(const RigidState& state, const FlatOutputs& ref,
                                 const ControllerGains& gains, const DragParams& drag,
                                 Vec3& integral, double dt, double gravity = kGravity);

struct AttitudeCommand {
  Quat q_d = Quat::Identity();
  Mat3 R_d = Mat3::Identity();
  Vec3 omega_cmd = Vec3::Zero();
};

/// Desired attitude from a_cmd and yaw, then
/// omega_cmd = K_A sgn(q_e0) q_e,vec + omega_ff with q_e = q^-1 q_d.
/// Throws kSingularYaw / kDegenerateThrust.
[[nodiscard]] AttitudeCommand attitude_loop(const Vec3& a_cmd, double psi, const Quat& q,
                                            const Vec3& K_A, const Vec3& omega_ff);

/// tau = J (omega_dot_ff + omega_dot_cmd) + omega_cmd x J omega_cmd
///       + A R_d^T v + B omega_cmd.
[[nodiscard]] Vec3 torque_loop(const Vec3& omega_cmd, const Vec3& omega_dot_ff,
                               const Vec3& omega_dot_cmd, const Mat3& R_d, const Vec3& v,
                               const InertialProps& props, const DragParams& drag);

/// Rotor thrusts for [f, tau]. If saturated: roll and pitch torque are kept,
/// yaw torque is scaled down first, then the collective thrust is shifted,
/// and only then are roll/pitch scaled. The result is clamped to
/// [0, u_max].
[[nodiscard]] std::array<double, 4> allocate(double f, const Vec3& tau, const Mat4& M_C,
                                             double u_max);

/// Arm rate command K_p e + K_d e_dot (+ reference rate), clamped to the
/// slew limit. e = alpha_d - alpha_hat.
[[nodiscard]] double servo_loop(double alpha_d, double alpha_hat, double alpha_hat_dot,
                                const ControllerGains& gains, double alpha_d_dot = 0.0);

struct NonlinearControllerConfig {
  ControllerGains gains;
  RlsState rls;
  bool use_rls = true;
  double dt = 0.001;            // inner loop period [s]
  int position_divider = 4;     // position loop runs every n-th tick
  double gravity = kGravity;
};

/// Drag-aware cascaded controller with online thrust-slope estimation. The
/// inertial model and allocation matrix follow the measured arm angles.
class NonlinearController : public TrackingController {
 public:
  NonlinearController(GeometryParams geom, DragParams drag, NonlinearControllerConfig config);

  ControlCommand update(const ControllerInput& in) override;
  void reset() override;
  [[nodiscard]] std::string name() const override { return "proposed"; }

  [[nodiscard]] const RlsState& rls() const { return rls_; }

 private:
  GeometryParams geom_;
  DragParams drag_;
  NonlinearControllerConfig config_;
  RlsState rls_;
  Vec3 pos_integral_ = Vec3::Zero();
  Vec3 rate_integral_ = Vec3::Zero();
  Vec3 last_omega_ = Vec3::Zero();
  Vec3 a_cmd_ = Vec3::Zero();
  double last_a_cmd_z_ = 0.0;
  long tick_ = 0;
};

}  // namespace morphquad
