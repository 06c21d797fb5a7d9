#pragma once

#include "morphquad/controller.hpp"

namespace morphquad {

/// Linear cascade tuned around hover in the X configuration: PID on
/// position with velocity feedforward only, small-angle attitude mapping,
/// PD on Euler angles and a P rate loop. Inertia, allocation and thrust
/// model stay at their nominal X values while the arms move.
class PidCascadeController : public TrackingController {
 public:
  struct Gains {
    Vec3 kp = Vec3(3.0, 3.0, 6.0);
    Vec3 kd = Vec3(2.5, 2.5, 4.0);
    Vec3 ki = Vec3(0.5, 0.5, 1.0);
    double integral_limit = 1.0;  // [m/s^2]
    Vec3 att_p = Vec3(8.0, 8.0, 4.0);
    Vec3 rate_p = Vec3(25.0, 25.0, 15.0);
    double max_tilt = 0.5;  // [rad]
  };

  PidCascadeController(GeometryParams geom, Gains gains, double dt = 0.001,
                       double gravity = kGravity);

  ControlCommand update(const ControllerInput& in) override;
  void reset() override;
  [[nodiscard]] std::string name() const override { return "pid"; }

 private:
  GeometryParams geom_;
  Gains gains_;
  double dt_;
  double gravity_;
  InertialProps nominal_;
  Mat4 nominal_allocation_;
  Vec3 integral_ = Vec3::Zero();
};

/// Per-axis discrete LQR on integrator chains: translation on
/// [int(e), e, e_dot] with the reference acceleration as feedforward, and
/// attitude on [e_R, omega] with angular acceleration as input so the torque
/// follows the current inertia and CoG. No drag model and no thrust-slope
/// estimation.
class LqrController : public TrackingController {
 public:
  struct Weights {
    Vec3 pos_q = Vec3(4.0, 16.0, 4.0);  // integral, position, velocity
    double pos_r = 1.0;
    Vec2 att_q = Vec2(400.0, 4.0);
    double att_r = 1.0;
  };

  LqrController(GeometryParams geom, Weights weights, double dt = 0.001,
                double gravity = kGravity);

  ControlCommand update(const ControllerInput& in) override;
  void reset() override { integral_.setZero(); }
  [[nodiscard]] std::string name() const override { return "lqr"; }

  [[nodiscard]] const Eigen::VectorXd& position_gain() const { return k_pos_; }
  [[nodiscard]] const Eigen::VectorXd& attitude_gain() const { return k_att_; }

 private:
  GeometryParams geom_;
  double dt_;
  double gravity_;
  Eigen::VectorXd k_pos_;
  Eigen::VectorXd k_att_;
  Vec3 integral_ = Vec3::Zero();
};

/// Gain of the discrete LQR for a chain of n = q.size() integrators driven
/// by u at the last one (zero-order hold), state ordered from the deepest
/// integral down to the highest derivative. Cost sum x' diag(q) x + r u^2.
/// Found by iterating the Riccati recursion to a fixed point.
[[nodiscard]] Eigen::VectorXd integrator_chain_lqr(double dt, const Eigen::VectorXd& q, double r);

}  // namespace morphquad
