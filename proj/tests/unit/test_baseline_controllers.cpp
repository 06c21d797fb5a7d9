#include <cmath>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "morphquad/baseline_controllers.hpp"

namespace mq = morphquad;
using mq::Vec3;

TEST(IntegratorChainLqr, ScalarMatchesClosedForm) {
  // x+ = x + dt u: the Riccati fixed point solves dt^2 P^2 - q dt^2 P - q r = 0.
  const double dt = 0.01, q = 3.0, r = 0.5;
  const double P = (q * dt * dt + std::sqrt(q * q * std::pow(dt, 4) + 4 * dt * dt * q * r)) /
                   (2 * dt * dt);
  const double K = dt * P / (r + dt * dt * P);
  const auto k = mq::integrator_chain_lqr(dt, Eigen::VectorXd::Constant(1, q), r);
  EXPECT_NEAR(k(0), K, 1e-9 * K);
}

TEST(IntegratorChainLqr, DoubleIntegratorApproachesContinuousGain) {
  // Continuous double integrator: k1 = sqrt(q1 / r), k2 = sqrt(q2 / r + 2 k1).
  const double q1 = 16.0, q2 = 4.0, r = 1.0;
  const auto k = mq::integrator_chain_lqr(1e-3, Eigen::Vector2d(q1, q2), r);
  const double k1 = std::sqrt(q1 / r), k2 = std::sqrt(q2 / r + 2 * k1);
  EXPECT_NEAR(k(0), k1, 0.01 * k1);
  EXPECT_NEAR(k(1), k2, 0.01 * k2);
}

TEST(IntegratorChainLqr, TripleChainIsStabilizing) {
  const double dt = 1e-3;
  const auto k = mq::integrator_chain_lqr(dt, Eigen::Vector3d(4, 16, 4), 1.0);
  Eigen::Matrix3d A;
  A << 1, dt, dt * dt / 2, 0, 1, dt, 0, 0, 1;
  const Eigen::Vector3d B(dt * dt * dt / 6, dt * dt / 2, dt);
  const Eigen::Matrix3d closed = A - B * k.transpose();
  const Eigen::Vector3cd eig = closed.eigenvalues();
  for (int i = 0; i < 3; ++i) EXPECT_LT(std::abs(eig(i)), 1.0);
  EXPECT_TRUE((k.array() > 0).all());
  EXPECT_THROW((void)mq::integrator_chain_lqr(0.0, Eigen::Vector2d(1, 1), 1.0), mq::Error);
  EXPECT_THROW((void)mq::integrator_chain_lqr(dt, Eigen::Vector2d(1, 1), 0.0), mq::Error);
}

class BaselineHover : public ::testing::TestWithParam<std::string> {};

TEST_P(BaselineHover, HoverCommandIsWeight) {
  const auto g = mq::GeometryParams::simulation_platform();
  std::unique_ptr<mq::TrackingController> c;
  if (GetParam() == "pid") {
    c = std::make_unique<mq::PidCascadeController>(g, mq::PidCascadeController::Gains{});
  } else {
    c = std::make_unique<mq::LqrController>(g, mq::LqrController::Weights{});
  }
  EXPECT_EQ(c->name(), GetParam());
  mq::ControllerInput in;
  in.state.p = Vec3(1, 2, 1);
  in.morph = mq::MorphState::preset(mq::MorphPreset::kX);
  in.ref = mq::hover_reference(in.state.p, 0.0, in.morph, g.total_mass());
  for (int i = 0; i < 10; ++i) {
    const auto cmd = c->update(in);
    EXPECT_NEAR(cmd.f, g.total_mass() * mq::kGravity, 1e-9);
    EXPECT_LT(cmd.tau.norm(), 1e-12);
    for (double u : cmd.U) EXPECT_NEAR(u, cmd.f / 4, 1e-9);
  }
}

TEST_P(BaselineHover, PushesBackTowardReference) {
  const auto g = mq::GeometryParams::simulation_platform();
  std::unique_ptr<mq::TrackingController> c;
  if (GetParam() == "pid") {
    c = std::make_unique<mq::PidCascadeController>(g, mq::PidCascadeController::Gains{});
  } else {
    c = std::make_unique<mq::LqrController>(g, mq::LqrController::Weights{});
  }
  mq::ControllerInput in;
  in.morph = mq::MorphState::preset(mq::MorphPreset::kX);
  in.ref = mq::hover_reference(Vec3(0, 0, 1), 0.0, in.morph, g.total_mass());
  in.state.p = Vec3(0.2, 0, 0.9);
  const auto cmd = c->update(in);
  EXPECT_GT(cmd.f, g.total_mass() * mq::kGravity);  // climb back up
  EXPECT_GT(cmd.a_cmd.x(), -1e9);
  EXPECT_LT(cmd.a_cmd.x(), 0.0);  // accelerate toward -x
  c->reset();
}

INSTANTIATE_TEST_SUITE_P(Controllers, BaselineHover, ::testing::Values("pid", "lqr"));
