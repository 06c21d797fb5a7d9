#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "morphquad/flatness.hpp"
#include "morphquad/optimizer.hpp"
#include "morphquad/pipeline.hpp"
#include "oracles.hpp"

namespace mq = morphquad;
using mq::Vec3;

namespace {

std::string scenario_path(const char* name) {
  return std::string(MORPHQUAD_SCENARIO_DIR) + "/" + name;
}

using oracle::Audit;
using oracle::audit_gradient;
using oracle::random_problem;

mq::PipelineArtifacts plan_scenario(const char* file, bool morph = true) {
  auto sc = mq::load_scenario(scenario_path(file));
  mq::RunOptions opt;
  opt.plan_only = true;
  opt.morph = morph;
  mq::PipelineArtifacts art;
  (void)mq::run_scenario(sc, opt, &art);
  return art;
}

}  // namespace

TEST(Optimizer, InactivePenaltiesLeaveJerkAndTime) {
  mq::PlanProblem pb;
  pb.polytopes = {mq::Polytope::box(Vec3(-5, -5, -5), Vec3(5, 5, 5))};
  pb.piece_polytope = {0};
  pb.start = mq::BoundaryState::rest(Vec3::Zero());
  pb.goal = mq::BoundaryState::rest(Vec3(1, 0, 0));
  pb.geom = mq::GeometryParams::simulation_platform();
  pb.piece_extents = {mq::half_extents_at(pb.geom, mq::kPi / 4)};
  mq::OptimizerWeights w;
  w.v_max = 10.0;
  w.omega_max = 10.0;
  Eigen::Matrix3Xd gq(3, 0);
  Eigen::VectorXd gt;
  const Eigen::VectorXd tau = Eigen::VectorXd::Constant(1, std::log(2.0));
  const auto terms = mq::cost_and_gradient(pb, w, Eigen::Matrix3Xd(3, 0), tau, gq, gt);
  EXPECT_EQ(terms.velocity, 0.0);
  EXPECT_EQ(terms.omega, 0.0);
  EXPECT_EQ(terms.collision, 0.0);
  // Rest-to-rest quintic over distance d in time T: 720 d^2 / T^5.
  EXPECT_NEAR(terms.jerk, 720.0 / 32.0, 1e-9);
  EXPECT_NEAR(terms.total, 720.0 / 32.0 + w.rho_T * 2.0, 1e-9);
}

TEST(Optimizer, GradientAuditOnRandomCorridors) {
  std::mt19937_64 rng(1234);
  int active = 0;
  for (int trial = 0; trial < 20; ++trial) {
    mq::OptimizerWeights w;
    const auto pb = random_problem(rng, w);
    const Audit a = audit_gradient(pb, w);
    EXPECT_LT(a.worst, 1e-4) << "trial " << trial;
    active += a.penalties_active;
  }
  EXPECT_GE(active, 10);
}

TEST(Optimizer, HopMatchesClosedFormJerk) {
  const auto art = plan_scenario("hop.scn");
  ASSERT_TRUE(art.plan);
  const auto& plan = *art.plan;
  ASSERT_TRUE(plan.success());
  const double d = (plan.trajectory.goal().p - plan.trajectory.start().p).norm();
  const double T = plan.trajectory.duration();
  const double closed_form = 720.0 * d * d / std::pow(T, 5);
  EXPECT_NEAR(plan.cost.jerk, closed_form, 0.01 * closed_form);
}

TEST(Optimizer, GapNeedsTheFold) {
  const auto art = plan_scenario("gap.scn");
  ASSERT_TRUE(art.plan && art.plan->success());
  const auto& plan = *art.plan;
  const auto sc = mq::load_scenario(scenario_path("gap.scn"));
  const auto& traj = plan.trajectory;
  const auto x_box = mq::body_vertices(mq::half_extents_at(sc.geom, mq::kPi / 4));
  double worst_flown = -1.0, worst_unfolded = -1.0;
  double t0 = 0.0;
  for (int k = 0; k < traj.pieces(); ++k) {
    const auto& poly = art.corridor->polytopes[plan.piece_polytope[k]];
    const double T = traj.durations()[k];
    for (int n = 0; n <= 4 * sc.weights.L; ++n) {
      const double t = t0 + T * n / (4 * sc.weights.L);
      mq::FlatOutputs f;
      f.v = traj.evaluate(t, 1);
      f.a = traj.evaluate(t, 2);
      f.j = traj.evaluate(t, 3);
      f.psi = sc.yaw;
      const auto ref = mq::flat_to_reference(f, sc.geom.total_mass(), sc.sim.drag);
      const Vec3 p = traj.evaluate(t, 0);
      for (const Vec3& v : mq::body_vertices(sc.geom, plan.profile.at(t))) {
        worst_flown = std::max(worst_flown, mq::point_violation(poly, p + ref.R * v));
      }
      for (const Vec3& v : x_box) {
        worst_unfolded = std::max(worst_unfolded, mq::point_violation(poly, p + ref.R * v));
      }
    }
    t0 += T;
  }
  EXPECT_LE(worst_flown, 0.01);
  EXPECT_GT(worst_unfolded, 0.01);
  // The fold is complete before the gap box is entered.
  EXPECT_FALSE(plan.profile.constant());
}

TEST(Optimizer, GapWithoutMorphIsRejected) {
  auto sc = mq::load_scenario(scenario_path("gap.scn"));
  mq::RunOptions opt;
  opt.plan_only = true;
  opt.morph = false;
  const auto report = mq::run_scenario(sc, opt);
  EXPECT_FALSE(report.summary.success);
  EXPECT_NE(report.summary.status.find("MorphInfeasible"), std::string::npos)
      << report.summary.status;
}

TEST(Optimizer, HeavierPenaltiesNeverLoosenConstraints) {
  std::mt19937_64 rng(77);
  mq::OptimizerWeights w;
  const auto pb = random_problem(rng, w);
  const auto light = mq::plan(pb, w);
  auto heavy_w = w;
  heavy_w.rho_v *= 10;
  heavy_w.rho_w *= 10;
  heavy_w.rho_c *= 10;
  const auto heavy = mq::plan(pb, heavy_w);
  auto excess = [&](const mq::Residuals& r) {
    return std::max({r.max_speed - w.v_max, r.max_omega - w.omega_max, r.max_violation});
  };
  EXPECT_LE(excess(heavy.residuals), excess(light.residuals) + 1e-9);
}

TEST(Optimizer, AcceptedCostIsMonotone) {
  std::mt19937_64 rng(5);
  mq::OptimizerWeights w;
  const auto pb = random_problem(rng, w);
  std::vector<double> trace;
  mq::LbfgsParams solver;
  solver.on_iterate = [&](int, double f) { trace.push_back(f); };
  (void)mq::plan(pb, w, solver);
  ASSERT_GT(trace.size(), 2u);
  for (std::size_t i = 1; i < trace.size(); ++i) EXPECT_LE(trace[i], trace[i - 1]);
}

TEST(Optimizer, PlanIsDeterministic) {
  std::mt19937_64 rng(8);
  mq::OptimizerWeights w;
  const auto pb = random_problem(rng, w);
  const auto a = mq::plan(pb, w);
  const auto b = mq::plan(pb, w);
  EXPECT_EQ(a.trajectory.coefficients(), b.trajectory.coefficients());
  EXPECT_EQ(a.trajectory.durations(), b.trajectory.durations());
  EXPECT_EQ(a.cost.total, b.cost.total);
  EXPECT_EQ(a.iterations, b.iterations);
}

TEST(Optimizer, InfeasibleStart) {
  std::mt19937_64 rng(9);
  mq::OptimizerWeights w;
  auto pb = random_problem(rng, w);
  pb.start.p = Vec3(-3, 0, 1);
  try {
    (void)mq::plan(pb, w);
    FAIL();
  } catch (const mq::Error& e) {
    EXPECT_EQ(e.code(), mq::ErrorCode::kInfeasibleStart);
  }
  w.L = 2;
  EXPECT_THROW((void)mq::plan(random_problem(rng, w), w), mq::Error);
}

TEST(Optimizer, InitialDurationsFollowTrapezoid) {
  Eigen::Matrix3Xd q(3, 2);
  q.col(0) = Vec3(1, 0, 0);
  q.col(1) = Vec3(3, 0, 0);
  const auto T = mq::initial_durations(Vec3::Zero(), q, Vec3(4, 0, 0), 1.0);
  // Cruise 0.5 m/s reached at 1 m/s^2 after 0.5 s and 0.125 m.
  const double total = 2 * 0.5 + (4.0 - 0.25) / 0.5;
  EXPECT_NEAR(T.sum(), total, 1e-12);
  EXPECT_NEAR(T(1), 2.0 / 0.5, 1e-12);
  EXPECT_TRUE((T.array() > 0).all());
}
