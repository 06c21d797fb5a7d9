#include <cmath>

#include <gtest/gtest.h>

#include "morphquad/simulation.hpp"

namespace mq = morphquad;
using mq::Vec3;

namespace {

struct Hover {
  mq::GeometryParams geom = mq::GeometryParams::simulation_platform();
  mq::MorphState morph = mq::MorphState::preset(mq::MorphPreset::kX);
  mq::SimConfig cfg;
  mq::ReferenceSample ref;

  Hover() { ref = mq::hover_reference(Vec3(0, 0, 1), 0.0, morph, geom.total_mass()); }

  mq::SimResult run(const Vec3& offset = Vec3::Zero()) {
    mq::NonlinearControllerConfig c;
    c.dt = cfg.dt;
    mq::NonlinearController ctl(geom, cfg.drag, c);
    mq::RigidState s0 = mq::state_from_reference(ref);
    s0.p += offset;
    const auto r = ref;
    return mq::simulate(ctl, geom, s0, morph, [r](double) { return r; }, cfg);
  }
};

}  // namespace

TEST(Simulation, RowCountAndTimestamps) {
  Hover h;
  h.cfg.duration = 0.5;
  h.cfg.dt = 0.002;
  const auto res = h.run();
  ASSERT_EQ(res.rows.size(), 251u);
  EXPECT_DOUBLE_EQ(res.rows.front().t, 0.0);
  EXPECT_NEAR(res.rows.back().t, 0.5, 1e-12);
  EXPECT_FALSE(res.diverged);
}

TEST(Simulation, HoverRecoversFromOffset) {
  Hover h;
  h.cfg.duration = 8.0;
  const auto res = h.run(Vec3(0.05, -0.05, 0.05));
  ASSERT_FALSE(res.diverged);
  for (const auto& row : res.rows) {
    if (row.t >= 5.0) ASSERT_LT(row.err_norm, 1e-3) << "t = " << row.t;
  }
}

TEST(Simulation, StatisticsMatchRows) {
  Hover h;
  h.cfg.duration = 1.0;
  const auto res = h.run(Vec3(0.02, 0, 0));
  double sum = 0.0, mx = 0.0;
  for (const auto& row : res.rows) {
    sum += row.err_norm;
    mx = std::max(mx, row.err_norm);
  }
  EXPECT_NEAR(res.avg_error, sum / res.rows.size(), 1e-12);
  EXPECT_DOUBLE_EQ(res.max_error, mx);
  EXPECT_GT(res.energy, 0.0);
  EXPECT_DOUBLE_EQ(res.max_violation, 0.0);
}

TEST(Simulation, NoisyRunsAreSeedDeterministic) {
  Hover h;
  h.cfg.duration = 1.0;
  h.cfg.noise.position = 0.002;
  h.cfg.noise.rate = 0.01;
  h.cfg.seed = 42;
  const auto a = h.run();
  const auto b = h.run();
  ASSERT_EQ(a.rows.size(), b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    ASSERT_EQ(a.rows[i].state.p, b.rows[i].state.p);
    ASSERT_EQ(a.rows[i].f, b.rows[i].f);
  }
  h.cfg.seed = 43;
  const auto c = h.run();
  EXPECT_NE(a.rows.back().state.p, c.rows.back().state.p);
}

TEST(Simulation, InvalidConfigThrows) {
  Hover h;
  h.cfg.dt = 0.0;
  EXPECT_THROW((void)h.run(), mq::Error);
}

TEST(CorridorViolation, BoxOracle) {
  const auto geom = mq::GeometryParams::simulation_platform();
  const auto morph = mq::MorphState::preset(mq::MorphPreset::kX);
  const Vec3 e = mq::bounding_half_extents(geom, morph).as_vector();
  const std::vector<mq::Polytope> boxes{mq::Polytope::box(Vec3(-1, -1, -1), Vec3(1, 1, 1))};
  mq::RigidState s;
  // Level body at the origin: the worst vertex sits at the largest extent.
  EXPECT_NEAR(mq::corridor_violation(boxes, s, geom, morph), e.maxCoeff() - 1.0, 1e-12);
  s.p = Vec3(1.0, 0.0, 0.0);
  EXPECT_NEAR(mq::corridor_violation(boxes, s, geom, morph), e.x(), 1e-12);
  // A second box that covers the overhang removes the violation.
  auto two = boxes;
  two.push_back(mq::Polytope::box(Vec3(0, -1, -1), Vec3(2, 1, 1)));
  EXPECT_LT(mq::corridor_violation(two, s, geom, morph), 0.0);
  EXPECT_DOUBLE_EQ(mq::corridor_violation({}, s, geom, morph), 0.0);
}
