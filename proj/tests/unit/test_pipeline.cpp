#include <gtest/gtest.h>

#include "morphquad/pipeline.hpp"

namespace mq = morphquad;

namespace {

mq::Scenario load(const std::string& name) {
  return mq::load_scenario(std::string(MORPHQUAD_SCENARIO_DIR) + "/" + name + ".scn");
}

}  // namespace

TEST(Pipeline, HopTracksClosely) {
  const auto r = mq::run_scenario(load("hop"));
  EXPECT_TRUE(r.summary.success) << r.summary.status;
  EXPECT_LT(r.summary.avg_error, 0.02);
  EXPECT_FALSE(r.rows.empty());
}

TEST(Pipeline, GapSucceedsWithMorphing) {
  mq::PipelineArtifacts art;
  const auto r = mq::run_scenario(load("gap"), {}, &art);
  EXPECT_TRUE(r.summary.success) << r.summary.status;
  EXPECT_LE(r.summary.plan_violation, 0.01);
  ASSERT_TRUE(art.plan && art.corridor && art.search);
  // The arms leave X somewhere along the way.
  EXPECT_GT(r.summary.peak_morph_rate, 0.0);
}

TEST(Pipeline, GapFailsWithoutMorphing) {
  mq::RunOptions opt;
  opt.morph = false;
  const auto r = mq::run_scenario(load("gap"), opt);
  EXPECT_FALSE(r.summary.success);
  EXPECT_NE(r.summary.status.find("plan"), std::string::npos) << r.summary.status;
}

TEST(Pipeline, PlanOnlySkipsSimulation) {
  mq::RunOptions opt;
  opt.plan_only = true;
  const auto r = mq::run_scenario(load("hop"), opt);
  EXPECT_TRUE(r.summary.success);
  EXPECT_TRUE(r.rows.empty());
  EXPECT_GT(r.summary.pieces, 0);
}

TEST(Pipeline, UnknownControllerThrows) {
  mq::RunOptions opt;
  opt.controller = "mpc";
  EXPECT_THROW((void)mq::run_scenario(load("hop"), opt), mq::Error);
}

TEST(Pipeline, RunsAreDeterministic) {
  const auto a = mq::run_scenario(load("hop"));
  const auto b = mq::run_scenario(load("hop"));
  ASSERT_EQ(a.rows.size(), b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    ASSERT_EQ(a.rows[i].state.p, b.rows[i].state.p);
  }
}

TEST(Benchmark, DuplicateControllerGivesIdenticalRows) {
  const auto rows = mq::benchmark_controllers(load("circle_track"), {"lqr", "lqr"}, {0.6});
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].avg_error, rows[1].avg_error);
  EXPECT_EQ(rows[0].energy, rows[1].energy);
}

TEST(Benchmark, HoverIsTightForEveryController) {
  const auto rows = mq::benchmark_controllers(load("circle_track"), {"pid", "lqr", "proposed"}, {0.0});
  for (const auto& r : rows) {
    EXPECT_TRUE(r.success) << r.controller;
    EXPECT_LT(r.max_error, 1e-3) << r.controller;
  }
}

TEST(Benchmark, ProposedBeatsBaselinesOnTheCircle) {
  const auto rows = mq::benchmark_controllers(load("circle_track"), {"pid", "lqr", "proposed"}, {0.8});
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_LT(rows[2].avg_error, rows[1].avg_error);
  EXPECT_LT(rows[1].avg_error, rows[0].avg_error);
}
