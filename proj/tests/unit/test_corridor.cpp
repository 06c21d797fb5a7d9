#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "morphquad/corridor.hpp"
#include "morphquad/scenario.hpp"

namespace mq = morphquad;
using mq::Vec3;

namespace {

Vec3 box_lower(const mq::Polytope& p) {
  Vec3 lo = Vec3::Constant(1e9);
  for (const Vec3& v : mq::polytope_vertices(p)) lo = lo.cwiseMin(v);
  return lo;
}

Vec3 box_upper(const mq::Polytope& p) {
  Vec3 hi = Vec3::Constant(-1e9);
  for (const Vec3& v : mq::polytope_vertices(p)) hi = hi.cwiseMax(v);
  return hi;
}

}  // namespace

TEST(Polytope, PointViolation) {
  const auto cube = mq::Polytope::box(Vec3::Zero(), Vec3::Ones());
  EXPECT_LT(mq::point_violation(cube, cube.seed), 0.0);
  EXPECT_NEAR(mq::point_violation(cube, Vec3(1.0, 0.3, 0.6)), 0.0, 1e-12);
  EXPECT_NEAR(mq::point_violation(cube, Vec3(0.5, 0.5, -0.2)), 0.2, 1e-12);

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-0.5, 1.5);
  for (int i = 0; i < 1000; ++i) {
    const Vec3 x(u(rng), u(rng), u(rng));
    const bool inside = (x.array() > 0.0).all() && (x.array() < 1.0).all();
    EXPECT_EQ(mq::point_violation(cube, x) < 0.0, inside);
  }
}

TEST(Polytope, BoxVertices) {
  const auto box = mq::Polytope::box(Vec3(-1, 0, 2), Vec3(1, 0.5, 3));
  const auto v = mq::polytope_vertices(box);
  ASSERT_EQ(v.size(), 8u);
  for (const Vec3& x : v) EXPECT_NEAR(mq::point_violation(box, x), 0.0, 1e-12);
  EXPECT_LT((box_lower(box) - Vec3(-1, 0, 2)).norm(), 1e-12);
  EXPECT_LT((box_upper(box) - Vec3(1, 0.5, 3)).norm(), 1e-12);
}

TEST(Polytope, IntersectionInteriorPoint) {
  const auto a = mq::Polytope::box(Vec3::Zero(), Vec3::Ones());
  const auto b = mq::Polytope::box(Vec3(0.5, 0.5, 0.5), Vec3(2, 2, 2));
  const auto p = mq::intersection_interior_point(a, b);
  ASSERT_TRUE(p);
  EXPECT_LT(mq::point_violation(a, *p), 0.0);
  EXPECT_LT(mq::point_violation(b, *p), 0.0);
  const auto c = mq::Polytope::box(Vec3(1, 0, 0), Vec3(2, 1, 1));
  EXPECT_FALSE(mq::intersection_interior_point(a, c));
}

TEST(Corridor, FreeStraightPathIsOneBox) {
  mq::VoxelGrid g(Vec3::Zero(), 0.1, Eigen::Vector3i(30, 20, 20));
  g.inflate(0.0);
  const std::vector<Vec3> path{Vec3(0.25, 1.05, 1.05), Vec3(2.25, 1.05, 1.05)};
  const auto c = mq::build_corridor(g, path);
  ASSERT_EQ(c.size(), 1u);
  EXPECT_LT(mq::point_violation(c.polytopes[0], path.front()), 0.0);
  EXPECT_LT(mq::point_violation(c.polytopes[0], path.back()), 0.0);
}

TEST(Corridor, GapPolytopeForcesMorph) {
  const auto sc = mq::load_scenario(std::string(MORPHQUAD_SCENARIO_DIR) + "/gap.scn");
  const auto grid = mq::rasterize(sc);
  const auto search = mq::weighted_astar(grid, sc.start, sc.goal, sc.search_epsilon);
  const auto corridor = mq::build_corridor(grid, mq::shortcut_path(grid, search.path).waypoints,
                                           sc.corridor);
  const Vec3 in_gap(1.55, 0.0, 1.0);
  int found = 0;
  for (const auto& poly : corridor.polytopes) {
    if (mq::point_violation(poly, in_gap) >= 0.0) continue;
    ++found;
    const double width = box_upper(poly).y() - box_lower(poly).y();
    EXPECT_GE(width, 0.40);
    EXPECT_LT(width, 0.60);
  }
  EXPECT_GE(found, 1);
}

TEST(Corridor, RandomGridsStayInFreeSpace) {
  std::mt19937_64 rng(99);
  std::bernoulli_distribution occ(0.08);
  for (int trial = 0; trial < 20; ++trial) {
    mq::VoxelGrid g(Vec3::Zero(), 0.1, Eigen::Vector3i(24, 16, 12));
    for (std::size_t n = 0; n < g.size(); ++n) {
      const auto c = g.from_linear(n);
      if (c.y >= 6 && c.y <= 9 && c.z >= 4 && c.z <= 7) continue;  // keep a channel open
      if (occ(rng)) g.set_occupied(c);
    }
    g.inflate(0.0);
    const std::vector<Vec3> path{Vec3(0.05, 0.75, 0.55), Vec3(1.2, 0.85, 0.65),
                                 Vec3(2.35, 0.75, 0.55)};
    const auto c = mq::build_corridor(g, path);
    for (std::size_t k = 0; k < c.size(); ++k) {
      const auto& poly = c.polytopes[k];
      const Vec3 center = 0.5 * (box_lower(poly) + box_upper(poly));
      for (const Vec3& v : mq::polytope_vertices(poly)) {
        const auto idx = g.index_of(v + 1e-6 * (center - v));
        ASSERT_TRUE(idx);
        EXPECT_FALSE(g.occupied(*idx)) << "trial " << trial << " polytope " << k;
      }
      for (std::size_t n = 0; n < g.size(); ++n) {
        if (!g.occupied(g.from_linear(n))) continue;
        EXPECT_GE(mq::point_violation(poly, g.center_of(g.from_linear(n))), 0.0);
      }
      if (k > 0) EXPECT_TRUE(mq::intersection_interior_point(c.polytopes[k - 1], poly));
    }
    for (std::size_t i = 0; i < c.path.size(); ++i) {
      ASSERT_GE(c.assignment[i], 0);
      EXPECT_LE(mq::point_violation(c.polytopes[c.assignment[i]], c.path[i]), 1e-9);
    }
  }
}

TEST(Corridor, OccupiedSeedFails) {
  mq::VoxelGrid g(Vec3::Zero(), 0.1, Eigen::Vector3i(10, 10, 10));
  g.set_occupied({5, 5, 5});
  g.inflate(0.0);
  try {
    (void)mq::build_corridor(g, {Vec3(0.15, 0.55, 0.55), Vec3(0.55, 0.55, 0.55)});
    FAIL();
  } catch (const mq::Error& e) {
    EXPECT_EQ(e.code(), mq::ErrorCode::kCorridorFailure);
    EXPECT_GE(e.index(), 0);
  }
  EXPECT_THROW((void)mq::build_corridor(g, {}), mq::Error);
}

TEST(Corridor, TextRoundTrip) {
  mq::Corridor c;
  c.polytopes.push_back(mq::Polytope::box(Vec3(0, 0, 0), Vec3(1, 2, 3)));
  c.polytopes.push_back(mq::Polytope::box(Vec3(0.5, 0.1, 0.2), Vec3(4, 1, 1.7)));
  std::stringstream ss;
  mq::write_corridor(ss, c);
  const auto back = mq::read_corridor(ss);
  ASSERT_EQ(back.size(), 2u);
  for (std::size_t k = 0; k < 2; ++k) {
    ASSERT_EQ(back.polytopes[k].faces.size(), 6u);
    for (std::size_t j = 0; j < 6; ++j) {
      EXPECT_EQ(back.polytopes[k].faces[j].n, c.polytopes[k].faces[j].n);
      EXPECT_EQ(back.polytopes[k].faces[j].r, c.polytopes[k].faces[j].r);
    }
    EXPECT_LT((back.polytopes[k].seed - c.polytopes[k].seed).norm(), 1e-12);
  }
  std::istringstream bad("2\n6\n1 0 0\n");
  EXPECT_THROW((void)mq::read_corridor(bad), mq::Error);
}
