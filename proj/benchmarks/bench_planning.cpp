// Front-end and back-end planning cost on the shipped scenarios.

#include <random>
#include <string>

#include <benchmark/benchmark.h>

#include "morphquad/pipeline.hpp"

namespace mq = morphquad;
using mq::Vec3;

namespace {

const char* const kScenarios[] = {"hop", "gap", "circle", "pipe", "wallgap", "flyover"};

mq::Scenario load(int index) {
  return mq::load_scenario(std::string(MORPHQUAD_SCENARIO_DIR) + "/" + kScenarios[index] +
                           ".scn");
}

struct Prepared {
  mq::Scenario sc;
  mq::VoxelGrid grid;
  mq::Corridor corridor;
  mq::PlantParams plant;
};

Prepared prepare(int index) {
  Prepared p;
  p.sc = load(index);
  p.grid = mq::rasterize(p.sc);
  const auto search = mq::weighted_astar(p.grid, p.sc.start, p.sc.goal, p.sc.search_epsilon);
  p.corridor = mq::build_corridor(p.grid, mq::shortcut_path(p.grid, search.path).waypoints,
                                  p.sc.corridor);
  p.plant.mass = p.sc.geom.total_mass();
  p.plant.drag = p.sc.sim.drag;
  p.plant.gravity = p.sc.sim.gravity;
  return p;
}

void BM_Plan(benchmark::State& state) {
  const Prepared p = prepare(static_cast<int>(state.range(0)));
  state.SetLabel(p.sc.name);
  for (auto _ : state) {
    auto result = mq::plan_through_corridor(p.corridor, mq::BoundaryState::rest(p.sc.start),
                                            mq::BoundaryState::rest(p.sc.goal), p.sc.yaw,
                                            p.sc.geom, p.plant, p.sc.weights, p.sc.planner);
    benchmark::DoNotOptimize(result);
  }
}
BENCHMARK(BM_Plan)->DenseRange(0, 5)->Unit(benchmark::kMillisecond);

void BM_Search(benchmark::State& state) {
  const Prepared p = prepare(static_cast<int>(state.range(0)));
  state.SetLabel(p.sc.name);
  for (auto _ : state) {
    auto result = mq::weighted_astar(p.grid, p.sc.start, p.sc.goal, p.sc.search_epsilon);
    benchmark::DoNotOptimize(result);
  }
}
BENCHMARK(BM_Search)->DenseRange(0, 5)->Unit(benchmark::kMillisecond);

void BM_Corridor(benchmark::State& state) {
  const Prepared p = prepare(static_cast<int>(state.range(0)));
  const auto search = mq::weighted_astar(p.grid, p.sc.start, p.sc.goal, p.sc.search_epsilon);
  const auto path = mq::shortcut_path(p.grid, search.path).waypoints;
  state.SetLabel(p.sc.name);
  for (auto _ : state) {
    auto corridor = mq::build_corridor(p.grid, path, p.sc.corridor);
    benchmark::DoNotOptimize(corridor);
  }
}
BENCHMARK(BM_Corridor)->DenseRange(0, 5)->Unit(benchmark::kMillisecond);

void BM_MincoSolve(benchmark::State& state) {
  const int K = static_cast<int>(state.range(0));
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::Matrix3Xd q(3, K - 1);
  for (int i = 0; i < K - 1; ++i) q.col(i) = Vec3(i + 1.0, u(rng), u(rng));
  const Eigen::VectorXd T = Eigen::VectorXd::Constant(K, 0.8);
  const auto start = mq::BoundaryState::rest(Vec3::Zero());
  const auto goal = mq::BoundaryState::rest(Vec3(K, 0, 0));
  mq::MincoTrajectory traj;
  for (auto _ : state) {
    traj.solve(start, goal, q, T);
    benchmark::DoNotOptimize(traj);
  }
  state.SetComplexityN(K);
}
BENCHMARK(BM_MincoSolve)->RangeMultiplier(2)->Range(2, 64)->Complexity(benchmark::oN);

}  // namespace
