// Per-tick costs of the flight loop: flatness, control, and integration.

#include <benchmark/benchmark.h>

#include "morphquad/simulation.hpp"

namespace mq = morphquad;
using mq::Vec3;

namespace {

mq::FlatOutputs moving_flat() {
  mq::FlatOutputs f;
  f.p = Vec3(1.0, 0.5, 1.2);
  f.v = Vec3(0.9, -0.3, 0.1);
  f.a = Vec3(1.5, 0.8, -0.4);
  f.j = Vec3(-2.0, 1.0, 0.5);
  f.snap = Vec3(3.0, -1.0, 0.2);
  f.psi = 0.3;
  f.psi_dot = 0.1;
  return f;
}

void BM_FlatReference(benchmark::State& state) {
  const auto flat = moving_flat();
  const mq::DragParams drag;
  for (auto _ : state) {
    auto ref = mq::flat_to_reference(flat, 1.5, drag);
    benchmark::DoNotOptimize(ref);
  }
}
BENCHMARK(BM_FlatReference);

void BM_ControllerUpdate(benchmark::State& state) {
  const auto geom = mq::GeometryParams::simulation_platform();
  const mq::DragParams drag;
  mq::NonlinearController ctl(geom, drag, {});
  mq::ControllerInput in;
  in.morph = mq::MorphState::preset(mq::MorphPreset::kX);
  in.ref.flat = moving_flat();
  in.ref.attitude = mq::flat_to_reference(in.ref.flat, geom.total_mass(), drag);
  in.ref.morph = in.morph;
  in.state.p = in.ref.flat.p + Vec3(0.01, 0.0, -0.01);
  in.state.v = in.ref.flat.v;
  in.accel_z = mq::kGravity;
  for (auto _ : state) {
    auto cmd = ctl.update(in);
    benchmark::DoNotOptimize(cmd);
  }
}
BENCHMARK(BM_ControllerUpdate);

void BM_Rk4Step(benchmark::State& state) {
  const auto geom = mq::GeometryParams::simulation_platform();
  mq::PlantParams plant;
  plant.mass = geom.total_mass();
  plant.props = mq::inertial_props(geom, mq::MorphState::preset(mq::MorphPreset::kX));
  mq::RigidState s;
  s.v = Vec3(1.0, 0.2, 0.0);
  s.omega = Vec3(0.1, -0.2, 0.3);
  const mq::WrenchInput u{plant.mass * plant.gravity, Vec3(0.001, 0.0, 0.0)};
  for (auto _ : state) {
    s = mq::rk4_step(s, u, plant, 0.001);
    benchmark::DoNotOptimize(s);
  }
}
BENCHMARK(BM_Rk4Step);

void BM_SimulateHoverSecond(benchmark::State& state) {
  const auto geom = mq::GeometryParams::simulation_platform();
  const auto morph = mq::MorphState::preset(mq::MorphPreset::kX);
  const auto ref = mq::hover_reference(Vec3(0, 0, 1), 0.0, morph, geom.total_mass());
  mq::SimConfig cfg;
  cfg.duration = 1.0;
  for (auto _ : state) {
    mq::NonlinearController ctl(geom, cfg.drag, {});
    auto res = mq::simulate(ctl, geom, mq::state_from_reference(ref), morph,
                            [&](double) { return ref; }, cfg);
    benchmark::DoNotOptimize(res);
  }
}
BENCHMARK(BM_SimulateHoverSecond)->Unit(benchmark::kMillisecond);

}  // namespace
