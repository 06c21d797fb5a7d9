#include "morphquad/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include <fmt/format.h>

namespace morphquad {

std::unique_ptr<TrackingController> make_controller(const std::string& name,
                                                    const Scenario& sc) {
  if (name == "proposed") {
    NonlinearControllerConfig config;
    config.gains = sc.gains;
    config.use_rls = sc.use_rls;
    config.rls.rho = sc.rls_rho;
    config.dt = sc.sim.dt;
    config.gravity = sc.sim.gravity;
    return std::make_unique<NonlinearController>(sc.geom, sc.sim.drag, config);
  }
  if (name == "pid") {
    return std::make_unique<PidCascadeController>(sc.geom, PidCascadeController::Gains{},
                                                  sc.sim.dt, sc.sim.gravity);
  }
  if (name == "lqr") {
    return std::make_unique<LqrController>(sc.geom, LqrController::Weights{}, sc.sim.dt,
                                           sc.sim.gravity);
  }
  throw Error(ErrorCode::kInvalidArgument, fmt::format("unknown controller '{}'", name));
}

ReferenceFn circle_reference(const Scenario& sc, double speed, double* duration) {
  const CircleTask c = sc.circle;
  const double mass = sc.geom.total_mass();
  const DragParams drag = sc.sim.drag;
  const double g = sc.sim.gravity;
  const double yaw = sc.yaw;

  if (speed <= 0.0) {
    if (duration) *duration = c.hover_duration;
    const ReferenceSample hover = hover_reference(c.center + Vec3(c.radius, 0.0, 0.0), yaw,
                                                  MorphState::preset(MorphPreset::kX), mass, g);
    return [hover](double) { return hover; };
  }

  const double w = speed / c.radius;
  const double total = c.laps * 2.0 * kPi / w;
  if (duration) *duration = total;

  MorphProfile profile;
  const auto x = MorphState::preset(MorphPreset::kX).alpha;
  const auto h = MorphState::preset(MorphPreset::kH).alpha;
  const double half = 0.5 * c.morph_period;
  for (int k = 0; k * half < total; ++k) {
    profile.add_ramp(k * half, (k + 1) * half, k % 2 == 0 ? h : x);
  }

  return [=](double t) {
    const double th = w * t;
    const double cs = std::cos(th), sn = std::sin(th), r = c.radius;
    ReferenceSample ref;
    FlatOutputs& f = ref.flat;
    f.p = c.center + r * Vec3(cs, sn, 0.0);
    f.v = r * w * Vec3(-sn, cs, 0.0);
    f.a = -r * w * w * Vec3(cs, sn, 0.0);
    f.j = r * w * w * w * Vec3(sn, -cs, 0.0);
    f.snap = r * w * w * w * w * Vec3(cs, sn, 0.0);
    f.psi = yaw;
    ref.attitude = flat_to_reference(f, mass, drag, g);
    ref.morph = profile.at(t);
    return ref;
  };
}

namespace {

RunReport circle_run(const Scenario& sc, const std::string& controller_name, double speed) {
  RunReport report;
  report.summary.scenario = sc.name;
  report.summary.controller = controller_name;
  double duration = 0.0;
  const ReferenceFn ref = circle_reference(sc, speed, &duration);
  const ReferenceSample r0 = ref(0.0);
  SimConfig cfg = sc.sim;
  cfg.duration = duration;
  auto controller = make_controller(controller_name, sc);
  SimResult sim = simulate(*controller, sc.geom, state_from_reference(r0), r0.morph, ref, cfg);

  RunSummary& s = report.summary;
  s.avg_error = sim.avg_error;
  s.max_error = sim.max_error;
  s.energy = sim.energy;
  s.trajectory_duration = duration;
  s.final_error = sim.rows.empty() ? 0.0 : sim.rows.back().err_norm;
  // Tracking quality is what the benchmark measures, so a circle run only
  // fails when the vehicle diverges.
  s.success = !sim.diverged;
  if (sim.diverged) s.status = "simulate: state diverged";
  report.rows = std::move(sim.rows);
  return report;
}

template <typename Fn>
bool stage(RunSummary& s, const char* name, Fn&& fn) {
  try {
    fn();
    return true;
  } catch (const Error& e) {
    s.success = false;
    s.status = fmt::format("{}: {}", name, e.what());
    return false;
  }
}

}  // namespace

RunReport run_scenario(const Scenario& input, const RunOptions& options,
                       PipelineArtifacts* artifacts) {
  Scenario sc = input;
  if (options.controller) sc.controller = *options.controller;
  if (options.v_max) sc.weights.v_max = *options.v_max;
  if (options.seed) sc.sim.seed = *options.seed;
  if (options.morph) sc.planner.morph.enabled = *options.morph;

  if (sc.task == Scenario::Task::kCircle) return circle_run(sc, sc.controller, sc.weights.v_max);
  // Fail early on an unknown controller rather than after planning.
  auto controller = make_controller(sc.controller, sc);

  RunReport report;
  RunSummary& s = report.summary;
  s.scenario = sc.name;
  s.controller = sc.controller;
  PipelineArtifacts local;
  PipelineArtifacts& art = artifacts ? *artifacts : local;

  VoxelGrid grid;
  if (!stage(s, "map", [&] { grid = rasterize(sc); })) return report;
  if (!stage(s, "search", [&] {
        art.search = weighted_astar(grid, sc.start, sc.goal, sc.search_epsilon);
      })) {
    return report;
  }
  if (!stage(s, "corridor", [&] {
        const GridPath shortcut = shortcut_path(grid, art.search->path);
        art.corridor = build_corridor(grid, shortcut.waypoints, sc.corridor);
      })) {
    return report;
  }

  PlantParams plant;
  plant.mass = sc.geom.total_mass();
  plant.drag = sc.sim.drag;
  plant.gravity = sc.sim.gravity;
  if (!stage(s, "plan", [&] {
        art.plan = plan_through_corridor(*art.corridor, BoundaryState::rest(sc.start),
                                         BoundaryState::rest(sc.goal), sc.yaw, sc.geom, plant,
                                         sc.weights, sc.planner);
      })) {
    return report;
  }
  const PlanResult& plan = *art.plan;
  s.plan_ms = plan.wall_ms;
  s.plan_violation = plan.residuals.max_violation;
  s.pieces = plan.trajectory.pieces();
  s.trajectory_duration = plan.trajectory.duration();
  s.peak_morph_rate = plan.profile.peak_rate();
  if (!plan.success()) {
    s.success = false;
    s.status = fmt::format("plan: {}", to_string(plan.status));
    return report;
  }
  if (options.plan_only) {
    s.success = true;
    return report;
  }

  const MincoTrajectory& traj = plan.trajectory;
  const MorphProfile& profile = plan.profile;
  const double mass = plant.mass;
  const ReferenceFn ref = [&](double t) {
    return sample_reference(traj, profile, t, sc.yaw, mass, plant.drag, plant.gravity);
  };
  SimConfig cfg = sc.sim;
  cfg.duration = traj.duration() + sc.hold_time;
  const ReferenceSample r0 = ref(0.0);
  SimResult sim;
  if (!stage(s, "simulate", [&] {
        sim = simulate(*controller, sc.geom, state_from_reference(r0), r0.morph, ref, cfg,
                       &art.corridor->polytopes);
      })) {
    return report;
  }

  s.avg_error = sim.avg_error;
  s.max_error = sim.max_error;
  s.max_violation = sim.max_violation;
  s.energy = sim.energy;
  s.final_error = sim.rows.empty() ? 0.0 : (sim.rows.back().state.p - sc.goal).norm();
  if (sim.diverged) {
    s.status = "simulate: state diverged";
  } else if (s.max_violation > sc.violation_tolerance) {
    s.status = fmt::format("simulate: corridor violation {:.3f} m", s.max_violation);
  } else if (s.final_error > sc.goal_tolerance) {
    s.status = fmt::format("simulate: goal missed by {:.3f} m", s.final_error);
  }
  s.success = s.status == "ok";
  report.rows = std::move(sim.rows);
  return report;
}

std::vector<BenchmarkRow> benchmark_controllers(const Scenario& sc,
                                                const std::vector<std::string>& controllers,
                                                const std::vector<double>& v_max) {
  std::vector<BenchmarkRow> rows;
  for (double v : v_max) {
    for (const std::string& name : controllers) {
      RunOptions opt;
      opt.controller = name;
      opt.v_max = v;
      const RunReport r = run_scenario(sc, opt);
      rows.push_back({name, v, r.summary.avg_error, r.summary.max_error, r.summary.energy,
                      r.summary.success});
    }
  }
  return rows;
}

}  // namespace morphquad
