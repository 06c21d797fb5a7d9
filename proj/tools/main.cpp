// Command line front end: plan, simulate or benchmark a scenario file.

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "morphquad/pipeline.hpp"

namespace mq = morphquad;

namespace {

struct Common {
  std::string scenario;
  std::string out = "out";
  std::int64_t seed = -1;
  bool no_morph = false;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("scenario", c.scenario, "Scenario file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", c.out, "Output directory")->capture_default_str();
  cmd->add_option("--seed", c.seed, "Override the scenario seed")->check(CLI::NonNegativeNumber);
  cmd->add_flag("--no-morph", c.no_morph, "Keep the arms in the X configuration");
}

mq::RunOptions options_from(const Common& c) {
  mq::RunOptions opt;
  if (c.seed >= 0) opt.seed = static_cast<std::uint64_t>(c.seed);
  if (c.no_morph) opt.morph = false;
  return opt;
}

int run(const Common& c, mq::RunOptions opt) {
  const mq::Scenario sc = mq::load_scenario(c.scenario);
  const mq::RunReport report = mq::run_scenario(sc, opt);
  mq::write_summary(std::cout, report.summary);
  if (!opt.plan_only) {
    const auto paths = mq::emit_report(report, c.out);
    fmt::print("telemetry: {}\nsummary: {}\n", paths.telemetry.string(), paths.summary.string());
  }
  return report.summary.success ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Full-body trajectory planning and tracking for a morphing quadrotor"};
  app.require_subcommand(1);

  Common plan_args;
  auto* plan = app.add_subcommand("plan", "Build the corridor and optimize a trajectory");
  add_common(plan, plan_args);

  Common sim_args;
  std::string controller;
  auto* simulate = app.add_subcommand("simulate", "Plan, then track the plan in closed loop");
  add_common(simulate, sim_args);
  simulate->add_option("--controller", controller, "proposed, pid or lqr");

  Common bench_args;
  std::vector<std::string> controllers{"pid", "lqr", "proposed"};
  std::vector<double> vmax{0.6, 0.8, 1.0};
  auto* bench = app.add_subcommand("benchmark", "Compare controllers over a list of speeds");
  add_common(bench, bench_args);
  bench->add_option("--controllers", controllers, "Comma separated controller names")
      ->delimiter(',')
      ->capture_default_str();
  bench->add_option("--vmax", vmax, "Comma separated speed limits [m/s]")
      ->delimiter(',')
      ->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*plan) {
      auto opt = options_from(plan_args);
      opt.plan_only = true;
      return run(plan_args, opt);
    }
    if (*simulate) {
      auto opt = options_from(sim_args);
      if (!controller.empty()) opt.controller = controller;
      return run(sim_args, opt);
    }
    mq::Scenario sc = mq::load_scenario(bench_args.scenario);
    const auto opt = options_from(bench_args);
    if (opt.seed) sc.sim.seed = *opt.seed;
    if (opt.morph) sc.planner.morph.enabled = *opt.morph;
    const auto rows = mq::benchmark_controllers(sc, controllers, vmax);
    mq::write_benchmark(std::cout, rows);
    const auto path = mq::emit_benchmark(rows, sc.name, bench_args.out);
    fmt::print("table: {}\n", path.string());
    for (const auto& r : rows) {
      if (!r.success) return 1;
    }
    return 0;
  } catch (const mq::Error& e) {
    fmt::print(std::cerr, "error [{}]: {}\n", mq::to_string(e.code()), e.what());
    return 2;
  }
}
