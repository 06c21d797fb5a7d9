#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "morphquad/baseline_controllers.hpp"
#include "morphquad/report.hpp"
#include "morphquad/scenario.hpp"

namespace morphquad {

/// Overrides applied on top of a loaded scenario.
struct RunOptions {
  std::optional<std::string> controller;
  std::optional<double> v_max;
  std::optional<std::uint64_t> seed;
  std::optional<bool> morph;
  bool plan_only = false;
};

/// Everything produced on the way to the report, for callers that want to
/// inspect intermediate stages.
struct PipelineArtifacts {
  std::optional<SearchResult> search;
  std::optional<Corridor> corridor;
  std::optional<PlanResult> plan;
};

/// Controller by name ("proposed", "pid", "lqr"). Throws kInvalidArgument
/// for anything else.
[[nodiscard]] std::unique_ptr<TrackingController> make_controller(const std::string& name,
                                                                  const Scenario& scenario);

/// Reference for the circle task at speed `speed`: constant-rate circle,
/// arms sweeping X -> H -> X. At zero speed a fixed hover point with fixed
/// arms.
[[nodiscard]] ReferenceFn circle_reference(const Scenario& scenario, double speed,
                                           double* duration = nullptr);

/// Map, search, corridor, plan and closed-loop tracking. Stage failures are
/// reported in the summary instead of thrown; only invalid options throw.
[[nodiscard]] RunReport run_scenario(const Scenario& scenario, const RunOptions& options = {},
                                     PipelineArtifacts* artifacts = nullptr);

/// One row per (v_max, controller) pair in the given order.
[[nodiscard]] std::vector<BenchmarkRow> benchmark_controllers(
    const Scenario& scenario, const std::vector<std::string>& controllers,
    const std::vector<double>& v_max);

}  // namespace morphquad
