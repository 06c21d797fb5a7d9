#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "morphquad/simulation.hpp"

namespace morphquad {

struct RunSummary {
  std::string scenario;
  std::string controller;
  bool success = false;
  /// "ok", or the stage that failed followed by the error.
  std::string status = "ok";
  double avg_error = 0.0;      // [m]
  double max_error = 0.0;      // [m]
  double max_violation = 0.0;  // [m]
  double plan_violation = 0.0; // planner post-check [m]
  double final_error = 0.0;    // distance to the goal at the end [m]
  double plan_ms = 0.0;
  double energy = 0.0;         // integral of f^2 [N^2 s]
  int pieces = 0;
  double trajectory_duration = 0.0;  // [s]
  double peak_morph_rate = 0.0;      // [rad/s]
};

struct RunReport {
  RunSummary summary;
  std::vector<TelemetryRow> rows;
};

struct BenchmarkRow {
  std::string controller;
  double v_max = 0.0;
  double avg_error = 0.0;
  double max_error = 0.0;
  double energy = 0.0;
  bool success = false;
};

[[nodiscard]] std::string telemetry_header();
void write_telemetry(std::ostream& out, const std::vector<TelemetryRow>& rows);
void write_summary(std::ostream& out, const RunSummary& summary);
void write_benchmark(std::ostream& out, const std::vector<BenchmarkRow>& rows);

struct ReportPaths {
  std::filesystem::path telemetry;
  std::filesystem::path summary;
};

/// Writes <dir>/<scenario>_<controller>.csv and the matching _summary.txt,
/// creating `dir` if needed. Throws kIo naming the path on failure.
ReportPaths emit_report(const RunReport& report, const std::filesystem::path& dir);

/// Writes <dir>/<name>_benchmark.csv.
std::filesystem::path emit_benchmark(const std::vector<BenchmarkRow>& rows,
                                     const std::string& name,
                                     const std::filesystem::path& dir);

}  // namespace morphquad
