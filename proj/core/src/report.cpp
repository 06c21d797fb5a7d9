#include "morphquad/report.hpp"

#include <fstream>
#include <ostream>
#include <system_error>

#include <fmt/format.h>
#include <fmt/ostream.h>

namespace morphquad {

std::string telemetry_header() {
  return "t,p_x,p_y,p_z,v_x,v_y,v_z,q_w,q_x,q_y,q_z,omega_x,omega_y,omega_z,"
         "alpha_1,alpha_2,alpha_3,alpha_4,f,tau_x,tau_y,tau_z,U_1,U_2,U_3,U_4,H_n,"
         "ref_p_x,ref_p_y,ref_p_z,err_norm";
}

void write_telemetry(std::ostream& out, const std::vector<TelemetryRow>& rows) {
  out << telemetry_header() << '\n';
  fmt::memory_buffer buf;
  for (const TelemetryRow& r : rows) {
    buf.clear();
    auto it = std::back_inserter(buf);
    const RigidState& s = r.state;
    fmt::format_to(it, "{:.9g},{:.9g},{:.9g},{:.9g},{:.9g},{:.9g},{:.9g}", r.t, s.p.x(), s.p.y(),
                   s.p.z(), s.v.x(), s.v.y(), s.v.z());
    fmt::format_to(it, ",{:.9g},{:.9g},{:.9g},{:.9g},{:.9g},{:.9g},{:.9g}", s.q.w(), s.q.x(),
                   s.q.y(), s.q.z(), s.omega.x(), s.omega.y(), s.omega.z());
    for (double a : r.alpha) fmt::format_to(it, ",{:.9g}", a);
    fmt::format_to(it, ",{:.9g},{:.9g},{:.9g},{:.9g}", r.f, r.tau.x(), r.tau.y(), r.tau.z());
    for (double u : r.U) fmt::format_to(it, ",{:.9g}", u);
    fmt::format_to(it, ",{:.9g},{:.9g},{:.9g},{:.9g},{:.9g}\n", r.H, r.ref_p.x(), r.ref_p.y(),
                   r.ref_p.z(), r.err_norm);
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  }
}

void write_summary(std::ostream& out, const RunSummary& s) {
  fmt::print(out, "scenario: {}\n", s.scenario);
  fmt::print(out, "controller: {}\n", s.controller);
  fmt::print(out, "success: {}\n", s.success ? "true" : "false");
  fmt::print(out, "status: {}\n", s.status);
  fmt::print(out, "avg_error_m: {:.9g}\n", s.avg_error);
  fmt::print(out, "max_error_m: {:.9g}\n", s.max_error);
  fmt::print(out, "max_violation_m: {:.9g}\n", s.max_violation);
  fmt::print(out, "plan_violation_m: {:.9g}\n", s.plan_violation);
  fmt::print(out, "final_error_m: {:.9g}\n", s.final_error);
  fmt::print(out, "plan_ms: {:.3f}\n", s.plan_ms);
  fmt::print(out, "energy_N2s: {:.9g}\n", s.energy);
  fmt::print(out, "pieces: {}\n", s.pieces);
  fmt::print(out, "trajectory_duration_s: {:.9g}\n", s.trajectory_duration);
  fmt::print(out, "peak_morph_rate: {:.9g}\n", s.peak_morph_rate);
}

void write_benchmark(std::ostream& out, const std::vector<BenchmarkRow>& rows) {
  out << "controller,v_max,avg_error_m,max_error_m,energy_N2s\n";
  for (const BenchmarkRow& r : rows) {
    fmt::print(out, "{},{:.9g},{:.9g},{:.9g},{:.9g}\n", r.controller, r.v_max, r.avg_error,
               r.max_error, r.energy);
  }
}

namespace {

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    throw Error(ErrorCode::kIo,
                fmt::format("cannot create directory '{}': {}", dir.string(), ec.message()));
  }
}

template <typename Fn>
void write_file(const std::filesystem::path& path, Fn&& fn) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, fmt::format("cannot open '{}' for writing", path.string()));
  fn(out);
  out.flush();
  if (!out) throw Error(ErrorCode::kIo, fmt::format("write to '{}' failed", path.string()));
}

}  // namespace

ReportPaths emit_report(const RunReport& report, const std::filesystem::path& dir) {
  ensure_dir(dir);
  const std::string stem = fmt::format("{}_{}", report.summary.scenario, report.summary.controller);
  ReportPaths paths{dir / (stem + ".csv"), dir / (stem + "_summary.txt")};
  write_file(paths.telemetry, [&](std::ostream& out) { write_telemetry(out, report.rows); });
  write_file(paths.summary, [&](std::ostream& out) { write_summary(out, report.summary); });
  return paths;
}

std::filesystem::path emit_benchmark(const std::vector<BenchmarkRow>& rows,
                                     const std::string& name,
                                     const std::filesystem::path& dir) {
  ensure_dir(dir);
  const auto path = dir / (name + "_benchmark.csv");
  write_file(path, [&](std::ostream& out) { write_benchmark(out, rows); });
  return path;
}

}  // namespace morphquad
