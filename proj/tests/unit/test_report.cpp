#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "morphquad/report.hpp"

namespace mq = morphquad;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("morphquad_report_" + name);
  fs::remove_all(dir);
  return dir;
}

mq::RunReport sample_report() {
  mq::RunReport r;
  r.summary.scenario = "demo";
  r.summary.controller = "pid";
  r.summary.success = true;
  for (int k = 0; k < 3; ++k) {
    mq::TelemetryRow row;
    row.t = 0.001 * k;
    row.state.p = mq::Vec3(0.1 * k, 1.0 / 3.0, 1.0);
    row.f = 9.81;
    row.U = {1, 2, 3, 4};
    row.err_norm = 1e-4 * k;
    r.rows.push_back(row);
  }
  return r;
}

}  // namespace

TEST(Telemetry, HeaderColumns) {
  const std::string h = mq::telemetry_header();
  EXPECT_EQ(std::count(h.begin(), h.end(), ','), 30);
  EXPECT_EQ(h.rfind("t,p_x", 0), 0u);
  std::ostringstream out;
  mq::write_telemetry(out, {});
  EXPECT_EQ(out.str(), h + "\n");
}

TEST(Telemetry, RowsHaveHeaderWidth) {
  std::ostringstream out;
  mq::write_telemetry(out, sample_report().rows);
  std::istringstream in(out.str());
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 30) << line;
    ++n;
  }
  EXPECT_EQ(n, 4);
}

TEST(Report, EmitIsByteIdentical) {
  const auto dir = scratch("emit");
  const auto report = sample_report();
  const auto a = mq::emit_report(report, dir / "a");
  const auto b = mq::emit_report(report, dir / "b");
  EXPECT_EQ(a.telemetry.filename(), "demo_pid.csv");
  EXPECT_EQ(a.summary.filename(), "demo_pid_summary.txt");
  EXPECT_EQ(slurp(a.telemetry), slurp(b.telemetry));
  EXPECT_EQ(slurp(a.summary), slurp(b.summary));
  EXPECT_NE(slurp(a.summary).find("success: true"), std::string::npos);
  fs::remove_all(dir);
}

TEST(Report, UnwritableDirectoryIsIo) {
  const auto dir = scratch("io");
  fs::create_directories(dir);
  std::ofstream(dir / "file") << "x";
  try {
    (void)mq::emit_report(sample_report(), dir / "file" / "sub");
    FAIL();
  } catch (const mq::Error& e) {
    EXPECT_EQ(e.code(), mq::ErrorCode::kIo);
  }
  fs::remove_all(dir);
}

TEST(Benchmark, TableFormat) {
  std::ostringstream out;
  mq::write_benchmark(out, {{"lqr", 0.6, 0.01, 0.02, 100.0, true}});
  EXPECT_EQ(out.str(), "controller,v_max,avg_error_m,max_error_m,energy_N2s\nlqr,0.6,0.01,0.02,100\n");
}
