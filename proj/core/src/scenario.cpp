#include "morphquad/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <fmt/format.h>

namespace morphquad {

namespace {

struct Rect {
  Vec2 lo;
  Vec2 hi;
};

bool overlaps(double lo_a, double hi_a, double lo_b, double hi_b) {
  return lo_a <= hi_b && lo_b <= hi_a;
}

double farthest_corner(const Rect& r, const Vec2& c) {
  const double dy = std::max(std::abs(r.lo.x() - c.x()), std::abs(r.hi.x() - c.x()));
  const double dz = std::max(std::abs(r.lo.y() - c.y()), std::abs(r.hi.y() - c.y()));
  return std::hypot(dy, dz);
}

double nearest_point(const Rect& r, const Vec2& c) {
  const double dy = std::max({r.lo.x() - c.x(), 0.0, c.x() - r.hi.x()});
  const double dz = std::max({r.lo.y() - c.y(), 0.0, c.y() - r.hi.y()});
  return std::hypot(dy, dz);
}

}  // namespace

bool Obstacle::intersects(const Vec3& lo, const Vec3& hi) const {
  switch (kind) {
    case Kind::kBox:
      return overlaps(lo.x(), hi.x(), lower.x(), upper.x()) &&
             overlaps(lo.y(), hi.y(), lower.y(), upper.y()) &&
             overlaps(lo.z(), hi.z(), lower.z(), upper.z());
    case Kind::kPipe: {
      if (!overlaps(lo.x(), hi.x(), x, x + length)) return false;
      const Rect r{lo.tail<2>(), hi.tail<2>()};
      const double radius = 0.5 * diameter;
      return farthest_corner(r, center) > radius && nearest_point(r, center) <= radius + wall;
    }
    case Kind::kWallHole:
    case Kind::kWallCircle: break;
  }
  if (!overlaps(lo.x(), hi.x(), x, x + thickness)) return false;
  Rect r{lo.tail<2>(), hi.tail<2>()};
  if (span_lower) r.lo = r.lo.cwiseMax(*span_lower);
  if (span_upper) r.hi = r.hi.cwiseMin(*span_upper);
  if ((r.lo.array() > r.hi.array()).any()) return false;
  if (kind == Kind::kWallCircle) return farthest_corner(r, center) > 0.5 * diameter;
  const Vec2 h_lo = center - 0.5 * hole_size;
  const Vec2 h_hi = center + 0.5 * hole_size;
  return (r.lo.array() < h_lo.array()).any() || (r.hi.array() > h_hi.array()).any();
}

void Obstacle::validate(int line) const {
  auto fail = [line](const char* what) {
    throw Error(ErrorCode::kScenarioParse, fmt::format("line {}: {}", line, what), line);
  };
  switch (kind) {
    case Kind::kBox:
      if ((upper.array() <= lower.array()).any()) fail("box upper must exceed lower");
      break;
    case Kind::kWallHole:
      if (!(thickness > 0.0) || (hole_size.array() <= 0.0).any()) {
        fail("wall thickness and hole size must be positive");
      }
      break;
    case Kind::kWallCircle:
      if (!(thickness > 0.0) || !(diameter > 0.0)) {
        fail("wall thickness and diameter must be positive");
      }
      break;
    case Kind::kPipe:
      if (!(length > 0.0) || !(diameter > 0.0) || !(wall > 0.0)) {
        fail("pipe length, diameter and wall must be positive");
      }
      break;
  }
}

void Scenario::validate() const {
  geom.validate();
  weights.validate();
  auto fail = [](const std::string& what) { throw Error(ErrorCode::kInvalidArgument, what); };
  if ((map_upper.array() <= map_lower.array()).any()) fail("map upper must exceed lower");
  if (!(resolution > 0.0) || !(inflation >= 0.0)) fail("resolution must be positive");
  if (!(search_epsilon >= 1.0)) fail("search epsilon must be at least 1");
  if (!(sim.dt > 0.0) || !(hold_time >= 0.0)) fail("simulation times must be positive");
  if (!(goal_tolerance > 0.0) || !(violation_tolerance >= 0.0)) fail("tolerances must be positive");
  if (task == Task::kCircle) {
    if (!(circle.radius > 0.0) || !(circle.laps > 0.0) || !(circle.morph_period > 0.0)) {
      fail("circle radius, laps and morph period must be positive");
    }
    return;
  }
  for (std::size_t i = 0; i < obstacles.size(); ++i) {
    if (obstacles[i].contains(start)) fail(fmt::format("start lies inside obstacle {}", i));
    if (obstacles[i].contains(goal)) fail(fmt::format("goal lies inside obstacle {}", i));
  }
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

class LineError {
 public:
  explicit LineError(int line) : line_(line) {}
  [[noreturn]] void operator()(const std::string& what) const {
    throw Error(ErrorCode::kScenarioParse, fmt::format("line {}: {}", line_, what), line_);
  }

 private:
  int line_;
};

std::vector<double> numbers(const std::string& value, const LineError& fail) {
  std::vector<double> out;
  std::istringstream ss(value);
  std::string tok;
  while (ss >> tok) {
    double d = 0.0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), d);
    if (ec != std::errc() || ptr != tok.data() + tok.size() || !std::isfinite(d)) {
      fail(fmt::format("'{}' is not a number", tok));
    }
    out.push_back(d);
  }
  return out;
}

double scalar(const std::string& v, const LineError& fail) {
  const auto n = numbers(v, fail);
  if (n.size() != 1) fail("expected one number");
  return n[0];
}

Vec2 vec2(const std::string& v, const LineError& fail) {
  const auto n = numbers(v, fail);
  if (n.size() != 2) fail("expected two numbers");
  return {n[0], n[1]};
}

/// Three numbers, or one broadcast to all axes when `broadcast` is set.
Vec3 vec3(const std::string& v, const LineError& fail, bool broadcast = false) {
  const auto n = numbers(v, fail);
  if (broadcast && n.size() == 1) return Vec3::Constant(n[0]);
  if (n.size() != 3) fail("expected three numbers");
  return {n[0], n[1], n[2]};
}

bool boolean(const std::string& v, const LineError& fail) {
  if (v == "true" || v == "on" || v == "yes" || v == "1") return true;
  if (v == "false" || v == "off" || v == "no" || v == "0") return false;
  fail(fmt::format("'{}' is not a boolean", v));
}

int integer(const std::string& v, const LineError& fail) {
  const double d = scalar(v, fail);
  if (d != std::floor(d) || std::abs(d) > 1e9) fail("expected an integer");
  return static_cast<int>(d);
}

using Setter = std::function<void(const std::string&, const LineError&)>;
using Table = std::map<std::string, Setter, std::less<>>;

Table scenario_table(Scenario& sc, const std::filesystem::path& base_dir) {
  return {
      {"name", [&](const std::string& v, const LineError&) { sc.name = v; }},
      {"task",
       [&](const std::string& v, const LineError& fail) {
         if (v == "plan") sc.task = Scenario::Task::kPlan;
         else if (v == "circle") sc.task = Scenario::Task::kCircle;
         else fail(fmt::format("unknown task '{}'", v));
       }},
      {"vehicle",
       [&](const std::string& v, const LineError& fail) {
         if (v == "simulation") sc.geom = GeometryParams::simulation_platform();
         else if (v == "flight") sc.geom = GeometryParams::flight_platform();
         else fail(fmt::format("unknown vehicle '{}'", v));
         sc.vehicle = v;
       }},
      {"start", [&](const std::string& v, const LineError& f) { sc.start = vec3(v, f); }},
      {"goal", [&](const std::string& v, const LineError& f) { sc.goal = vec3(v, f); }},
      {"yaw", [&](const std::string& v, const LineError& f) { sc.yaw = scalar(v, f); }},
      {"seed",
       [&](const std::string& v, const LineError& f) {
         const double d = scalar(v, f);
         if (d < 0.0 || d != std::floor(d)) f("seed must be a non-negative integer");
         sc.sim.seed = static_cast<std::uint64_t>(d);
       }},
      {"cloud",
       [&, base_dir](const std::string& v, const LineError&) {
         std::filesystem::path p(v);
         sc.cloud = p.is_absolute() ? p : base_dir / p;
       }},
  };
}

Table map_table(Scenario& sc) {
  return {
      {"lower", [&](const std::string& v, const LineError& f) { sc.map_lower = vec3(v, f); }},
      {"upper", [&](const std::string& v, const LineError& f) { sc.map_upper = vec3(v, f); }},
      {"resolution",
       [&](const std::string& v, const LineError& f) { sc.resolution = scalar(v, f); }},
      {"inflation", [&](const std::string& v, const LineError& f) { sc.inflation = scalar(v, f); }},
  };
}

Table obstacle_table(Obstacle& ob) {
  return {
      {"type",
       [&](const std::string& v, const LineError& fail) {
         if (v == "box") ob.kind = Obstacle::Kind::kBox;
         else if (v == "wall_hole") ob.kind = Obstacle::Kind::kWallHole;
         else if (v == "wall_circle") ob.kind = Obstacle::Kind::kWallCircle;
         else if (v == "pipe") ob.kind = Obstacle::Kind::kPipe;
         else fail(fmt::format("unknown obstacle type '{}'", v));
       }},
      {"lower", [&](const std::string& v, const LineError& f) { ob.lower = vec3(v, f); }},
      {"upper", [&](const std::string& v, const LineError& f) { ob.upper = vec3(v, f); }},
      {"x", [&](const std::string& v, const LineError& f) { ob.x = scalar(v, f); }},
      {"thickness", [&](const std::string& v, const LineError& f) { ob.thickness = scalar(v, f); }},
      {"center", [&](const std::string& v, const LineError& f) { ob.center = vec2(v, f); }},
      {"hole_size", [&](const std::string& v, const LineError& f) { ob.hole_size = vec2(v, f); }},
      {"diameter", [&](const std::string& v, const LineError& f) { ob.diameter = scalar(v, f); }},
      {"length", [&](const std::string& v, const LineError& f) { ob.length = scalar(v, f); }},
      {"wall", [&](const std::string& v, const LineError& f) { ob.wall = scalar(v, f); }},
      {"span_lower", [&](const std::string& v, const LineError& f) { ob.span_lower = vec2(v, f); }},
      {"span_upper", [&](const std::string& v, const LineError& f) { ob.span_upper = vec2(v, f); }},
  };
}

Table planner_table(Scenario& sc) {
  auto& w = sc.weights;
  auto& m = sc.planner.morph;
  return {
      {"epsilon", [&](const std::string& v, const LineError& f) { sc.search_epsilon = scalar(v, f); }},
      {"v_max", [&](const std::string& v, const LineError& f) { w.v_max = scalar(v, f); }},
      {"omega_max", [&](const std::string& v, const LineError& f) { w.omega_max = scalar(v, f); }},
      {"rho_T", [&](const std::string& v, const LineError& f) { w.rho_T = scalar(v, f); }},
      {"rho_v", [&](const std::string& v, const LineError& f) { w.rho_v = scalar(v, f); }},
      {"rho_w", [&](const std::string& v, const LineError& f) { w.rho_w = scalar(v, f); }},
      {"rho_c", [&](const std::string& v, const LineError& f) { w.rho_c = scalar(v, f); }},
      {"quadrature", [&](const std::string& v, const LineError& f) { w.L = integer(v, f); }},
      {"collision_margin",
       [&](const std::string& v, const LineError& f) { w.collision_margin = scalar(v, f); }},
      {"max_pieces",
       [&](const std::string& v, const LineError& f) { sc.planner.max_pieces = integer(v, f); }},
      {"max_box_size",
       [&](const std::string& v, const LineError& f) { sc.corridor.max_box_size = scalar(v, f); }},
      {"vertical_reserve",
       [&](const std::string& v, const LineError& f) {
         sc.corridor.vertical_reserve = scalar(v, f);
       }},
      {"morph", [&](const std::string& v, const LineError& f) { m.enabled = boolean(v, f); }},
      {"width_margin", [&](const std::string& v, const LineError& f) { m.width_margin = scalar(v, f); }},
      {"height_margin",
       [&](const std::string& v, const LineError& f) { m.height_margin = scalar(v, f); }},
      {"ramp_duration",
       [&](const std::string& v, const LineError& f) { m.ramp_duration = scalar(v, f); }},
      {"settle_time", [&](const std::string& v, const LineError& f) { m.settle_time = scalar(v, f); }},
  };
}

Table controller_table(Scenario& sc) {
  auto& g = sc.gains;
  return {
      {"type",
       [&](const std::string& v, const LineError& fail) {
         if (v != "proposed" && v != "pid" && v != "lqr") {
           fail(fmt::format("unknown controller '{}'", v));
         }
         sc.controller = v;
       }},
      {"kp_pos", [&](const std::string& v, const LineError& f) { g.kp_pos = vec3(v, f, true); }},
      {"kv_pos", [&](const std::string& v, const LineError& f) { g.kv_pos = vec3(v, f, true); }},
      {"ki_pos", [&](const std::string& v, const LineError& f) { g.ki_pos = vec3(v, f, true); }},
      {"K_A", [&](const std::string& v, const LineError& f) { g.K_A = vec3(v, f, true); }},
      {"rate_p", [&](const std::string& v, const LineError& f) { g.rate_p = vec3(v, f, true); }},
      {"rate_i", [&](const std::string& v, const LineError& f) { g.rate_i = vec3(v, f, true); }},
      {"servo_kp", [&](const std::string& v, const LineError& f) { g.servo_kp = scalar(v, f); }},
      {"servo_kd", [&](const std::string& v, const LineError& f) { g.servo_kd = scalar(v, f); }},
      {"use_rls", [&](const std::string& v, const LineError& f) { sc.use_rls = boolean(v, f); }},
      {"rls_rho", [&](const std::string& v, const LineError& f) { sc.rls_rho = scalar(v, f); }},
  };
}

Table sim_table(Scenario& sc) {
  auto& s = sc.sim;
  return {
      {"dt", [&](const std::string& v, const LineError& f) { s.dt = scalar(v, f); }},
      {"hold_time", [&](const std::string& v, const LineError& f) { sc.hold_time = scalar(v, f); }},
      {"rotor_drag",
       [&](const std::string& v, const LineError& f) { s.drag.rotor_drag = vec3(v, f, true); }},
      {"thrust_loss",
       [&](const std::string& v, const LineError& f) { s.thrust_loss_at_fold = scalar(v, f); }},
      {"servo_time_constant",
       [&](const std::string& v, const LineError& f) { s.servo.time_constant = scalar(v, f); }},
      {"servo_slew", [&](const std::string& v, const LineError& f) { s.servo.slew = scalar(v, f); }},
      {"noise_position",
       [&](const std::string& v, const LineError& f) { s.noise.position = scalar(v, f); }},
      {"noise_velocity",
       [&](const std::string& v, const LineError& f) { s.noise.velocity = scalar(v, f); }},
      {"noise_attitude",
       [&](const std::string& v, const LineError& f) { s.noise.attitude = scalar(v, f); }},
      {"noise_rate", [&](const std::string& v, const LineError& f) { s.noise.rate = scalar(v, f); }},
      {"goal_tolerance",
       [&](const std::string& v, const LineError& f) { sc.goal_tolerance = scalar(v, f); }},
      {"violation_tolerance",
       [&](const std::string& v, const LineError& f) { sc.violation_tolerance = scalar(v, f); }},
  };
}

Table circle_table(Scenario& sc) {
  auto& c = sc.circle;
  return {
      {"center", [&](const std::string& v, const LineError& f) { c.center = vec3(v, f); }},
      {"radius", [&](const std::string& v, const LineError& f) { c.radius = scalar(v, f); }},
      {"laps", [&](const std::string& v, const LineError& f) { c.laps = scalar(v, f); }},
      {"morph_period",
       [&](const std::string& v, const LineError& f) { c.morph_period = scalar(v, f); }},
      {"hover_duration",
       [&](const std::string& v, const LineError& f) { c.hover_duration = scalar(v, f); }},
      {"v_max", [&](const std::string& v, const LineError& f) { sc.weights.v_max = scalar(v, f); }},
  };
}

}  // namespace

Scenario parse_scenario(std::istream& in, const std::filesystem::path& base_dir) {
  Scenario sc;
  std::string section;
  Table table;
  int obstacle_line = 0;
  // Obstacles are stored once their section closes so they can be validated.
  std::optional<Obstacle> pending;
  auto flush = [&] {
    if (pending) {
      pending->validate(obstacle_line);
      sc.obstacles.push_back(*pending);
      pending.reset();
    }
  };
  // Tables hold references into `sc` and `pending`; rebuilt on every header.
  auto open = [&](const std::string& name, const LineError& fail) {
    flush();
    section = name;
    if (name == "scenario") table = scenario_table(sc, base_dir);
    else if (name == "map") table = map_table(sc);
    else if (name == "obstacle") {
      pending.emplace();
      table = obstacle_table(*pending);
    } else if (name == "planner") table = planner_table(sc);
    else if (name == "controller") table = controller_table(sc);
    else if (name == "sim") table = sim_table(sc);
    else if (name == "circle") table = circle_table(sc);
    else fail(fmt::format("unknown section [{}]", name));
  };

  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const LineError fail(line_no);
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail("unterminated section header");
      open(trim(std::string_view(line).substr(1, line.size() - 2)), fail);
      if (section == "obstacle") obstacle_line = line_no;
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail("expected 'key = value'");
    if (section.empty()) fail("key outside of a section");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    const auto it = table.find(key);
    if (it == table.end()) fail(fmt::format("unknown key '{}' in [{}]", key, section));
    if (value.empty()) fail(fmt::format("missing value for '{}'", key));
    it->second(value, fail);
  }
  flush();
  try {
    sc.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::kScenarioParse, e.message(), line_no);
  }
  return sc;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, fmt::format("cannot open scenario '{}'", path.string()));
  try {
    return parse_scenario(in, path.parent_path());
  } catch (const Error& e) {
    throw Error(e.code(), fmt::format("{}: {}", path.string(), e.message()), e.index());
  }
}

VoxelGrid rasterize(const Scenario& sc) {
  const Vec3 extent = sc.map_upper - sc.map_lower;
  const Eigen::Vector3i dims =
      (extent / sc.resolution).array().unaryExpr([](double d) { return std::ceil(d - 1e-9); }).cast<int>();
  VoxelGrid grid(sc.map_lower, sc.resolution, dims);
  if (sc.cloud) {
    const auto points = load_xyz(*sc.cloud);
    grid = VoxelGrid::from_point_cloud(points, sc.map_lower, sc.map_upper, sc.resolution, 0.0);
  }
  const double r = sc.resolution;
  for (int z = 0; z < grid.dims().z(); ++z) {
    for (int y = 0; y < grid.dims().y(); ++y) {
      for (int x = 0; x < grid.dims().x(); ++x) {
        const GridIndex i{x, y, z};
        const Vec3 lo = grid.lower_corner_of(i);
        const Vec3 hi = lo + Vec3::Constant(r);
        for (const Obstacle& ob : sc.obstacles) {
          if (ob.intersects(lo, hi)) {
            grid.set_occupied(i);
            break;
          }
        }
      }
    }
  }
  grid.inflate(sc.inflation);
  return grid;
}

}  // namespace morphquad
