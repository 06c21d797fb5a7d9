#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "morphquad/controller.hpp"
#include "morphquad/corridor.hpp"
#include "morphquad/gridworld.hpp"
#include "morphquad/optimizer.hpp"
#include "morphquad/simulation.hpp"

namespace morphquad {

/// Procedural obstacle. Walls and pipes are normal to / aligned with the
/// world x axis; `center` is the (y, z) position of the aperture or axis.
struct Obstacle {
  enum class Kind { kBox, kWallHole, kWallCircle, kPipe };

  Kind kind = Kind::kBox;
  Vec3 lower = Vec3::Zero();  // box corners
  Vec3 upper = Vec3::Zero();
  double x = 0.0;             // wall front face, or pipe entrance
  double thickness = 0.1;     // wall depth along x
  Vec2 center = Vec2::Zero();
  Vec2 hole_size = Vec2::Zero();  // rectangular hole (y, z)
  double diameter = 0.0;          // circular hole or pipe bore
  double length = 0.0;            // pipe
  double wall = 0.05;             // pipe wall thickness
  /// (y, z) extent of a wall; unbounded when unset.
  std::optional<Vec2> span_lower;
  std::optional<Vec2> span_upper;

  /// True when the closed cell [lo, hi] touches obstacle material.
  [[nodiscard]] bool intersects(const Vec3& lo, const Vec3& hi) const;
  [[nodiscard]] bool contains(const Vec3& p) const { return intersects(p, p); }
  void validate(int line) const;
};

/// Circle tracking at constant speed while the arms sweep X -> H -> X.
struct CircleTask {
  Vec3 center = Vec3(0.0, 0.0, 1.0);
  double radius = 1.0;         // [m]
  double laps = 1.0;
  double morph_period = 4.0;   // one X -> H -> X cycle [s]
  double hover_duration = 5.0; // used when the speed is zero [s]
};

struct Scenario {
  enum class Task { kPlan, kCircle };

  std::string name = "unnamed";
  Task task = Task::kPlan;
  std::string vehicle = "simulation";
  GeometryParams geom = GeometryParams::simulation_platform();

  Vec3 map_lower = Vec3(-1.0, -1.0, 0.0);
  Vec3 map_upper = Vec3(3.0, 1.0, 2.0);
  double resolution = 0.025;
  double inflation = 0.1;
  std::vector<Obstacle> obstacles;
  std::optional<std::filesystem::path> cloud;

  Vec3 start = Vec3(0.0, 0.0, 1.0);
  Vec3 goal = Vec3(2.0, 0.0, 1.0);
  double yaw = 0.0;

  double search_epsilon = 1.5;
  CorridorOptions corridor;
  OptimizerWeights weights;
  CorridorPlanOptions planner;

  std::string controller = "proposed";
  ControllerGains gains;
  bool use_rls = true;
  double rls_rho = 0.995;

  SimConfig sim;
  double hold_time = 2.0;            // simulated time after the trajectory ends [s]
  double goal_tolerance = 0.1;       // [m]
  double violation_tolerance = 0.05; // [m]

  CircleTask circle;

  /// Throws kInvalidArgument for non-positive dimensions or a start/goal
  /// inside an obstacle.
  void validate() const;
};

/// Parses the INI-like scenario format described in the README. Relative
/// cloud paths resolve against `base_dir`. Throws kScenarioParse with the
/// offending line number.
[[nodiscard]] Scenario parse_scenario(std::istream& in,
                                      const std::filesystem::path& base_dir = {});
[[nodiscard]] Scenario load_scenario(const std::filesystem::path& path);

/// Occupancy map of the scenario: a voxel is occupied when any obstacle
/// touches it (conservative), then the map is inflated.
[[nodiscard]] VoxelGrid rasterize(const Scenario& scenario);

}  // namespace morphquad
