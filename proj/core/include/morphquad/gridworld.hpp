#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "morphquad/common.hpp"

namespace morphquad {

struct GridIndex {
  int x = 0;
  int y = 0;
  int z = 0;

  auto operator<=>(const GridIndex&) const = default;
};

/// Dense voxel occupancy map. Keeps the raw occupancy (voxels that contain
/// obstacle material) and an inflated copy used for point-robot search.
/// Out-of-bounds cells count as blocked.
class VoxelGrid {
 public:
  VoxelGrid() = default;
  VoxelGrid(const Vec3& origin, double resolution, const Eigen::Vector3i& dims);

  /// Bounds are taken from the cloud, padded by the inflation radius plus
  /// one voxel. Throws kEmptyCloud on an empty list.
  static VoxelGrid from_point_cloud(std::span<const Vec3> points, double resolution,
                                    double inflation_radius);
  /// Same, with explicit map bounds. Points outside are ignored.
  static VoxelGrid from_point_cloud(std::span<const Vec3> points, const Vec3& lower,
                                    const Vec3& upper, double resolution,
                                    double inflation_radius);

  [[nodiscard]] const Vec3& origin() const { return origin_; }
  [[nodiscard]] double resolution() const { return resolution_; }
  [[nodiscard]] const Eigen::Vector3i& dims() const { return dims_; }
  [[nodiscard]] double inflation_radius() const { return inflation_radius_; }
  [[nodiscard]] std::size_t size() const { return raw_.size(); }

  [[nodiscard]] bool in_bounds(const GridIndex& i) const {
    return i.x >= 0 && i.y >= 0 && i.z >= 0 && i.x < dims_.x() && i.y < dims_.y() &&
           i.z < dims_.z();
  }
  [[nodiscard]] std::size_t linear(const GridIndex& i) const {
    return (static_cast<std::size_t>(i.z) * dims_.y() + i.y) * dims_.x() + i.x;
  }
  [[nodiscard]] GridIndex from_linear(std::size_t n) const;

  /// Cell containing `p`; empty when outside the map.
  [[nodiscard]] std::optional<GridIndex> index_of(const Vec3& p) const;
  [[nodiscard]] Vec3 center_of(const GridIndex& i) const;
  [[nodiscard]] Vec3 lower_corner_of(const GridIndex& i) const;

  [[nodiscard]] bool occupied(const GridIndex& i) const {
    return !in_bounds(i) || raw_[linear(i)] != 0;
  }
  [[nodiscard]] bool blocked(const GridIndex& i) const {
    return !in_bounds(i) || inflated_[linear(i)] != 0;
  }

  void set_occupied(const GridIndex& i, bool value = true);
  /// Rebuilds the inflated layer: a cell is blocked when some occupied cell
  /// center lies within `radius` of its center.
  void inflate(double radius);

  [[nodiscard]] std::size_t occupied_count() const;
  [[nodiscard]] std::size_t blocked_count() const;

 private:
  Vec3 origin_ = Vec3::Zero();
  double resolution_ = 1.0;
  Eigen::Vector3i dims_ = Eigen::Vector3i::Zero();
  double inflation_radius_ = 0.0;
  std::vector<std::uint8_t> raw_;
  std::vector<std::uint8_t> inflated_;
};

struct GridPath {
  std::vector<Vec3> waypoints;
  std::vector<GridIndex> cells;
};

struct SearchResult {
  GridPath path;
  double cost = 0.0;          // metres along the cell-center polyline
  std::size_t expansions = 0;
};

/// True when a single 26-connected move from `from` by `step` is allowed:
/// every cell in the axis-aligned box spanned by the move must be free in
/// the inflated layer (no corner cutting).
[[nodiscard]] bool move_allowed(const VoxelGrid& grid, const GridIndex& from,
                                const GridIndex& step);

/// Weighted A* over the inflated layer with f = g + epsilon * h and a
/// Euclidean heuristic. Ties break on lower f, then lower h, then lower
/// linear cell index. Throws kOutOfBounds, kStartOccupied, kGoalOccupied,
/// kNoPath, or kInvalidArgument for epsilon < 1.
[[nodiscard]] SearchResult weighted_astar(const VoxelGrid& grid, const Vec3& start,
                                          const Vec3& goal, double epsilon);

[[nodiscard]] bool line_of_sight(const VoxelGrid& grid, const Vec3& a, const Vec3& b);

/// Greedy line-of-sight shortcutting against the inflated layer. The result
/// keeps the first and last waypoint; `cells` is cleared.
[[nodiscard]] GridPath shortcut_path(const VoxelGrid& grid, const GridPath& path);

/// Resamples a polyline so consecutive points are at most `step` apart.
[[nodiscard]] std::vector<Vec3> densify(const std::vector<Vec3>& points, double step);

/// Plain-text point cloud, one "x y z" triple per line; '#' starts a comment.
/// Throws kScenarioParse with the offending line number.
[[nodiscard]] std::vector<Vec3> read_xyz(std::istream& in);
[[nodiscard]] std::vector<Vec3> load_xyz(const std::filesystem::path& path);

}  // namespace morphquad
