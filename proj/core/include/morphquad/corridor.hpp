#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include "morphquad/common.hpp"
#include "morphquad/gridworld.hpp"

namespace morphquad {

/// Membership is (x - r)^T n <= 0, so `n` points out of the polytope.
struct Halfspace {
  Vec3 n = Vec3::UnitX();
  Vec3 r = Vec3::Zero();

  [[nodiscard]] double eval(const Vec3& x) const { return n.dot(x - r); }
};

struct Polytope {
  std::vector<Halfspace> faces;
  Vec3 seed = Vec3::Zero();

  /// Axis-aligned box as six halfspaces; the seed is the box center.
  static Polytope box(const Vec3& lower, const Vec3& upper);
};

/// Largest face value; <= 0 iff `x` is inside.
[[nodiscard]] double point_violation(const Polytope& poly, const Vec3& x);

/// Vertices by intersecting every face triple and keeping the feasible ones.
/// Duplicates (within 1e-9) are merged.
[[nodiscard]] std::vector<Vec3> polytope_vertices(const Polytope& poly, double tol = 1e-9);

/// Vertex centroid of the intersection if it has a nonempty interior.
[[nodiscard]] std::optional<Vec3> intersection_interior_point(const Polytope& a,
                                                              const Polytope& b);

struct Corridor {
  std::vector<Polytope> polytopes;
  /// Densified path the corridor was grown along.
  std::vector<Vec3> path;
  /// For each path point, the first polytope that contains it.
  std::vector<int> assignment;

  [[nodiscard]] std::size_t size() const { return polytopes.size(); }
};

struct CorridorOptions {
  int max_faces = 12;
  /// Full edge length cap for a box along each axis [m].
  double max_box_size = 3.0;
  /// Height grown before any lateral growth [m].
  double vertical_reserve = 0.16;
  /// Wanted overlap of neighbouring boxes along the path. A box that falls
  /// short is regrown from a seed reaching this far back along the path,
  /// shortened where that would touch an obstacle [m].
  double seed_overlap = 0.8;
  /// Path resampling step; defaults to the grid resolution when <= 0.
  double path_step = 0.0;
};

/// Grows axis-aligned boxes on the raw occupancy along the path. Each box
/// starts from the cells of the last covered and first uncovered path
/// point, so neighbours share at least one voxel; see `seed_overlap` for
/// longer overlaps. x and y faces grow in turn first, then z. Throws kCorridorFailure with the path point index
/// when a seed is not free.
[[nodiscard]] Corridor build_corridor(const VoxelGrid& grid, const std::vector<Vec3>& path,
                                      const CorridorOptions& options = {});

void write_corridor(std::ostream& out, const Corridor& corridor);
[[nodiscard]] Corridor read_corridor(std::istream& in);

}  // namespace morphquad
