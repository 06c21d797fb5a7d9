#include "morphquad/corridor.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

#include <fmt/format.h>

namespace morphquad {

Polytope Polytope::box(const Vec3& lower, const Vec3& upper) {
  Polytope p;
  for (int axis = 0; axis < 3; ++axis) {
    Halfspace hi, lo;
    hi.n = Vec3::Unit(axis);
    hi.r = upper;
    lo.n = -Vec3::Unit(axis);
    lo.r = lower;
    p.faces.push_back(hi);
    p.faces.push_back(lo);
  }
  p.seed = 0.5 * (lower + upper);
  return p;
}

double point_violation(const Polytope& poly, const Vec3& x) {
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& f : poly.faces) worst = std::max(worst, f.eval(x));
  return worst;
}

std::vector<Vec3> polytope_vertices(const Polytope& poly, double tol) {
  std::vector<Vec3> out;
  const auto& f = poly.faces;
  for (std::size_t i = 0; i < f.size(); ++i) {
    for (std::size_t j = i + 1; j < f.size(); ++j) {
      for (std::size_t k = j + 1; k < f.size(); ++k) {
        Mat3 A;
        A.row(0) = f[i].n.transpose();
        A.row(1) = f[j].n.transpose();
        A.row(2) = f[k].n.transpose();
        const Vec3 b(f[i].n.dot(f[i].r), f[j].n.dot(f[j].r), f[k].n.dot(f[k].r));
        Eigen::FullPivLU<Mat3> lu(A);
        if (lu.rank() < 3) continue;
        const Vec3 v = lu.solve(b);
        if (!v.allFinite() || point_violation(poly, v) > tol) continue;
        const bool dup = std::any_of(out.begin(), out.end(),
                                     [&](const Vec3& u) { return (u - v).norm() <= tol; });
        if (!dup) out.push_back(v);
      }
    }
  }
  return out;
}

std::optional<Vec3> intersection_interior_point(const Polytope& a, const Polytope& b) {
  Polytope both;
  both.faces = a.faces;
  both.faces.insert(both.faces.end(), b.faces.begin(), b.faces.end());
  const auto verts = polytope_vertices(both);
  if (verts.size() < 4) return std::nullopt;
  Vec3 c = Vec3::Zero();
  for (const auto& v : verts) c += v;
  c /= static_cast<double>(verts.size());
  if (point_violation(both, c) >= -1e-9) return std::nullopt;
  return c;
}

namespace {

using Cell = Eigen::Vector3i;

class BoxGrower {
 public:
  BoxGrower(const VoxelGrid& grid, double max_size)
      : grid_(grid),
        max_cells_(std::max(1, static_cast<int>(std::floor(max_size / grid.resolution() + 1e-9)))) {}

  bool free(const Cell& lo, const Cell& hi) const {
    for (int z = lo.z(); z <= hi.z(); ++z) {
      for (int y = lo.y(); y <= hi.y(); ++y) {
        for (int x = lo.x(); x <= hi.x(); ++x) {
          if (grid_.occupied({x, y, z})) return false;
        }
      }
    }
    return true;
  }

  // One voxel layer on face (axis, dir); returns whether it was added.
  bool grow(Cell& lo, Cell& hi, int axis, int dir, int limit) const {
    if (hi[axis] - lo[axis] + 1 >= limit) return false;
    Cell slab_lo = lo, slab_hi = hi;
    if (dir > 0) {
      slab_lo[axis] = slab_hi[axis] = hi[axis] + 1;
    } else {
      slab_lo[axis] = slab_hi[axis] = lo[axis] - 1;
    }
    if (!free(slab_lo, slab_hi)) return false;
    (dir > 0 ? hi : lo)[axis] += dir;
    return true;
  }

  void grow_axes(Cell& lo, Cell& hi, std::initializer_list<int> axes, int limit) const {
    std::array<bool, 6> open;
    open.fill(true);
    bool any = true;
    while (any) {
      any = false;
      for (int axis : axes) {
        for (int side = 0; side < 2; ++side) {
          const int slot = 2 * axis + side;
          if (!open[slot]) continue;
          open[slot] = grow(lo, hi, axis, side == 0 ? 1 : -1, limit);
          any = any || open[slot];
        }
      }
    }
  }

  void expand(Cell& lo, Cell& hi, int vertical_reserve) const {
    // Reserve some height first so the lateral growth does not pin the box
    // to a single slab inside round apertures.
    if (vertical_reserve > 0) grow_axes(lo, hi, {2}, vertical_reserve);
    grow_axes(lo, hi, {0, 1}, max_cells_);
    grow_axes(lo, hi, {2}, max_cells_);
  }

  [[nodiscard]] Polytope to_polytope(const Cell& lo, const Cell& hi) const {
    return Polytope::box(grid_.lower_corner_of({lo.x(), lo.y(), lo.z()}),
                         grid_.lower_corner_of({hi.x() + 1, hi.y() + 1, hi.z() + 1}));
  }

 private:
  const VoxelGrid& grid_;
  int max_cells_;
};

Cell cell_of(const VoxelGrid& grid, const Vec3& p, int index) {
  const auto c = grid.index_of(p);
  if (!c) {
    throw Error(ErrorCode::kCorridorFailure,
                fmt::format("path point {} lies outside the map", index), index);
  }
  return {c->x, c->y, c->z};
}

}  // namespace

Corridor build_corridor(const VoxelGrid& grid, const std::vector<Vec3>& path,
                        const CorridorOptions& options) {
  if (path.empty()) throw Error(ErrorCode::kInvalidArgument, "corridor needs a nonempty path");
  if (options.max_faces < 6) {
    throw Error(ErrorCode::kInvalidArgument, "a box corridor needs at least six faces");
  }
  const double step = options.path_step > 0.0 ? options.path_step : grid.resolution();
  Corridor corridor;
  corridor.path = densify(path, step);
  const auto& pts = corridor.path;
  corridor.assignment.assign(pts.size(), -1);

  const BoxGrower grower(grid, options.max_box_size);
  const int reserve = static_cast<int>(std::round(options.vertical_reserve / grid.resolution()));
  const double strict = -1e-9;
  // Path points may sit exactly on a voxel face next to an obstacle, so
  // coverage counts the closed box.
  const double closed = 1e-9;

  auto seed_of = [&](std::size_t from, std::size_t to, Cell& lo, Cell& hi) {
    lo = hi = cell_of(grid, pts[to], static_cast<int>(to));
    for (std::size_t j = from; j < to; ++j) {
      const Cell c = cell_of(grid, pts[j], static_cast<int>(j));
      lo = lo.cwiseMin(c);
      hi = hi.cwiseMax(c);
    }
  };
  auto grow_from = [&](const Cell& lo_in, const Cell& hi_in, const Cell& seed_cell) {
    Cell lo = lo_in, hi = hi_in;
    grower.expand(lo, hi, reserve);
    Polytope poly = grower.to_polytope(lo, hi);
    poly.seed = grid.center_of({seed_cell.x(), seed_cell.y(), seed_cell.z()});
    return poly;
  };
  // Path length just before `next` that lies strictly inside `poly`.
  auto overlap_behind = [&](const Polytope& poly, std::size_t next) {
    double len = 0.0;
    for (std::size_t j = next; j > 0 && point_violation(poly, pts[j - 1]) < strict; --j) {
      len += (pts[j] - pts[j - 1]).norm();
    }
    return len;
  };

  std::size_t next = 0;      // first uncovered point
  std::size_t anchor = 0;    // last covered point
  while (next < pts.size()) {
    const Cell b = cell_of(grid, pts[next], static_cast<int>(next));
    Cell lo, hi;
    seed_of(anchor, next, lo, hi);
    if (!grower.free(lo, hi)) {
      throw Error(ErrorCode::kCorridorFailure,
                  fmt::format("no free seed at path point {}", next), static_cast<int>(next));
    }
    Polytope poly = grow_from(lo, hi, b);

    // A short overlap leaves no room for the body at the junction. Retry
    // with a seed reaching further back along the path while it stays free.
    if (next > 0 && overlap_behind(poly, next) < options.seed_overlap) {
      std::size_t from = anchor;
      double reach = (pts[next] - pts[anchor]).norm();
      while (from > 0) {
        reach += (pts[from] - pts[from - 1]).norm();
        if (reach > options.seed_overlap) break;
        Cell lo_j, hi_j;
        seed_of(from - 1, next, lo_j, hi_j);
        if (!grower.free(lo_j, hi_j)) break;
        --from;
      }
      if (from < anchor) {
        seed_of(from, next, lo, hi);
        Polytope alt = grow_from(lo, hi, b);
        if (overlap_behind(alt, next) > overlap_behind(poly, next)) poly = std::move(alt);
      }
    }

    const int id = static_cast<int>(corridor.polytopes.size());
    std::size_t k = next;
    while (k < pts.size() && point_violation(poly, pts[k]) <= closed) {
      corridor.assignment[k] = id;
      ++k;
    }
    if (k == next) {
      throw Error(ErrorCode::kCorridorFailure,
                  fmt::format("box cannot cover path point {}", next), static_cast<int>(next));
    }
    corridor.polytopes.push_back(std::move(poly));
    anchor = k - 1;
    next = k;
  }
  return corridor;
}

void write_corridor(std::ostream& out, const Corridor& corridor) {
  out << corridor.polytopes.size() << '\n';
  for (const auto& poly : corridor.polytopes) {
    out << poly.faces.size() << '\n';
    for (const auto& f : poly.faces) {
      out << fmt::format("{:.17g} {:.17g} {:.17g} {:.17g} {:.17g} {:.17g}\n", f.n.x(), f.n.y(),
                         f.n.z(), f.r.x(), f.r.y(), f.r.z());
    }
  }
}

Corridor read_corridor(std::istream& in) {
  auto fail = [](const std::string& what) {
    throw Error(ErrorCode::kScenarioParse, "corridor: " + what);
  };
  Corridor c;
  std::size_t count = 0;
  if (!(in >> count)) fail("missing polytope count");
  for (std::size_t p = 0; p < count; ++p) {
    std::size_t faces = 0;
    if (!(in >> faces)) fail(fmt::format("missing face count for polytope {}", p));
    Polytope poly;
    for (std::size_t j = 0; j < faces; ++j) {
      Halfspace h;
      if (!(in >> h.n.x() >> h.n.y() >> h.n.z() >> h.r.x() >> h.r.y() >> h.r.z())) {
        fail(fmt::format("bad face {} of polytope {}", j, p));
      }
      poly.faces.push_back(h);
    }
    const auto verts = polytope_vertices(poly);
    Vec3 center = Vec3::Zero();
    for (const auto& v : verts) center += v;
    if (!verts.empty()) center /= static_cast<double>(verts.size());
    poly.seed = center;
    c.polytopes.push_back(std::move(poly));
  }
  return c;
}

}  // namespace morphquad
