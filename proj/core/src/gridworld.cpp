#include "morphquad/gridworld.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <queue>
#include <sstream>
#include <string>

#include <fmt/format.h>

namespace morphquad {

VoxelGrid::VoxelGrid(const Vec3& origin, double resolution, const Eigen::Vector3i& dims)
    : origin_(origin), resolution_(resolution), dims_(dims) {
  if (!(resolution > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "grid resolution must be positive");
  }
  if ((dims.array() <= 0).any()) {
    throw Error(ErrorCode::kInvalidArgument, "grid dimensions must be positive");
  }
  const auto n = static_cast<std::size_t>(dims.x()) * dims.y() * dims.z();
  raw_.assign(n, 0);
  inflated_.assign(n, 0);
}

VoxelGrid VoxelGrid::from_point_cloud(std::span<const Vec3> points, double resolution,
                                      double inflation_radius) {
  if (points.empty()) throw Error(ErrorCode::kEmptyCloud, "point cloud is empty");
  Vec3 lo = points.front(), hi = points.front();
  for (const Vec3& p : points) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const double pad = inflation_radius + resolution;
  return from_point_cloud(points, lo.array() - pad, hi.array() + pad, resolution,
                          inflation_radius);
}

VoxelGrid VoxelGrid::from_point_cloud(std::span<const Vec3> points, const Vec3& lower,
                                      const Vec3& upper, double resolution,
                                      double inflation_radius) {
  if (points.empty()) throw Error(ErrorCode::kEmptyCloud, "point cloud is empty");
  if (!(resolution > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "grid resolution must be positive");
  }
  const Eigen::Vector3i dims =
      ((upper - lower) / resolution).array().ceil().cast<int>().max(1).matrix();
  VoxelGrid grid(lower, resolution, dims);
  for (const Vec3& p : points) {
    if (auto idx = grid.index_of(p)) grid.set_occupied(*idx);
  }
  grid.inflate(inflation_radius);
  return grid;
}

GridIndex VoxelGrid::from_linear(std::size_t n) const {
  GridIndex i;
  i.x = static_cast<int>(n % dims_.x());
  n /= dims_.x();
  i.y = static_cast<int>(n % dims_.y());
  i.z = static_cast<int>(n / dims_.y());
  return i;
}

std::optional<GridIndex> VoxelGrid::index_of(const Vec3& p) const {
  const Vec3 rel = (p - origin_) / resolution_;
  const GridIndex i{static_cast<int>(std::floor(rel.x())), static_cast<int>(std::floor(rel.y())),
                    static_cast<int>(std::floor(rel.z()))};
  if (!rel.allFinite() || !in_bounds(i)) return std::nullopt;
  return i;
}

Vec3 VoxelGrid::center_of(const GridIndex& i) const {
  return origin_ + resolution_ * Vec3(i.x + 0.5, i.y + 0.5, i.z + 0.5);
}

Vec3 VoxelGrid::lower_corner_of(const GridIndex& i) const {
  return origin_ + resolution_ * Vec3(i.x, i.y, i.z);
}

void VoxelGrid::set_occupied(const GridIndex& i, bool value) {
  if (!in_bounds(i)) return;
  raw_[linear(i)] = value ? 1 : 0;
  if (value) inflated_[linear(i)] = 1;
}

void VoxelGrid::inflate(double radius) {
  inflation_radius_ = std::max(radius, 0.0);
  inflated_ = raw_;
  const int reach = static_cast<int>(std::floor(inflation_radius_ / resolution_));
  if (reach == 0) return;

  std::vector<GridIndex> ball;
  const double limit = inflation_radius_ * inflation_radius_ / (resolution_ * resolution_) + 1e-9;
  for (int dz = -reach; dz <= reach; ++dz) {
    for (int dy = -reach; dy <= reach; ++dy) {
      for (int dx = -reach; dx <= reach; ++dx) {
        if (dx * dx + dy * dy + dz * dz <= limit) ball.push_back({dx, dy, dz});
      }
    }
  }

  // The nearest occupied cell to any free cell has a free face neighbour, so
  // stamping from surface cells only is exact.
  const std::array<GridIndex, 6> faces{{{1, 0, 0}, {-1, 0, 0}, {0, 1, 0},
                                         {0, -1, 0}, {0, 0, 1}, {0, 0, -1}}};
  for (std::size_t n = 0; n < raw_.size(); ++n) {
    if (!raw_[n]) continue;
    const GridIndex c = from_linear(n);
    bool surface = false;
    for (const auto& f : faces) {
      const GridIndex nb{c.x + f.x, c.y + f.y, c.z + f.z};
      if (in_bounds(nb) && !raw_[linear(nb)]) {
        surface = true;
        break;
      }
    }
    if (!surface) continue;
    for (const auto& d : ball) {
      const GridIndex t{c.x + d.x, c.y + d.y, c.z + d.z};
      if (in_bounds(t)) inflated_[linear(t)] = 1;
    }
  }
}

std::size_t VoxelGrid::occupied_count() const {
  return static_cast<std::size_t>(std::count(raw_.begin(), raw_.end(), 1));
}

std::size_t VoxelGrid::blocked_count() const {
  return static_cast<std::size_t>(std::count(inflated_.begin(), inflated_.end(), 1));
}

bool move_allowed(const VoxelGrid& grid, const GridIndex& from, const GridIndex& step) {
  const int x0 = std::min(from.x, from.x + step.x), x1 = std::max(from.x, from.x + step.x);
  const int y0 = std::min(from.y, from.y + step.y), y1 = std::max(from.y, from.y + step.y);
  const int z0 = std::min(from.z, from.z + step.z), z1 = std::max(from.z, from.z + step.z);
  for (int z = z0; z <= z1; ++z) {
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        if (grid.blocked({x, y, z})) return false;
      }
    }
  }
  return true;
}

namespace {

struct OpenEntry {
  double f;
  double h;
  std::size_t cell;
};

struct OpenOrder {
  bool operator()(const OpenEntry& a, const OpenEntry& b) const {
    if (a.f != b.f) return a.f > b.f;
    if (a.h != b.h) return a.h > b.h;
    return a.cell > b.cell;
  }
};

}  // namespace

SearchResult weighted_astar(const VoxelGrid& grid, const Vec3& start, const Vec3& goal,
                            double epsilon) {
  if (!(epsilon >= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "weighted A* requires epsilon >= 1");
  }
  const auto s = grid.index_of(start);
  const auto g = grid.index_of(goal);
  if (!s) throw Error(ErrorCode::kOutOfBounds, "start outside the map");
  if (!g) throw Error(ErrorCode::kOutOfBounds, "goal outside the map");
  if (grid.blocked(*s)) throw Error(ErrorCode::kStartOccupied, "start cell is occupied");
  if (grid.blocked(*g)) throw Error(ErrorCode::kGoalOccupied, "goal cell is occupied");

  const double res = grid.resolution();
  const Vec3 goal_center = grid.center_of(*g);
  auto heuristic = [&](const GridIndex& c) { return (grid.center_of(c) - goal_center).norm(); };

  std::vector<GridIndex> steps;
  std::vector<double> step_cost;
  for (int dz = -1; dz <= 1; ++dz) {
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        if (dx == 0 && dy == 0 && dz == 0) continue;
        steps.push_back({dx, dy, dz});
        step_cost.push_back(res * std::sqrt(static_cast<double>(dx * dx + dy * dy + dz * dz)));
      }
    }
  }

  const std::size_t n = grid.size();
  std::vector<double> cost(n, std::numeric_limits<double>::infinity());
  std::vector<std::size_t> parent(n, std::numeric_limits<std::size_t>::max());
  std::vector<std::uint8_t> closed(n, 0);
  std::priority_queue<OpenEntry, std::vector<OpenEntry>, OpenOrder> open;

  const std::size_t start_cell = grid.linear(*s);
  const std::size_t goal_cell = grid.linear(*g);
  cost[start_cell] = 0.0;
  const double h0 = heuristic(*s);
  open.push({epsilon * h0, h0, start_cell});

  SearchResult result;
  bool found = false;
  while (!open.empty()) {
    const OpenEntry top = open.top();
    open.pop();
    if (closed[top.cell]) continue;
    if (top.cell == goal_cell) {
      found = true;
      break;
    }
    closed[top.cell] = 1;
    ++result.expansions;
    const GridIndex c = grid.from_linear(top.cell);
    for (std::size_t k = 0; k < steps.size(); ++k) {
      const GridIndex nb{c.x + steps[k].x, c.y + steps[k].y, c.z + steps[k].z};
      if (!grid.in_bounds(nb)) continue;
      const std::size_t nc = grid.linear(nb);
      if (closed[nc] || !move_allowed(grid, c, steps[k])) continue;
      const double candidate = cost[top.cell] + step_cost[k];
      if (candidate < cost[nc]) {
        cost[nc] = candidate;
        parent[nc] = top.cell;
        const double h = heuristic(nb);
        open.push({candidate + epsilon * h, h, nc});
      }
    }
  }
  if (!found) throw Error(ErrorCode::kNoPath, "goal unreachable from start");

  for (std::size_t c = goal_cell;; c = parent[c]) {
    result.path.cells.push_back(grid.from_linear(c));
    if (c == start_cell) break;
  }
  std::reverse(result.path.cells.begin(), result.path.cells.end());
  for (const auto& c : result.path.cells) result.path.waypoints.push_back(grid.center_of(c));
  result.cost = cost[goal_cell];
  return result;
}

bool line_of_sight(const VoxelGrid& grid, const Vec3& a, const Vec3& b) {
  const double len = (b - a).norm();
  const int samples = std::max(1, static_cast<int>(std::ceil(len / (0.25 * grid.resolution()))));
  for (int k = 0; k <= samples; ++k) {
    const Vec3 p = a + (b - a) * (static_cast<double>(k) / samples);
    const auto idx = grid.index_of(p);
    if (!idx || grid.blocked(*idx)) return false;
  }
  return true;
}

GridPath shortcut_path(const VoxelGrid& grid, const GridPath& path) {
  GridPath out;
  const auto& w = path.waypoints;
  if (w.size() <= 2) {
    out.waypoints = w;
    return out;
  }
  std::size_t i = 0;
  out.waypoints.push_back(w.front());
  while (i + 1 < w.size()) {
    std::size_t j = i + 1;
    for (std::size_t k = w.size() - 1; k > i + 1; --k) {
      if (line_of_sight(grid, w[i], w[k])) {
        j = k;
        break;
      }
    }
    out.waypoints.push_back(w[j]);
    i = j;
  }
  return out;
}

std::vector<Vec3> densify(const std::vector<Vec3>& points, double step) {
  if (points.size() < 2 || !(step > 0.0)) return points;
  std::vector<Vec3> out{points.front()};
  for (std::size_t i = 1; i < points.size(); ++i) {
    const Vec3 d = points[i] - points[i - 1];
    const int n = std::max(1, static_cast<int>(std::ceil(d.norm() / step)));
    for (int k = 1; k <= n; ++k) out.push_back(points[i - 1] + d * (static_cast<double>(k) / n));
  }
  return out;
}

std::vector<Vec3> read_xyz(std::istream& in) {
  std::vector<Vec3> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ss(line);
    Vec3 p;
    std::string extra;
    if (!(ss >> p.x() >> p.y() >> p.z()) || (ss >> extra) || !p.allFinite()) {
      throw Error(ErrorCode::kScenarioParse,
                  fmt::format("line {}: expected three finite numbers", line_no), line_no);
    }
    out.push_back(p);
  }
  return out;
}

std::vector<Vec3> load_xyz(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, fmt::format("cannot open point cloud '{}'", path.string()));
  return read_xyz(in);
}

}  // namespace morphquad
