#include "namo/grid.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <limits>
#include <queue>
#include <string>

#include "namo/errors.hpp"

namespace namo::nav {

OccupancyGrid::OccupancyGrid(Vec2 origin, double resolution, int width, int height)
    : origin_(origin), resolution_(resolution), width_(width), height_(height) {
  if (!(resolution > 0.0) || !std::isfinite(resolution)) throw DegenerateInput("grid resolution must be positive");
  if (width < 0 || height < 0) throw DegenerateInput("grid dimensions must be non-negative");
  cells_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), 0);
}

OccupancyGrid OccupancyGrid::covering(Vec2 lo, Vec2 hi, double resolution) {
  if (!(resolution > 0.0)) throw DegenerateInput("grid resolution must be positive");
  if (!(hi.x > lo.x) || !(hi.y > lo.y)) throw DegenerateInput("empty grid extent");
  const int w = static_cast<int>(std::ceil((hi.x - lo.x) / resolution - 1e-9));
  const int h = static_cast<int>(std::ceil((hi.y - lo.y) / resolution - 1e-9));
  return OccupancyGrid(lo, resolution, w, h);
}

std::optional<Cell> OccupancyGrid::cell_of(Vec2 p) const {
  const double fx = std::floor((p.x - origin_.x) / resolution_);
  const double fy = std::floor((p.y - origin_.y) / resolution_);
  if (!std::isfinite(fx) || !std::isfinite(fy)) return std::nullopt;
  if (fx < 0 || fy < 0 || fx >= width_ || fy >= height_) return std::nullopt;
  return Cell{static_cast<int>(fx), static_cast<int>(fy)};
}

Vec2 OccupancyGrid::center(Cell c) const {
  return {origin_.x + (c.x + 0.5) * resolution_, origin_.y + (c.y + 0.5) * resolution_};
}

Polygon OccupancyGrid::cell_square(Cell c) const {
  const double x0 = origin_.x + c.x * resolution_;
  const double y0 = origin_.y + c.y * resolution_;
  return Polygon({{x0, y0}, {x0 + resolution_, y0}, {x0 + resolution_, y0 + resolution_}, {x0, y0 + resolution_}});
}

std::size_t OccupancyGrid::occupied_count() const {
  return static_cast<std::size_t>(std::count(cells_.begin(), cells_.end(), std::uint8_t{1}));
}

std::vector<Cell> OccupancyGrid::overlapped_cells(const Polygon& poly) const {
  std::vector<Cell> out;
  if (poly.size() < 3 || width_ == 0 || height_ == 0) return out;
  Vec2 lo, hi;
  poly.bounds(lo, hi);
  const int x0 = std::max(0, static_cast<int>(std::floor((lo.x - origin_.x) / resolution_)));
  const int y0 = std::max(0, static_cast<int>(std::floor((lo.y - origin_.y) / resolution_)));
  const int x1 = std::min(width_ - 1, static_cast<int>(std::floor((hi.x - origin_.x) / resolution_)));
  const int y1 = std::min(height_ - 1, static_cast<int>(std::floor((hi.y - origin_.y) / resolution_)));
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      const Cell c{x, y};
      if (polygons_intersect(cell_square(c), poly)) out.push_back(c);
    }
  }
  return out;
}

std::size_t OccupancyGrid::rasterize(const Polygon& poly) {
  std::size_t changed = 0;
  for (const Cell& c : overlapped_cells(poly)) {
    if (!occupied(c)) {
      set(c, true);
      ++changed;
    }
  }
  return changed;
}

std::vector<Cell> disc_offsets(double radius, double resolution) {
  if (!(radius >= 0.0)) throw DegenerateInput("inflation radius must be non-negative");
  const double rc = radius / resolution;
  const int n = static_cast<int>(std::floor(rc + 1e-9));
  std::vector<Cell> out;
  for (int dy = -n; dy <= n; ++dy) {
    for (int dx = -n; dx <= n; ++dx) {
      if (dx * dx + dy * dy <= rc * rc + 1e-9) out.push_back({dx, dy});
    }
  }
  return out;
}

OccupancyGrid inflate(const OccupancyGrid& grid, double radius) {
  const std::vector<Cell> disc = disc_offsets(radius, grid.resolution());
  OccupancyGrid out = grid;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!grid.occupied(i)) continue;
    const Cell c = grid.cell_at(i);
    for (const Cell& d : disc) {
      const Cell n{c.x + d.x, c.y + d.y};
      if (out.in_bounds(n)) out.set(n, true);
    }
  }
  return out;
}

double octile_distance(Cell a, Cell b, double resolution) {
  const int dx = std::abs(a.x - b.x);
  const int dy = std::abs(a.y - b.y);
  const int lo = std::min(dx, dy);
  const int hi = std::max(dx, dy);
  return resolution * ((hi - lo) + std::sqrt(2.0) * lo);
}

GridPath astar(const OccupancyGrid& grid, Cell start, Cell goal) {
  if (!grid.in_bounds(start)) throw OutOfBounds("start is outside the grid");
  if (!grid.in_bounds(goal)) throw OutOfBounds("goal is outside the grid");
  if (grid.occupied(start)) throw NoPath("start cell is occupied");
  if (grid.occupied(goal)) throw NoPath("goal cell is occupied");

  const double res = grid.resolution();
  const double diag = std::sqrt(2.0) * res;
  constexpr double kInf = std::numeric_limits<double>::infinity();
  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  std::vector<double> g(grid.size(), kInf);
  std::vector<std::size_t> parent(grid.size(), kNone);
  std::vector<std::uint8_t> closed(grid.size(), 0);

  using Entry = std::pair<double, std::size_t>;  // (f, index); ties go to the lower index
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
  const std::size_t si = grid.index(start);
  const std::size_t gi = grid.index(goal);
  g[si] = 0.0;
  open.push({octile_distance(start, goal, res), si});

  static constexpr int kDx[8] = {1, -1, 0, 0, 1, 1, -1, -1};
  static constexpr int kDy[8] = {0, 0, 1, -1, 1, -1, 1, -1};

  while (!open.empty()) {
    const auto [f, i] = open.top();
    open.pop();
    if (closed[i]) continue;
    closed[i] = 1;
    if (i == gi) break;
    const Cell c = grid.cell_at(i);
    for (int k = 0; k < 8; ++k) {
      const Cell n{c.x + kDx[k], c.y + kDy[k]};
      if (!grid.in_bounds(n) || grid.occupied(n)) continue;
      if (k >= 4 && (grid.occupied(Cell{c.x + kDx[k], c.y}) || grid.occupied(Cell{c.x, c.y + kDy[k]}))) continue;
      const std::size_t ni = grid.index(n);
      if (closed[ni]) continue;
      const double ng = g[i] + (k >= 4 ? diag : res);
      if (ng < g[ni]) {
        g[ni] = ng;
        parent[ni] = i;
        open.push({ng + octile_distance(n, goal, res), ni});
      }
    }
  }
  if (!closed[gi]) throw NoPath("goal is unreachable");

  GridPath path;
  path.cost = g[gi];
  for (std::size_t i = gi; i != kNone; i = parent[i]) path.cells.push_back(grid.cell_at(i));
  std::reverse(path.cells.begin(), path.cells.end());
  path.points.reserve(path.cells.size());
  for (const Cell& c : path.cells) path.points.push_back(grid.center(c));
  return path;
}

GridPath astar(const OccupancyGrid& grid, Vec2 start, Vec2 goal) {
  const auto s = grid.cell_of(start);
  if (!s) throw OutOfBounds("start is outside the grid");
  const auto t = grid.cell_of(goal);
  if (!t) throw OutOfBounds("goal is outside the grid");
  return astar(grid, *s, *t);
}

std::optional<Cell> nearest_free(const OccupancyGrid& grid, Cell from) {
  if (!grid.in_bounds(from)) return std::nullopt;
  std::vector<std::uint8_t> seen(grid.size(), 0);
  std::deque<Cell> queue{from};
  seen[grid.index(from)] = 1;
  while (!queue.empty()) {
    const Cell c = queue.front();
    queue.pop_front();
    if (!grid.occupied(c)) return c;
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        const Cell n{c.x + dx, c.y + dy};
        if (!grid.in_bounds(n) || seen[grid.index(n)]) continue;
        seen[grid.index(n)] = 1;
        queue.push_back(n);
      }
    }
  }
  return std::nullopt;
}

}  // namespace namo::nav
