#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "namo/geometry.hpp"

namespace namo::nav {

struct Cell {
  int x = 0;
  int y = 0;
  bool operator==(const Cell&) const = default;
};

// Row-major occupancy grid. Cell (0, 0) has its lower-left corner at origin.
class OccupancyGrid {
 public:
  OccupancyGrid() = default;
  OccupancyGrid(Vec2 origin, double resolution, int width, int height);

  // Smallest grid with corner at lo that covers hi.
  static OccupancyGrid covering(Vec2 lo, Vec2 hi, double resolution);

  Vec2 origin() const { return origin_; }
  double resolution() const { return resolution_; }
  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return cells_.size(); }

  bool in_bounds(Cell c) const { return c.x >= 0 && c.y >= 0 && c.x < width_ && c.y < height_; }
  std::size_t index(Cell c) const {
    return static_cast<std::size_t>(c.y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(c.x);
  }
  Cell cell_at(std::size_t i) const {
    return {static_cast<int>(i % static_cast<std::size_t>(width_)), static_cast<int>(i / static_cast<std::size_t>(width_))};
  }
  // nullopt outside the grid.
  std::optional<Cell> cell_of(Vec2 p) const;
  Vec2 center(Cell c) const;
  Polygon cell_square(Cell c) const;

  bool occupied(Cell c) const { return cells_[index(c)] != 0; }
  bool occupied(std::size_t i) const { return cells_[i] != 0; }
  void set(Cell c, bool occ) { cells_[index(c)] = occ ? 1 : 0; }
  std::size_t occupied_count() const;

  // Marks every cell whose square overlaps the polygon. Returns the number of
  // cells that changed from free to occupied.
  std::size_t rasterize(const Polygon& poly);
  // Cells the polygon overlaps, without modifying the grid.
  std::vector<Cell> overlapped_cells(const Polygon& poly) const;

  bool operator==(const OccupancyGrid&) const = default;

 private:
  Vec2 origin_;
  double resolution_ = 1.0;
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> cells_;
};

// Occupies every cell whose centre lies within radius of an occupied cell centre.
OccupancyGrid inflate(const OccupancyGrid& grid, double radius);

// Cell offsets (dx, dy) with centre distance <= radius.
std::vector<Cell> disc_offsets(double radius, double resolution);

struct GridPath {
  std::vector<Cell> cells;
  std::vector<Vec2> points;  // cell centres
  double cost = 0.0;         // metres

  std::size_t size() const { return cells.size(); }
  bool empty() const { return cells.empty(); }
};

double octile_distance(Cell a, Cell b, double resolution);

// 8-connected A*. A diagonal move needs both adjacent side cells free.
// Throws OutOfBounds or NoPath.
GridPath astar(const OccupancyGrid& grid, Cell start, Cell goal);
GridPath astar(const OccupancyGrid& grid, Vec2 start, Vec2 goal);

// Nearest free cell by breadth-first search. nullopt if the grid is full.
std::optional<Cell> nearest_free(const OccupancyGrid& grid, Cell from);

}  // namespace namo::nav
