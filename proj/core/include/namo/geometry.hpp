#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <vector>

namespace namo {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  constexpr Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  constexpr Vec2 operator-() const { return {-x, -y}; }
  constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
  constexpr Vec2 operator/(double s) const { return {x / s, y / s}; }
  constexpr Vec2& operator+=(Vec2 o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  constexpr Vec2& operator-=(Vec2 o) {
    x -= o.x;
    y -= o.y;
    return *this;
  }
  constexpr bool operator==(const Vec2&) const = default;

  double norm() const { return std::hypot(x, y); }
  constexpr double squared_norm() const { return x * x + y * y; }
  bool is_finite() const { return std::isfinite(x) && std::isfinite(y); }
};

constexpr Vec2 operator*(double s, Vec2 v) { return v * s; }
constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
// z-component of the 3D cross product.
constexpr double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double distance(Vec2 a, Vec2 b) { return (a - b).norm(); }
Vec2 normalized(Vec2 v);
Vec2 rotate(Vec2 v, double angle);
// Counter-clockwise perpendicular.
constexpr Vec2 perp(Vec2 v) { return {-v.y, v.x}; }

// Wraps an angle to (-pi, pi].
double normalize_angle(double theta);

struct Pose2 {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;

  constexpr Vec2 position() const { return {x, y}; }
  // Maps a point from the body frame to the world frame.
  Vec2 transform(Vec2 local) const;
  // Maps a world point into the body frame.
  Vec2 inverse_transform(Vec2 world) const;
  Pose2 normalized() const { return {x, y, normalize_angle(theta)}; }
  constexpr bool operator==(const Pose2&) const = default;
};

struct Circle {
  Vec2 center;
  double radius = 0.0;
};

// Simple counter-clockwise polygon. The constructor rejects fewer than three
// vertices, clockwise order and self-intersections.
class Polygon {
 public:
  Polygon() = default;
  explicit Polygon(std::vector<Vec2> vertices);

  // Axis aligned rectangle [min, max].
  static Polygon rectangle(Vec2 min, Vec2 max);
  // Rectangle of size (sx, sy) centred on the body frame origin, then placed
  // at `pose`.
  static Polygon box(double sx, double sy, const Pose2& pose = {});
  // Regular n-gon circumscribing a circle of the given radius.
  static Polygon regular(Vec2 center, double radius, int sides);

  const std::vector<Vec2>& vertices() const { return vertices_; }
  std::size_t size() const { return vertices_.size(); }
  Vec2 vertex(std::size_t i) const { return vertices_[i % vertices_.size()]; }
  bool empty() const { return vertices_.empty(); }

  double area() const;
  Vec2 centroid() const;
  // Outward unit normal of edge i (from vertex i to vertex i+1).
  Vec2 edge_normal(std::size_t i) const;
  bool contains(Vec2 p) const;
  bool is_convex() const;
  // Body-frame polygon placed at `pose`.
  Polygon transformed(const Pose2& pose) const;
  // Axis aligned bounds.
  void bounds(Vec2& min, Vec2& max) const;

  bool operator==(const Polygon&) const = default;

 private:
  std::vector<Vec2> vertices_;
};

// Andrew's monotone chain. Throws DegenerateInput for fewer than three points
// or when all points are collinear. Collinear boundary points are dropped.
Polygon convex_hull(std::span<const Vec2> points);

// Closest point on segment [a, b] to p.
Vec2 closest_point_on_segment(Vec2 p, Vec2 a, Vec2 b);

struct SignedDistance {
  double distance = 0.0;  // negative under penetration
  Vec2 normal;            // outward unit normal of the nearest feature
  Vec2 witness;           // nearest point on the polygon boundary
};

SignedDistance signed_distance_circle_polygon(const Circle& circle, const Polygon& polygon);

// Signed distance from the circle to a single polygon edge. Same sign
// convention as above: negative when the circle centre is inside the polygon.
SignedDistance signed_distance_circle_edge(const Circle& circle, const Polygon& polygon,
                                           std::size_t edge);

struct ProjectionRejection {
  double projection = 0.0;  // |v . n|
  double rejection = 0.0;   // |v - (v . n) n|
};

// Throws NonUnitNormal when | |n| - 1 | > 1e-9.
ProjectionRejection project_reject(Vec2 v, Vec2 n);

bool polygons_intersect(const Polygon& a, const Polygon& b);

}  // namespace namo
