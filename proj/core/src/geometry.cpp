#include "namo/geometry.hpp"

#include <algorithm>
#include <limits>

#include "namo/errors.hpp"

namespace namo {

namespace {

constexpr double kEps = 1e-12;

bool segments_intersect(Vec2 p1, Vec2 p2, Vec2 q1, Vec2 q2) {
  const double d1 = cross(q2 - q1, p1 - q1);
  const double d2 = cross(q2 - q1, p2 - q1);
  const double d3 = cross(p2 - p1, q1 - p1);
  const double d4 = cross(p2 - p1, q2 - p1);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) &&
      ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) {
    return true;
  }
  const auto on_segment = [](Vec2 a, Vec2 b, Vec2 p) {
    return std::min(a.x, b.x) - kEps <= p.x && p.x <= std::max(a.x, b.x) + kEps &&
           std::min(a.y, b.y) - kEps <= p.y && p.y <= std::max(a.y, b.y) + kEps;
  };
  if (std::abs(d1) <= kEps && on_segment(q1, q2, p1)) return true;
  if (std::abs(d2) <= kEps && on_segment(q1, q2, p2)) return true;
  if (std::abs(d3) <= kEps && on_segment(p1, p2, q1)) return true;
  if (std::abs(d4) <= kEps && on_segment(p1, p2, q2)) return true;
  return false;
}

double signed_area(const std::vector<Vec2>& v) {
  double a = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    a += cross(v[i], v[(i + 1) % v.size()]);
  }
  return 0.5 * a;
}

}  // namespace

Vec2 normalized(Vec2 v) {
  const double n = v.norm();
  if (n <= 0.0) return {0.0, 0.0};
  return v / n;
}

Vec2 rotate(Vec2 v, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {c * v.x - s * v.y, s * v.x + c * v.y};
}

double normalize_angle(double theta) {
  constexpr double kPi = std::numbers::pi;
  double t = std::remainder(theta, 2.0 * kPi);  // [-pi, pi]
  if (t <= -kPi) t += 2.0 * kPi;
  return t;
}

Vec2 Pose2::transform(Vec2 local) const { return rotate(local, theta) + position(); }

Vec2 Pose2::inverse_transform(Vec2 world) const {
  return rotate(world - position(), -theta);
}

Polygon::Polygon(std::vector<Vec2> vertices) : vertices_(std::move(vertices)) {
  if (vertices_.size() < 3) {
    throw InvalidPolygon("polygon needs at least 3 vertices");
  }
  for (const Vec2& v : vertices_) {
    if (!v.is_finite()) throw InvalidPolygon("non-finite polygon vertex");
  }
  if (signed_area(vertices_) <= 0.0) {
    throw InvalidPolygon("polygon must be counter-clockwise with positive area");
  }
  const std::size_t n = vertices_.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      // Adjacent edges share a vertex; skip them.
      if (j == i + 1 || (i == 0 && j == n - 1)) continue;
      if (segments_intersect(vertices_[i], vertices_[(i + 1) % n], vertices_[j],
                             vertices_[(j + 1) % n])) {
        throw InvalidPolygon("polygon is self-intersecting");
      }
    }
  }
}

Polygon Polygon::rectangle(Vec2 min, Vec2 max) {
  return Polygon({{min.x, min.y}, {max.x, min.y}, {max.x, max.y}, {min.x, max.y}});
}

Polygon Polygon::box(double sx, double sy, const Pose2& pose) {
  const double hx = 0.5 * sx;
  const double hy = 0.5 * sy;
  return Polygon({pose.transform({-hx, -hy}), pose.transform({hx, -hy}),
                  pose.transform({hx, hy}), pose.transform({-hx, hy})});
}

Polygon Polygon::regular(Vec2 center, double radius, int sides) {
  std::vector<Vec2> v;
  v.reserve(static_cast<std::size_t>(sides));
  // Circumscribed: vertex radius chosen so that the inscribed circle has `radius`.
  const double r = radius / std::cos(std::numbers::pi / sides);
  for (int i = 0; i < sides; ++i) {
    const double a = 2.0 * std::numbers::pi * i / sides;
    v.push_back(center + Vec2{r * std::cos(a), r * std::sin(a)});
  }
  return Polygon(std::move(v));
}

double Polygon::area() const { return signed_area(vertices_); }

Vec2 Polygon::centroid() const {
  double a = 0.0;
  Vec2 c;
  for (std::size_t i = 0; i < vertices_.size(); ++i) {
    const Vec2 p = vertices_[i];
    const Vec2 q = vertex(i + 1);
    const double w = cross(p, q);
    a += w;
    c += (p + q) * w;
  }
  return c / (3.0 * a);
}

Vec2 Polygon::edge_normal(std::size_t i) const {
  const Vec2 e = vertex(i + 1) - vertex(i);
  return normalized({e.y, -e.x});
}

bool Polygon::contains(Vec2 p) const {
  bool inside = false;
  const std::size_t n = vertices_.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2 a = vertices_[i];
    const Vec2 b = vertices_[j];
    if ((a.y > p.y) != (b.y > p.y)) {
      const double x = (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x;
      if (p.x < x) inside = !inside;
    }
  }
  return inside;
}

bool Polygon::is_convex() const {
  for (std::size_t i = 0; i < vertices_.size(); ++i) {
    if (cross(vertex(i + 1) - vertex(i), vertex(i + 2) - vertex(i + 1)) < 0.0) return false;
  }
  return true;
}

Polygon Polygon::transformed(const Pose2& pose) const {
  std::vector<Vec2> v;
  v.reserve(vertices_.size());
  for (const Vec2& p : vertices_) v.push_back(pose.transform(p));
  Polygon out;
  out.vertices_ = std::move(v);  // rigid motion preserves validity
  return out;
}

void Polygon::bounds(Vec2& min, Vec2& max) const {
  min = {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  max = -min;
  for (const Vec2& v : vertices_) {
    min.x = std::min(min.x, v.x);
    min.y = std::min(min.y, v.y);
    max.x = std::max(max.x, v.x);
    max.y = std::max(max.y, v.y);
  }
}

Polygon convex_hull(std::span<const Vec2> points) {
  if (points.size() < 3) throw DegenerateInput("convex hull needs at least 3 points");
  std::vector<Vec2> sorted(points.begin(), points.end());
  std::sort(sorted.begin(), sorted.end(), [](Vec2 a, Vec2 b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
  });
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  if (sorted.size() < 3) throw DegenerateInput("convex hull needs 3 distinct points");

  std::vector<Vec2> hull(2 * sorted.size());
  std::size_t k = 0;
  for (const Vec2& p : sorted) {
    while (k >= 2 && cross(hull[k - 1] - hull[k - 2], p - hull[k - 2]) <= 0.0) --k;
    hull[k++] = p;
  }
  const std::size_t lower = k + 1;
  for (auto it = sorted.rbegin() + 1; it != sorted.rend(); ++it) {
    while (k >= lower && cross(hull[k - 1] - hull[k - 2], *it - hull[k - 2]) <= 0.0) --k;
    hull[k++] = *it;
  }
  hull.resize(k - 1);
  if (hull.size() < 3) throw DegenerateInput("all points are collinear");
  // Rounding can leave a sliver around nearly collinear input.
  double twice_area = 0.0;
  for (std::size_t i = 0; i < hull.size(); ++i) twice_area += cross(hull[i], hull[(i + 1) % hull.size()]);
  Vec2 lo = sorted.front(), hi = sorted.front();
  for (const Vec2& p : sorted) {
    lo = {std::min(lo.x, p.x), std::min(lo.y, p.y)};
    hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
  }
  const double diag2 = (hi - lo).squared_norm();
  if (twice_area <= 1e-9 * diag2) throw DegenerateInput("points are nearly collinear");
  return Polygon(std::move(hull));
}

Vec2 closest_point_on_segment(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 ab = b - a;
  const double len2 = ab.squared_norm();
  if (len2 <= 0.0) return a;
  const double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
  return a + ab * t;
}

namespace {

struct EdgeFeature {
  double distance;
  Vec2 witness;
  Vec2 normal;
};

EdgeFeature nearest_on_edge(Vec2 c, const Polygon& polygon, std::size_t i) {
  const Vec2 a = polygon.vertex(i);
  const Vec2 b = polygon.vertex(i + 1);
  const Vec2 ab = b - a;
  const double t = std::clamp(dot(c - a, ab) / ab.squared_norm(), 0.0, 1.0);
  const Vec2 w = a + ab * t;
  const double d = distance(c, w);
  Vec2 n = polygon.edge_normal(i);
  // Vertex region: the normal follows the centre so the field stays continuous.
  if ((t <= 0.0 || t >= 1.0) && d > kEps && !polygon.contains(c)) {
    n = (c - w) / d;
  }
  return {d, w, n};
}

}  // namespace

SignedDistance signed_distance_circle_polygon(const Circle& circle, const Polygon& polygon) {
  EdgeFeature best{std::numeric_limits<double>::infinity(), {}, {}};
  for (std::size_t i = 0; i < polygon.size(); ++i) {
    const EdgeFeature f = nearest_on_edge(circle.center, polygon, i);
    if (f.distance < best.distance) best = f;
  }
  const bool inside = polygon.contains(circle.center);
  const double d = inside ? -best.distance : best.distance;
  return {d - circle.radius, best.normal, best.witness};
}

SignedDistance signed_distance_circle_edge(const Circle& circle, const Polygon& polygon,
                                           std::size_t edge) {
  const EdgeFeature f = nearest_on_edge(circle.center, polygon, edge);
  const bool inside = polygon.contains(circle.center);
  const double d = inside ? -f.distance : f.distance;
  return {d - circle.radius, f.normal, f.witness};
}

ProjectionRejection project_reject(Vec2 v, Vec2 n) {
  if (std::abs(n.norm() - 1.0) > 1e-9) throw NonUnitNormal("normal must be unit length");
  const double along = dot(v, n);
  return {std::abs(along), (v - n * along).norm()};
}

bool polygons_intersect(const Polygon& a, const Polygon& b) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      if (segments_intersect(a.vertex(i), a.vertex(i + 1), b.vertex(j), b.vertex(j + 1))) {
        return true;
      }
    }
  }
  return a.contains(b.vertex(0)) || b.contains(a.vertex(0));
}

}  // namespace namo
