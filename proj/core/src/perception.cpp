#include "namo/perception.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <unordered_map>

#include "namo/errors.hpp"

namespace namo::perception {

namespace {

constexpr double kPi = std::numbers::pi;

struct Sampler {
  std::mt19937_64 rng;
  std::uniform_real_distribution<double> unit{0.0, 1.0};
  std::normal_distribution<double> gauss{0.0, 1.0};

  double uniform(double lo, double hi) { return lo + (hi - lo) * unit(rng); }
};

struct SurfacePoint {
  Point3 p;
  Point3 n;
};

class Visibility {
 public:
  Visibility(const Pose2& robot, const SensorParams& s)
      : robot_(robot), sensor_(robot.x, robot.y, s.height), fov_(s.fov), range_(s.range) {}

  bool operator()(const SurfacePoint& sp) const {
    const Point3 to_sensor = sensor_ - sp.p;
    if (sp.n.dot(to_sensor) <= 0.0) return false;
    if (to_sensor.norm() > range_) return false;
    const double bearing = std::atan2(sp.p.y() - robot_.y, sp.p.x() - robot_.x);
    return std::abs(normalize_angle(bearing - robot_.theta)) <= 0.5 * fov_;
  }

 private:
  Pose2 robot_;
  Point3 sensor_;
  double fov_;
  double range_;
};

std::size_t sample_count(double area, double density) {
  return static_cast<std::size_t>(std::llround(area * density));
}

Point3 lift(const Pose2& pose, Vec2 local, double z) {
  const Vec2 w = pose.transform(local);
  return {w.x, w.y, z};
}

Point3 lift_dir(const Pose2& pose, Vec2 local, double z) {
  const Vec2 w = rotate(local, pose.theta);
  return {w.x, w.y, z};
}

void sample_object(const UnknownObject& o, double density, Sampler& s,
                   const std::function<void(const SurfacePoint&)>& emit) {
  switch (o.shape) {
    case BodyShape::Box: {
      const double hx = 0.5 * o.size_x, hy = 0.5 * o.size_y;
      struct Face {
        Vec2 n, origin, dir;
        double len;
      };
      const Face sides[4] = {{{1, 0}, {hx, -hy}, {0, 1}, o.size_y},
                             {{0, 1}, {hx, hy}, {-1, 0}, o.size_x},
                             {{-1, 0}, {-hx, hy}, {0, -1}, o.size_y},
                             {{0, -1}, {-hx, -hy}, {1, 0}, o.size_x}};
      for (const Face& f : sides) {
        const Point3 n = lift_dir(o.pose, f.n, 0.0);
        const std::size_t count = sample_count(f.len * o.height, density);
        for (std::size_t i = 0; i < count; ++i) {
          const Vec2 local = f.origin + f.dir * s.uniform(0.0, f.len);
          emit({lift(o.pose, local, s.uniform(0.0, o.height)), n});
        }
      }
      const std::size_t count = sample_count(o.size_x * o.size_y, density);
      for (std::size_t i = 0; i < count; ++i) {
        emit({lift(o.pose, {s.uniform(-hx, hx), s.uniform(-hy, hy)}, o.height), Point3::UnitZ()});
      }
      break;
    }
    case BodyShape::Cylinder: {
      const std::size_t lateral = sample_count(2.0 * kPi * o.radius * o.height, density);
      for (std::size_t i = 0; i < lateral; ++i) {
        const double a = s.uniform(-kPi, kPi);
        const Vec2 dir{std::cos(a), std::sin(a)};
        emit({lift(o.pose, dir * o.radius, s.uniform(0.0, o.height)), lift_dir(o.pose, dir, 0.0)});
      }
      const std::size_t cap = sample_count(kPi * o.radius * o.radius, density);
      for (std::size_t i = 0; i < cap; ++i) {
        const double a = s.uniform(-kPi, kPi);
        const double r = o.radius * std::sqrt(s.unit(s.rng));
        emit({lift(o.pose, {r * std::cos(a), r * std::sin(a)}, o.height), Point3::UnitZ()});
      }
      break;
    }
    case BodyShape::Sphere: {
      const std::size_t count = sample_count(4.0 * kPi * o.radius * o.radius, density);
      const Point3 c(o.pose.x, o.pose.y, o.radius);
      for (std::size_t i = 0; i < count; ++i) {
        Point3 d(s.gauss(s.rng), s.gauss(s.rng), s.gauss(s.rng));
        if (d.norm() < 1e-12) continue;
        d.normalize();
        emit({c + o.radius * d, d});
      }
      break;
    }
  }
}

// Union-find with path halving and union by index (smaller root wins), which
// keeps labels independent of traversal order.
struct DisjointSets {
  std::vector<std::size_t> parent;
  explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t i) {
    while (parent[i] != i) {
      parent[i] = parent[parent[i]];
      i = parent[i];
    }
    return i;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

struct CellKey {
  std::int64_t x, y, z;
  bool operator==(const CellKey&) const = default;
};

struct CellHash {
  std::size_t operator()(const CellKey& k) const {
    std::uint64_t h = static_cast<std::uint64_t>(k.x) * 0x9E3779B97F4A7C15ULL;
    h ^= static_cast<std::uint64_t>(k.y) * 0xC2B2AE3D27D4EB4FULL + (h << 6) + (h >> 2);
    h ^= static_cast<std::uint64_t>(k.z) * 0x165667B19E3779F9ULL + (h << 6) + (h >> 2);
    return static_cast<std::size_t>(h);
  }
};

CellKey cell_of(const Point3& p, double size) {
  return {static_cast<std::int64_t>(std::floor(p.x() / size)),
          static_cast<std::int64_t>(std::floor(p.y() / size)),
          static_cast<std::int64_t>(std::floor(p.z() / size))};
}

// Extent of samples spread evenly over an interval. Gaussian noise of std
// sigma smears each end; for a blurred uniform density the true end sits at
// the order statistic with rho * sigma / sqrt(2 pi) samples beyond it, where
// rho is the sample density. With sigma = 0 this is exactly min/max.
std::pair<double, double> extent(std::vector<double> v, double sigma) {
  std::sort(v.begin(), v.end());
  const double n = static_cast<double>(v.size());
  const auto at = [&](double k) {
    k = std::clamp(k, 0.0, n - 1.0);
    const auto i = static_cast<std::size_t>(k);
    return i + 1 < v.size() ? v[i] + (k - static_cast<double>(i)) * (v[i + 1] - v[i]) : v[i];
  };
  double lo = v.front(), hi = v.back();
  for (int it = 0; it < 3 && sigma > 0.0 && hi > lo; ++it) {
    const double k = n / (hi - lo) * sigma / std::sqrt(2.0 * kPi);
    if (k >= 0.5 * (n - 1.0)) break;
    lo = at(k);
    hi = at(n - 1.0 - k);
  }
  return {lo, hi};
}

struct PlaneModel {
  Point3 n;  // unit
  double d;  // n . p = d
};

struct CircleModel {
  double cx, cy, r;
};

struct SphereModel {
  Point3 c;
  double r;
};

double residual(const PlaneModel& m, const Point3& p) { return std::abs(m.n.dot(p) - m.d); }
double residual(const CircleModel& m, const Point3& p) {
  return std::abs(std::hypot(p.x() - m.cx, p.y() - m.cy) - m.r);
}
double residual(const SphereModel& m, const Point3& p) { return std::abs((p - m.c).norm() - m.r); }

template <class Model>
std::vector<std::size_t> collect(const Model& m, const std::vector<Point3>& pts, double tol) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (residual(m, pts[i]) <= tol) out.push_back(i);
  }
  return out;
}

template <class Model>
double rms_residual(const Model& m, const std::vector<Point3>& pts, const std::vector<std::size_t>& idx) {
  double s = 0.0;
  for (std::size_t i : idx) s += std::pow(residual(m, pts[i]), 2);
  return std::sqrt(s / static_cast<double>(idx.size()));
}

template <class Model>
std::size_t count(const Model& m, const std::vector<Point3>& pts, double tol) {
  std::size_t c = 0;
  for (const Point3& p : pts) c += residual(m, p) <= tol ? 1 : 0;
  return c;
}

Point3 mean_of(const std::vector<Point3>& pts, const std::vector<std::size_t>& idx) {
  Point3 m = Point3::Zero();
  for (std::size_t i : idx) m += pts[i];
  return m / static_cast<double>(idx.size());
}

std::optional<PlaneModel> plane_from_sample(const Point3& a, const Point3& b, const Point3& c) {
  Point3 n = (b - a).cross(c - a);
  const double len = n.norm();
  if (len < 1e-12) return std::nullopt;
  n /= len;
  return PlaneModel{n, n.dot(a)};
}

PlaneModel refit_plane(const std::vector<Point3>& pts, const std::vector<std::size_t>& idx,
                       double vertical_tol) {
  const Point3 mu = mean_of(pts, idx);
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (std::size_t i : idx) cov += (pts[i] - mu) * (pts[i] - mu).transpose();
  Point3 n = Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d>(cov).eigenvectors().col(0);
  if (std::abs(n.z()) <= std::sin(vertical_tol)) {
    // Vertical plane: fit the line of the ground projection.
    Eigen::Matrix2d c2 = cov.topLeftCorner<2, 2>();
    const Eigen::Vector2d m2 = Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(c2).eigenvectors().col(0);
    n = Point3(m2.x(), m2.y(), 0.0).normalized();
  }
  return {n, n.dot(mu)};
}

std::optional<CircleModel> circle_from_sample(const Point3& a, const Point3& b, const Point3& c) {
  const double ax = a.x(), ay = a.y(), bx = b.x(), by = b.y(), cx = c.x(), cy = c.y();
  const double d = 2.0 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by));
  if (std::abs(d) < 1e-12) return std::nullopt;
  const double a2 = ax * ax + ay * ay, b2 = bx * bx + by * by, c2 = cx * cx + cy * cy;
  const double ux = (a2 * (by - cy) + b2 * (cy - ay) + c2 * (ay - by)) / d;
  const double uy = (a2 * (cx - bx) + b2 * (ax - cx) + c2 * (bx - ax)) / d;
  return CircleModel{ux, uy, std::hypot(ax - ux, ay - uy)};
}

std::optional<CircleModel> refit_circle(const std::vector<Point3>& pts, const std::vector<std::size_t>& idx,
                                        CircleModel m) {
  // Algebraic fit, then Gauss-Newton on the geometric residual.
  const auto n = static_cast<Eigen::Index>(idx.size());
  Eigen::MatrixXd A(n, 3);
  Eigen::VectorXd b(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const Point3& p = pts[idx[static_cast<std::size_t>(k)]];
    A.row(k) << 2.0 * p.x(), 2.0 * p.y(), 1.0;
    b[k] = p.x() * p.x() + p.y() * p.y();
  }
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
  if (qr.rank() == 3) {
    const Eigen::Vector3d s = qr.solve(b);
    const double r2 = s[2] + s[0] * s[0] + s[1] * s[1];
    if (r2 > 0.0) m = {s[0], s[1], std::sqrt(r2)};
  }
  for (int it = 0; it < 20; ++it) {
    Eigen::MatrixXd J(n, 3);
    Eigen::VectorXd r(n);
    for (Eigen::Index k = 0; k < n; ++k) {
      const Point3& p = pts[idx[static_cast<std::size_t>(k)]];
      const double dx = p.x() - m.cx, dy = p.y() - m.cy;
      const double dist = std::hypot(dx, dy);
      if (dist < 1e-12) return std::nullopt;
      J.row(k) << -dx / dist, -dy / dist, -1.0;
      r[k] = dist - m.r;
    }
    const Eigen::Vector3d step = J.colPivHouseholderQr().solve(-r);
    if (!step.allFinite()) return std::nullopt;
    m = {m.cx + step[0], m.cy + step[1], m.r + step[2]};
    if (step.norm() < 1e-14) break;
  }
  if (!(m.r > 0.0)) return std::nullopt;
  return m;
}

std::optional<SphereModel> sphere_from_points(const std::vector<Point3>& pts,
                                              const std::vector<std::size_t>& idx) {
  const auto n = static_cast<Eigen::Index>(idx.size());
  Eigen::MatrixXd A(n, 4);
  Eigen::VectorXd b(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const Point3& p = pts[idx[static_cast<std::size_t>(k)]];
    A.row(k) << 2.0 * p.x(), 2.0 * p.y(), 2.0 * p.z(), 1.0;
    b[k] = p.squaredNorm();
  }
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
  if (qr.rank() < 4) return std::nullopt;
  const Eigen::Vector4d s = qr.solve(b);
  const Point3 c = s.head<3>();
  const double r2 = s[3] + c.squaredNorm();
  if (!(r2 > 0.0)) return std::nullopt;
  return SphereModel{c, std::sqrt(r2)};
}

std::optional<SphereModel> refine_sphere(const std::vector<Point3>& pts, const std::vector<std::size_t>& idx,
                                         SphereModel m) {
  const auto n = static_cast<Eigen::Index>(idx.size());
  for (int it = 0; it < 20; ++it) {
    Eigen::MatrixXd J(n, 4);
    Eigen::VectorXd r(n);
    for (Eigen::Index k = 0; k < n; ++k) {
      const Point3 d = pts[idx[static_cast<std::size_t>(k)]] - m.c;
      const double dist = d.norm();
      if (dist < 1e-12) return std::nullopt;
      J.row(k) << -d.transpose() / dist, -1.0;
      r[k] = dist - m.r;
    }
    const Eigen::Vector4d step = J.colPivHouseholderQr().solve(-r);
    if (!step.allFinite()) return std::nullopt;
    m.c += step.head<3>();
    m.r += step[3];
    if (step.norm() < 1e-14) break;
  }
  if (!(m.r > 0.0)) return std::nullopt;
  return m;
}

// Draws k distinct indices.
std::vector<std::size_t> draw(std::mt19937_64& rng, std::size_t n, std::size_t k) {
  std::vector<std::size_t> out;
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  while (out.size() < k) {
    const std::size_t i = pick(rng);
    if (std::find(out.begin(), out.end(), i) == out.end()) out.push_back(i);
  }
  return out;
}

void orient_plane(Primitive& prim, const std::optional<Point3>& viewpoint) {
  bool flip;
  if (viewpoint) {
    flip = prim.normal3.dot(*viewpoint - prim.center) < 0.0;
  } else {
    const Point3& n = prim.normal3;
    flip = n.z() < 0.0 || (n.z() == 0.0 && (n.x() < 0.0 || (n.x() == 0.0 && n.y() < 0.0)));
  }
  if (flip) prim.normal3 = -prim.normal3;
}

Primitive make_plane(const std::vector<Point3>& pts, std::vector<std::size_t> idx, const PlaneModel& m,
                     const RansacParams& params) {
  Primitive prim;
  prim.shape = ShapeKind::Plane;
  prim.normal3 = m.n;
  Point3 e1, e2;
  if (m.n.z() == 0.0) {
    e1 = Point3(-m.n.y(), m.n.x(), 0.0);
    e2 = Point3::UnitZ();
  } else {
    const Point3 mu = mean_of(pts, idx);
    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (std::size_t i : idx) cov += (pts[i] - mu) * (pts[i] - mu).transpose();
    e1 = Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d>(cov).eigenvectors().col(2);
    e1 = (e1 - e1.dot(m.n) * m.n).normalized();
    e2 = m.n.cross(e1);
  }
  std::vector<double> c1, c2;
  for (std::size_t i : idx) {
    c1.push_back(e1.dot(pts[i]));
    c2.push_back(e2.dot(pts[i]));
  }
  const double sigma = rms_residual(m, pts, idx);
  const auto [lo1, hi1] = extent(c1, sigma);
  const auto [lo2, hi2] = extent(c2, sigma);
  prim.width = hi1 - lo1;
  prim.height = hi2 - lo2;
  prim.center = m.n * m.d + e1 * (0.5 * (lo1 + hi1)) + e2 * (0.5 * (lo2 + hi2));
  orient_plane(prim, params.viewpoint);
  if (prim.normal3.z() == 0.0) prim.normal = {prim.normal3.x(), prim.normal3.y()};
  prim.inliers = std::move(idx);
  return prim;
}

std::optional<Primitive> fit_plane(const std::vector<Point3>& pts, const RansacParams& p) {
  std::mt19937_64 rng(p.seed);
  std::size_t best = 0;
  PlaneModel model{};
  for (int it = 0; it < p.max_iters; ++it) {
    const auto s = draw(rng, pts.size(), 3);
    const auto m = plane_from_sample(pts[s[0]], pts[s[1]], pts[s[2]]);
    if (!m) continue;
    const std::size_t c = count(*m, pts, p.inlier_tol);
    if (c > best) {
      best = c;
      model = *m;
    }
  }
  if (best < p.min_inliers) return std::nullopt;
  auto idx = collect(model, pts, p.inlier_tol);
  for (int round = 0; round < 2; ++round) {
    model = refit_plane(pts, idx, p.vertical_tol);
    idx = collect(model, pts, p.inlier_tol);
    if (idx.size() < p.min_inliers) return std::nullopt;
  }
  return make_plane(pts, std::move(idx), model, p);
}

std::optional<Primitive> fit_cylinder(const std::vector<Point3>& pts, const RansacParams& p) {
  std::mt19937_64 rng(p.seed);
  std::size_t best = 0;
  CircleModel model{};
  for (int it = 0; it < p.max_iters; ++it) {
    const auto s = draw(rng, pts.size(), 3);
    const auto m = circle_from_sample(pts[s[0]], pts[s[1]], pts[s[2]]);
    if (!m || m->r > p.max_radius) continue;
    const std::size_t c = count(*m, pts, p.inlier_tol);
    if (c > best) {
      best = c;
      model = *m;
    }
  }
  if (best < p.min_inliers) return std::nullopt;
  auto idx = collect(model, pts, p.inlier_tol);
  for (int round = 0; round < 2; ++round) {
    const auto m = refit_circle(pts, idx, model);
    if (!m || m->r > p.max_radius) return std::nullopt;
    model = *m;
    idx = collect(model, pts, p.inlier_tol);
    if (idx.size() < p.min_inliers) return std::nullopt;
  }
  Primitive prim;
  prim.shape = ShapeKind::Cylinder;
  prim.radius = model.r;
  std::vector<double> z;
  for (std::size_t i : idx) z.push_back(pts[i].z());
  const auto [lo, hi] = extent(z, rms_residual(model, pts, idx));
  prim.height = hi - lo;
  prim.center = Point3(model.cx, model.cy, 0.5 * (lo + hi));
  prim.inliers = std::move(idx);
  return prim;
}

std::optional<Primitive> fit_sphere(const std::vector<Point3>& pts, const RansacParams& p) {
  std::mt19937_64 rng(p.seed);
  std::size_t best = 0;
  SphereModel model{};
  for (int it = 0; it < p.max_iters; ++it) {
    const auto s = draw(rng, pts.size(), 4);
    const auto m = sphere_from_points(pts, s);
    if (!m || m->r > p.max_radius) continue;
    const std::size_t c = count(*m, pts, p.inlier_tol);
    if (c > best) {
      best = c;
      model = *m;
    }
  }
  if (best < p.min_inliers) return std::nullopt;
  auto idx = collect(model, pts, p.inlier_tol);
  for (int round = 0; round < 2; ++round) {
    auto m = sphere_from_points(pts, idx);
    if (m) m = refine_sphere(pts, idx, *m);
    if (!m || m->r > p.max_radius) return std::nullopt;
    model = *m;
    idx = collect(model, pts, p.inlier_tol);
    if (idx.size() < p.min_inliers) return std::nullopt;
  }
  Primitive prim;
  prim.shape = ShapeKind::Sphere;
  prim.radius = model.r;
  prim.center = model.c;
  prim.inliers = std::move(idx);
  return prim;
}

[[noreturn]] void parse_fail(const std::string& what, int line, int column) {
  throw ParseError(what, line, column);
}

}  // namespace

const char* to_string(ShapeKind kind) {
  switch (kind) {
    case ShapeKind::Plane:
      return "plane";
    case ShapeKind::Cylinder:
      return "cylinder";
    case ShapeKind::Sphere:
      return "sphere";
  }
  return "?";
}

bool Primitive::is_vertical_plane(double tolerance_rad) const {
  return shape == ShapeKind::Plane && std::abs(normal3.z()) <= std::sin(tolerance_rad);
}

PointCloud synthesize_cloud(const World& world, const Pose2& robot_pose, const SensorParams& sensor,
                            std::uint64_t seed) {
  if (!(sensor.density > 0.0) || !(sensor.range > 0.0)) {
    throw Error("sensor density and range must be positive");
  }
  PointCloud cloud;
  cloud.sensor_pose = robot_pose;
  cloud.sensor_height = sensor.height;
  Sampler s{std::mt19937_64(seed)};
  const Visibility visible(robot_pose, sensor);
  for (const UnknownObject& o : world.objects) {
    sample_object(o, sensor.density, s, [&](const SurfacePoint& sp) {
      if (visible(sp)) cloud.points.push_back(sp.p);
    });
  }
  if (sensor.noise_sigma > 0.0) {
    for (Point3& p : cloud.points) {
      p += sensor.noise_sigma * Point3(s.gauss(s.rng), s.gauss(s.rng), s.gauss(s.rng));
    }
  }
  return cloud;
}

std::vector<int> cluster_labels(const std::vector<Point3>& points, double dist_threshold) {
  if (!(dist_threshold > 0.0)) throw Error("dist_threshold must be positive");
  const std::size_t n = points.size();
  std::unordered_map<CellKey, std::vector<std::size_t>, CellHash> grid;
  for (std::size_t i = 0; i < n; ++i) grid[cell_of(points[i], dist_threshold)].push_back(i);
  DisjointSets sets(n);
  const double t2 = dist_threshold * dist_threshold;
  for (std::size_t i = 0; i < n; ++i) {
    const CellKey c = cell_of(points[i], dist_threshold);
    for (std::int64_t dx = -1; dx <= 1; ++dx) {
      for (std::int64_t dy = -1; dy <= 1; ++dy) {
        for (std::int64_t dz = -1; dz <= 1; ++dz) {
          const auto it = grid.find({c.x + dx, c.y + dy, c.z + dz});
          if (it == grid.end()) continue;
          for (std::size_t j : it->second) {
            if (j > i && (points[i] - points[j]).squaredNorm() <= t2) sets.unite(i, j);
          }
        }
      }
    }
  }
  std::vector<int> labels(n, -1);
  std::unordered_map<std::size_t, int> root_label;
  for (std::size_t i = 0; i < n; ++i) {
    const auto [it, fresh] = root_label.try_emplace(sets.find(i), static_cast<int>(root_label.size()));
    labels[i] = it->second;
  }
  return labels;
}

std::vector<Cluster> cluster_cloud(const PointCloud& cloud, const ClusterParams& params) {
  std::vector<Point3> above;
  for (const Point3& p : cloud.points) {
    if (p.z() >= params.ground_z) above.push_back(p);
  }
  const std::vector<int> labels = cluster_labels(above, params.dist_threshold);
  const int count = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
  std::vector<Cluster> clusters(static_cast<std::size_t>(count));
  for (std::size_t i = 0; i < above.size(); ++i) {
    clusters[static_cast<std::size_t>(labels[i])].points.push_back(above[i]);
  }
  for (Cluster& c : clusters) {
    try {
      c.footprint = footprint(c.points);
    } catch (const DegenerateInput&) {
    }
  }
  return clusters;
}

std::optional<Primitive> ransac_fit(const std::vector<Point3>& points, ShapeKind shape,
                                    const RansacParams& params) {
  if (!(params.inlier_tol > 0.0) || params.max_iters <= 0) {
    throw Error("RANSAC tolerances must be positive");
  }
  const std::size_t sample = shape == ShapeKind::Sphere ? 4 : 3;
  if (points.size() < std::max(sample, params.min_inliers)) return std::nullopt;
  switch (shape) {
    case ShapeKind::Plane:
      return fit_plane(points, params);
    case ShapeKind::Cylinder:
      return fit_cylinder(points, params);
    case ShapeKind::Sphere:
      return fit_sphere(points, params);
  }
  return std::nullopt;
}

std::vector<Primitive> extract_primitives(const Cluster& cluster, const ExtractParams& params) {
  if (cluster.points.empty()) throw EmptyCluster("cluster has no points");
  const std::size_t total = cluster.points.size();
  std::vector<std::size_t> remaining(total);
  std::iota(remaining.begin(), remaining.end(), 0);
  std::vector<Primitive> out;
  constexpr ShapeKind kOrder[] = {ShapeKind::Plane, ShapeKind::Cylinder, ShapeKind::Sphere};
  for (std::uint64_t round = 0; !remaining.empty(); ++round) {
    if (static_cast<double>(remaining.size()) < params.stop_fraction * static_cast<double>(total)) break;
    std::vector<Point3> subset;
    subset.reserve(remaining.size());
    for (std::size_t i : remaining) subset.push_back(cluster.points[i]);

    std::optional<Primitive> best;
    for (std::size_t k = 0; k < 3; ++k) {
      RansacParams rp = params.ransac;
      rp.seed = params.ransac.seed + 3 * round + k;
      auto fit = ransac_fit(subset, kOrder[k], rp);
      // Strictly more support replaces, so ties keep the earlier shape.
      if (fit && (!best || fit->inliers.size() > best->inliers.size())) best = std::move(fit);
    }
    if (!best) break;

    std::vector<bool> taken(subset.size(), false);
    for (std::size_t& i : best->inliers) {
      taken[i] = true;
      i = remaining[i];
    }
    std::vector<std::size_t> next;
    for (std::size_t k = 0; k < subset.size(); ++k) {
      if (!taken[k]) next.push_back(remaining[k]);
    }
    remaining = std::move(next);
    out.push_back(std::move(*best));
  }
  return out;
}

Polygon footprint(const std::vector<Point3>& points) {
  std::vector<Vec2> flat;
  flat.reserve(points.size());
  for (const Point3& p : points) flat.push_back({p.x(), p.y()});
  return convex_hull(flat);
}

PointCloud voxel_downsample(const PointCloud& cloud, double leaf) {
  if (!(leaf > 0.0)) throw Error("voxel leaf must be positive");
  struct Acc {
    Point3 sum = Point3::Zero();
    std::size_t n = 0;
    std::size_t order = 0;
  };
  std::unordered_map<CellKey, Acc, CellHash> voxels;
  for (const Point3& p : cloud.points) {
    auto [it, fresh] = voxels.try_emplace(cell_of(p, leaf));
    if (fresh) it->second.order = voxels.size() - 1;
    it->second.sum += p;
    ++it->second.n;
  }
  PointCloud out;
  out.sensor_pose = cloud.sensor_pose;
  out.sensor_height = cloud.sensor_height;
  out.points.resize(voxels.size());
  for (const auto& [key, acc] : voxels) out.points[acc.order] = acc.sum / static_cast<double>(acc.n);
  return out;
}

PointCloud read_cloud(std::istream& in) {
  PointCloud cloud;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    const char* begin = line.c_str();
    const char* cur = begin;
    double v[3];
    int found = 0;
    while (true) {
      while (*cur == ' ' || *cur == '\t' || *cur == '\r') ++cur;
      if (*cur == '\0') break;
      const int column = static_cast<int>(cur - begin) + 1;
      if (found == 3) parse_fail("expected 3 coordinates", line_no, column);
      char* end = nullptr;
      v[found] = std::strtod(cur, &end);
      if (end == cur || (*end != '\0' && *end != ' ' && *end != '\t' && *end != '\r')) {
        parse_fail("malformed number", line_no, column);
      }
      if (!std::isfinite(v[found])) parse_fail("non-finite coordinate", line_no, column);
      ++found;
      cur = end;
    }
    if (found == 0) continue;
    if (found != 3) parse_fail("expected 3 coordinates", line_no, static_cast<int>(cur - begin) + 1);
    cloud.points.emplace_back(v[0], v[1], v[2]);
  }
  return cloud;
}

PointCloud load_cloud(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return read_cloud(in);
}

void write_cloud(std::ostream& out, const PointCloud& cloud) {
  char buf[96];
  for (const Point3& p : cloud.points) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g\n", p.x(), p.y(), p.z());
    out << buf;
  }
}

void save_cloud(const std::string& path, const PointCloud& cloud) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  write_cloud(out, cloud);
  if (!out) throw IoError("write failed for " + path);
}

}  // namespace namo::perception
