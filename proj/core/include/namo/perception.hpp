#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <iosfwd>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "namo/geometry.hpp"
#include "namo/world.hpp"

namespace namo::perception {

using Point3 = Eigen::Vector3d;

struct PointCloud {
  std::vector<Point3> points;
  Pose2 sensor_pose;
  double sensor_height = 1.0;

  Point3 sensor_position() const { return {sensor_pose.x, sensor_pose.y, sensor_height}; }
  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
};

enum class ShapeKind { Plane, Cylinder, Sphere };

const char* to_string(ShapeKind kind);

struct Primitive {
  ShapeKind shape = ShapeKind::Plane;
  // Plane: width along the plane, height along its second in-plane axis
  // (vertical for vertical planes). Cylinder: radius and axis length.
  // Sphere: radius.
  double width = 0.0;
  double height = 0.0;
  double radius = 0.0;
  Vec2 normal;                          // ground-plane unit normal, vertical planes only
  Point3 normal3 = Point3::UnitZ();     // full plane normal
  Point3 center = Point3::Zero();
  std::vector<std::size_t> inliers;     // indices into the fitted point set

  bool is_vertical_plane(double tolerance_rad) const;
};

struct Cluster {
  std::vector<Point3> points;
  std::vector<Primitive> primitives;
  std::optional<Polygon> footprint;  // unset when the ground projection is degenerate
};

struct SensorParams {
  double fov = 1.0 * std::numbers::pi;  // horizontal, centred on the robot heading
  double range = 3.0;
  double density = 20000.0;  // points per square metre of visible surface
  double noise_sigma = 0.0;
  double height = 1.0;
};

// Samples the camera-facing surfaces of every unknown object. Occlusion
// between objects is not modelled.
PointCloud synthesize_cloud(const World& world, const Pose2& robot_pose, const SensorParams& sensor,
                            std::uint64_t seed);

struct ClusterParams {
  double dist_threshold = 0.05;
  double ground_z = 0.02;  // points below are floor
};

// Euclidean clustering of the non-ground points. Clusters are ordered by
// their first point in the input.
std::vector<Cluster> cluster_cloud(const PointCloud& cloud, const ClusterParams& params = {});

// Cluster label per point (ground points get -1), same ordering as above.
std::vector<int> cluster_labels(const std::vector<Point3>& points, double dist_threshold);

struct RansacParams {
  double inlier_tol = 0.01;
  std::size_t min_inliers = 50;
  int max_iters = 500;
  std::uint64_t seed = 0;
  double max_radius = 1.0;
  // A plane whose normal is within this angle of horizontal is refitted as
  // an exactly vertical plane.
  double vertical_tol = 10.0 * std::numbers::pi / 180.0;
  std::optional<Point3> viewpoint;  // orients plane normals toward it
};

std::optional<Primitive> ransac_fit(const std::vector<Point3>& points, ShapeKind shape,
                                    const RansacParams& params = {});

struct ExtractParams {
  RansacParams ransac;
  double stop_fraction = 0.1;
};

// Iteratively peels the best-supported primitive off the cluster.
// Throws EmptyCluster.
std::vector<Primitive> extract_primitives(const Cluster& cluster, const ExtractParams& params = {});

// Convex hull of the ground projection. Throws DegenerateInput.
Polygon footprint(const std::vector<Point3>& points);

// Replaces the points of every occupied voxel by their centroid.
PointCloud voxel_downsample(const PointCloud& cloud, double leaf);

// Plain text, one "x y z" per line, '#' starts a comment.
PointCloud read_cloud(std::istream& in);
PointCloud load_cloud(const std::string& path);
void write_cloud(std::ostream& out, const PointCloud& cloud);
void save_cloud(const std::string& path, const PointCloud& cloud);

}  // namespace namo::perception
