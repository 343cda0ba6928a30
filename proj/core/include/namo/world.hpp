#pragma once

#include <string>
#include <vector>

#include "namo/dynamics.hpp"
#include "namo/geometry.hpp"

namespace namo {

enum class BodyShape { Box, Cylinder, Sphere };

const char* to_string(BodyShape shape);

// A movable object that is absent from the global map. Boxes and cylinders
// stand on the ground; a sphere rests with its centre at z = radius.
struct UnknownObject {
  std::string name;
  BodyShape shape = BodyShape::Box;
  Pose2 pose;
  double size_x = 0.0;  // box only
  double size_y = 0.0;  // box only
  double radius = 0.0;  // cylinder and sphere
  double height = 0.0;  // box and cylinder
  double mass = 1.0;
  double mu_s = 0.5;
  double mu_v = 0.0;

  // Body-frame footprint with the centre of mass at the origin. Round
  // shapes use a circumscribed 16-gon so the polygon covers the object.
  Polygon body_footprint() const;
  Polygon footprint() const { return body_footprint().transformed(pose); }
  double top() const;  // highest point above the ground
  // Planar rigid-body parameters for the dynamics module.
  dynamics::ObjectProps props() const;

  bool operator==(const UnknownObject&) const = default;
};

struct World {
  Vec2 min;  // map extent
  Vec2 max;
  std::vector<Polygon> statics;
  std::vector<UnknownObject> objects;

  bool operator==(const World&) const = default;
};

}  // namespace namo
