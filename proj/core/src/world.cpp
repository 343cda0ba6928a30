#include "namo/world.hpp"

namespace namo {

namespace {
constexpr int kRoundSides = 16;
}

const char* to_string(BodyShape shape) {
  switch (shape) {
    case BodyShape::Box:
      return "box";
    case BodyShape::Cylinder:
      return "cylinder";
    case BodyShape::Sphere:
      return "sphere";
  }
  return "?";
}

Polygon UnknownObject::body_footprint() const {
  if (shape == BodyShape::Box) return Polygon::box(size_x, size_y);
  return Polygon::regular({0.0, 0.0}, radius, kRoundSides);
}

double UnknownObject::top() const { return shape == BodyShape::Sphere ? 2.0 * radius : height; }

dynamics::ObjectProps UnknownObject::props() const {
  dynamics::ObjectProps p;
  p.mass = mass;
  p.mu_s = mu_s;
  p.mu_v = mu_v;
  p.footprint = body_footprint();
  switch (shape) {
    case BodyShape::Box:
      p.inertia = mass * (size_x * size_x + size_y * size_y) / 12.0;
      break;
    case BodyShape::Cylinder:
      p.inertia = 0.5 * mass * radius * radius;
      break;
    case BodyShape::Sphere:
      p.inertia = 0.4 * mass * radius * radius;
      break;
  }
  return p;
}

}  // namespace namo
