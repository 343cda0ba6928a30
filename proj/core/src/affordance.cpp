#include "namo/affordance.hpp"

#include <algorithm>
#include <cmath>

#include "namo/errors.hpp"

namespace namo::affordance {

using perception::Primitive;
using perception::ShapeKind;

void RobotCapabilities::validate() const {
  const std::pair<const char*, double> fields[] = {{"c1", c1},         {"c2", c2},         {"c3", c3},
                                                   {"c4", c4},         {"c5", c5},         {"c6", c6},
                                                   {"f_lift", f_lift}, {"f_push", f_push}, {"perp_tol", perp_tol}};
  for (const auto& [name, value] : fields) {
    if (!(value > 0.0) || !std::isfinite(value)) throw ValidationError(name, "must be positive");
  }
}

const char* to_string(AffordanceKind kind) { return kind == AffordanceKind::Lift ? "lift" : "push"; }

const char* to_string(Movability m) {
  switch (m) {
    case Movability::Unknown:
      return "unknown";
    case Movability::Liftable:
      return "liftable";
    case Movability::Pushable:
      return "pushable";
    case Movability::Unmovable:
      return "unmovable";
  }
  return "?";
}

bool AffordanceObstacle::has(AffordanceKind kind) const {
  return std::any_of(hypotheses.begin(), hypotheses.end(),
                     [kind](const AffordanceHypothesis& h) { return h.kind == kind; });
}

std::vector<AffordanceHypothesis> hypothesize(const Primitive& p, const RobotCapabilities& caps) {
  bool lift = false, push = false;
  switch (p.shape) {
    case ShapeKind::Cylinder:
      lift = p.radius < caps.c1;
      push = p.radius < caps.c2;
      break;
    case ShapeKind::Plane: {
      // n perpendicular to z: the normal lies within perp_tol of the ground plane.
      const double elevation = std::asin(std::min(1.0, std::abs(p.normal3.z()) / p.normal3.norm()));
      const bool upright = elevation <= caps.perp_tol;
      lift = upright && p.width < caps.c3;
      push = upright && p.width * p.height < caps.c4;
      break;
    }
    case ShapeKind::Sphere:
      lift = p.radius < caps.c5;
      push = p.radius < caps.c6;
      break;
  }
  std::vector<AffordanceHypothesis> out;
  if (lift) out.push_back({AffordanceKind::Lift, 0, 0});
  if (push) out.push_back({AffordanceKind::Push, 0, lift ? 1 : 0});
  return out;
}

AffordanceObstacle make_obstacle(const Polygon& footprint, std::vector<Primitive> primitives,
                                 std::optional<std::size_t> object_id, const RobotCapabilities& caps) {
  AffordanceObstacle obs;
  obs.footprint = footprint;
  obs.object_id = object_id;
  std::vector<AffordanceHypothesis> lifts, pushes;
  for (std::size_t i = 0; i < primitives.size(); ++i) {
    for (AffordanceHypothesis h : hypothesize(primitives[i], caps)) {
      h.primitive_id = i;
      (h.kind == AffordanceKind::Lift ? lifts : pushes).push_back(h);
    }
  }
  obs.primitives = std::move(primitives);
  obs.hypotheses = std::move(lifts);
  obs.hypotheses.insert(obs.hypotheses.end(), pushes.begin(), pushes.end());
  for (std::size_t i = 0; i < obs.hypotheses.size(); ++i) obs.hypotheses[i].rank = static_cast<int>(i);
  return obs;
}

double lift_resistance(const UnknownObject& o) { return o.mass * kGravity; }
double push_resistance(const UnknownObject& o) { return o.mu_s * o.mass * kGravity; }

namespace {

const UnknownObject& bound_object(const AffordanceObstacle& obs, const World& world) {
  if (!obs.object_id || *obs.object_id >= world.objects.size()) {
    throw Error("obstacle is not bound to a world object");
  }
  return world.objects[*obs.object_id];
}

}  // namespace

bool validate_lift(AffordanceObstacle& obs, const World& world, const RobotCapabilities& caps) {
  if (!obs.has(AffordanceKind::Lift)) throw NoLiftHypothesis("obstacle has no lift hypothesis");
  const UnknownObject& o = bound_object(obs, world);
  ++obs.lift_probes;
  const bool ok = lift_resistance(o) < caps.f_lift;
  if (ok) obs.movability = Movability::Liftable;
  return ok;
}

bool validate_push(AffordanceObstacle& obs, const World& world, const RobotCapabilities& caps) {
  if (!obs.has(AffordanceKind::Push)) throw NoPushHypothesis("obstacle has no push hypothesis");
  const UnknownObject& o = bound_object(obs, world);
  ++obs.push_probes;
  const bool ok = push_resistance(o) < caps.f_push;
  if (ok) obs.movability = Movability::Pushable;
  return ok;
}

Movability assess(AffordanceObstacle& obs, const World& world, const RobotCapabilities& caps) {
  if (obs.movability != Movability::Unknown) return obs.movability;
  bool lift_tried = false, push_tried = false;
  for (const AffordanceHypothesis& h : obs.hypotheses) {
    if (h.kind == AffordanceKind::Lift && !lift_tried) {
      lift_tried = true;
      if (validate_lift(obs, world, caps)) return obs.movability;
    } else if (h.kind == AffordanceKind::Push && !push_tried) {
      push_tried = true;
      if (validate_push(obs, world, caps)) return obs.movability;
    }
  }
  obs.movability = Movability::Unmovable;
  return obs.movability;
}

}  // namespace namo::affordance
