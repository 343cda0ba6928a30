#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "namo/geometry.hpp"
#include "namo/perception.hpp"
#include "namo/world.hpp"

namespace namo::affordance {

inline constexpr double kGravity = 9.81;

// Thresholds of the rule table. Lengths in metres, c4 in square metres.
struct RobotCapabilities {
  double c1 = 0.05;  // cylinder lift: radius
  double c2 = 0.6;   // cylinder push: radius
  double c3 = 0.12;  // plane lift: width
  double c4 = 0.5;   // plane push: width * height
  double c5 = 0.12;  // sphere lift: radius
  double c6 = 0.4;   // sphere push: radius
  double f_lift = 20.0;  // N
  double f_push = 25.0;  // N
  double perp_tol = 10.0 * std::numbers::pi / 180.0;

  // Throws ValidationError naming the first non-positive field.
  void validate() const;

  bool operator==(const RobotCapabilities&) const = default;
};

enum class AffordanceKind { Lift, Push };
enum class Movability { Unknown, Liftable, Pushable, Unmovable };

const char* to_string(AffordanceKind kind);
const char* to_string(Movability m);

struct AffordanceHypothesis {
  AffordanceKind kind = AffordanceKind::Lift;
  std::size_t primitive_id = 0;
  int rank = 0;  // 0 is tried first
};

struct AffordanceObstacle {
  Polygon footprint;
  std::vector<perception::Primitive> primitives;
  std::vector<AffordanceHypothesis> hypotheses;  // sorted by rank
  Movability movability = Movability::Unknown;
  std::optional<std::size_t> object_id;  // index into World::objects
  int lift_probes = 0;
  int push_probes = 0;

  bool has(AffordanceKind kind) const;
};

// Rule table for a single primitive. primitive_id is left at 0.
std::vector<AffordanceHypothesis> hypothesize(const perception::Primitive& p, const RobotCapabilities& caps);

// Collects every primitive's hypotheses and ranks all lifts before all pushes.
AffordanceObstacle make_obstacle(const Polygon& footprint, std::vector<perception::Primitive> primitives,
                                 std::optional<std::size_t> object_id, const RobotCapabilities& caps);

double lift_resistance(const UnknownObject& o);
double push_resistance(const UnknownObject& o);

// Simulated wrench probes against the true object. Each call counts as one
// probe; a probe never moves the object. Throw NoLiftHypothesis /
// NoPushHypothesis, or Error when the obstacle is not bound to an object.
bool validate_lift(AffordanceObstacle& obs, const World& world, const RobotCapabilities& caps);
bool validate_push(AffordanceObstacle& obs, const World& world, const RobotCapabilities& caps);

// Tries hypotheses in rank order. One probe per kind is enough because the
// outcome is shared by every primitive of the obstacle.
Movability assess(AffordanceObstacle& obs, const World& world, const RobotCapabilities& caps);

}  // namespace namo::affordance
