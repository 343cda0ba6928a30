#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "namo/affordance.hpp"
#include "namo/errors.hpp"

namespace namo::affordance {
namespace {

using perception::Primitive;
using perception::ShapeKind;

Primitive cylinder(double r) {
  Primitive p;
  p.shape = ShapeKind::Cylinder;
  p.radius = r;
  p.height = 0.2;
  return p;
}

Primitive sphere(double r) {
  Primitive p;
  p.shape = ShapeKind::Sphere;
  p.radius = r;
  return p;
}

Primitive plane(double d, double h, double elevation_deg = 0.0) {
  Primitive p;
  p.shape = ShapeKind::Plane;
  p.width = d;
  p.height = h;
  const double e = elevation_deg * std::numbers::pi / 180.0;
  p.normal3 = perception::Point3(std::cos(e), 0.0, std::sin(e));
  p.normal = {1.0, 0.0};
  return p;
}

std::vector<AffordanceKind> kinds(const std::vector<AffordanceHypothesis>& hs) {
  std::vector<AffordanceKind> out;
  for (const auto& h : hs) out.push_back(h.kind);
  return out;
}

World world_with(double mass, double mu) {
  World w;
  UnknownObject o;
  o.shape = BodyShape::Box;
  o.size_x = o.size_y = o.height = 0.4;
  o.mass = mass;
  o.mu_s = mu;
  w.objects.push_back(o);
  return w;
}

using K = AffordanceKind;

TEST(Hypothesize, ThinCylinderIsLiftThenPush) {
  EXPECT_EQ(kinds(hypothesize(cylinder(0.03), {})), (std::vector<K>{K::Lift, K::Push}));
  EXPECT_EQ(kinds(hypothesize(cylinder(0.3), {})), (std::vector<K>{K::Push}));
  EXPECT_TRUE(hypothesize(cylinder(0.7), {}).empty());
}

TEST(Hypothesize, HorizontalPlaneHasNoAffordance) {
  EXPECT_TRUE(hypothesize(plane(0.05, 0.05, 90.0), {}).empty());
  EXPECT_TRUE(hypothesize(plane(0.05, 0.05, 15.0), {}).empty());
  EXPECT_EQ(hypothesize(plane(0.05, 0.05, 5.0), {}).size(), 2u);
}

TEST(Hypothesize, WidePlaneIsPushOnly) {
  RobotCapabilities caps;
  caps.c3 = 0.3;
  caps.c4 = 0.3;
  EXPECT_EQ(kinds(hypothesize(plane(0.4, 0.5), caps)), (std::vector<K>{K::Push}));
  caps.c4 = 0.2;  // 0.4 * 0.5 is not strictly below
  EXPECT_TRUE(hypothesize(plane(0.4, 0.5), caps).empty());
}

TEST(Hypothesize, SphereThresholds) {
  EXPECT_EQ(kinds(hypothesize(sphere(0.1), {})), (std::vector<K>{K::Lift, K::Push}));
  EXPECT_EQ(kinds(hypothesize(sphere(0.15), {})), (std::vector<K>{K::Push}));
  EXPECT_TRUE(hypothesize(sphere(0.4), {}).empty());
}

TEST(Hypothesize, RuleTableMatchesDirectEvaluation) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const RobotCapabilities caps;
  for (int i = 0; i < 2000; ++i) {
    const double a = u(rng), b = u(rng);
    const int shape = i % 3;
    Primitive p = shape == 0 ? cylinder(a) : shape == 1 ? sphere(0.6 * a) : plane(a, b, 30.0 * u(rng));
    bool lift, push;
    if (shape == 0) {
      lift = a < caps.c1;
      push = a < caps.c2;
    } else if (shape == 1) {
      lift = 0.6 * a < caps.c5;
      push = 0.6 * a < caps.c6;
    } else {
      const double tilt = std::atan2(std::abs(p.normal3.z()), std::hypot(p.normal3.x(), p.normal3.y()));
      lift = tilt <= caps.perp_tol && a < caps.c3;
      push = tilt <= caps.perp_tol && a * b < caps.c4;
    }
    std::vector<K> expect;
    if (lift) expect.push_back(K::Lift);
    if (push) expect.push_back(K::Push);
    EXPECT_EQ(kinds(hypothesize(p, caps)), expect);
  }
}

TEST(Obstacle, LiftsRankBeforePushes) {
  const auto obs =
      make_obstacle(Polygon::box(0.4, 0.4), {plane(0.4, 0.5), cylinder(0.03), sphere(0.3)}, 0, {});
  ASSERT_EQ(obs.hypotheses.size(), 4u);
  EXPECT_EQ(obs.hypotheses[0].kind, K::Lift);
  EXPECT_EQ(obs.hypotheses[0].primitive_id, 1u);
  for (std::size_t i = 1; i < obs.hypotheses.size(); ++i) {
    EXPECT_EQ(obs.hypotheses[i].kind, K::Push);
    EXPECT_EQ(obs.hypotheses[i].rank, static_cast<int>(i));
  }
}

TEST(Validate, LiftArithmetic) {
  RobotCapabilities caps;
  auto obs = make_obstacle(Polygon::box(0.1, 0.1), {cylinder(0.03)}, 0, caps);
  EXPECT_TRUE(validate_lift(obs, world_with(1.0, 0.3), caps));
  EXPECT_FALSE(validate_lift(obs, world_with(5.0, 0.3), caps));
  EXPECT_TRUE(validate_lift(obs, world_with(0.0, 0.3), caps));
  EXPECT_EQ(obs.lift_probes, 3);
  EXPECT_DOUBLE_EQ(lift_resistance(world_with(5.0, 0.3).objects[0]), 49.05);
}

TEST(Validate, PushArithmetic) {
  RobotCapabilities caps;
  caps.f_push = 15.0;
  auto obs = make_obstacle(Polygon::box(0.4, 0.4), {plane(0.4, 0.5)}, 0, caps);
  EXPECT_FALSE(validate_push(obs, world_with(10.0, 0.3), caps));
  EXPECT_TRUE(validate_push(obs, world_with(3.0, 0.3), caps));
  EXPECT_TRUE(validate_push(obs, world_with(1000.0, 0.0), caps));
  EXPECT_NEAR(push_resistance(world_with(10.0, 0.3).objects[0]), 29.43, 1e-12);
}

TEST(Validate, MissingHypothesisThrows) {
  RobotCapabilities caps;
  auto obs = make_obstacle(Polygon::box(0.4, 0.4), {plane(0.4, 0.5)}, 0, caps);
  EXPECT_THROW(validate_lift(obs, world_with(1.0, 0.3), caps), NoLiftHypothesis);
  auto none = make_obstacle(Polygon::box(0.4, 0.4), {}, 0, caps);
  EXPECT_THROW(validate_push(none, world_with(1.0, 0.3), caps), NoPushHypothesis);
}

TEST(Assess, LiftableNeedsOneProbe) {
  RobotCapabilities caps;
  auto obs = make_obstacle(Polygon::box(0.1, 0.1), {cylinder(0.03), cylinder(0.031)}, 0, caps);
  EXPECT_EQ(assess(obs, world_with(1.0, 0.3), caps), Movability::Liftable);
  EXPECT_EQ(obs.lift_probes + obs.push_probes, 1);
}

TEST(Assess, UnliftableLightFrictionIsPushable) {
  RobotCapabilities caps;
  auto obs = make_obstacle(Polygon::box(0.1, 0.1), {cylinder(0.03)}, 0, caps);
  EXPECT_EQ(assess(obs, world_with(3.0, 0.3), caps), Movability::Pushable);
  EXPECT_EQ(obs.lift_probes, 1);
  EXPECT_EQ(obs.push_probes, 1);
}

TEST(Assess, NoHypothesesIsUnmovable) {
  RobotCapabilities caps;
  auto obs = make_obstacle(Polygon::box(1.0, 1.0), {plane(1.0, 1.0)}, 0, caps);
  EXPECT_EQ(assess(obs, world_with(1.0, 0.3), caps), Movability::Unmovable);
  EXPECT_EQ(obs.lift_probes + obs.push_probes, 0);
  auto heavy = make_obstacle(Polygon::box(0.1, 0.1), {cylinder(0.03)}, 0, caps);
  EXPECT_EQ(assess(heavy, world_with(50.0, 0.9), caps), Movability::Unmovable);
}

TEST(Assess, MonotoneInLiftThreshold) {
  const World w = world_with(1.5, 0.3);
  bool was_liftable = false;
  for (double f = 1.0; f < 40.0; f += 0.5) {
    RobotCapabilities caps;
    caps.f_lift = f;
    auto obs = make_obstacle(Polygon::box(0.1, 0.1), {cylinder(0.03)}, 0, caps);
    const bool liftable = assess(obs, w, caps) == Movability::Liftable;
    EXPECT_FALSE(was_liftable && !liftable) << "f_lift " << f;
    was_liftable = liftable;
  }
  EXPECT_TRUE(was_liftable);
}

TEST(Assess, LeavesWorldUntouched) {
  World w = world_with(3.0, 0.3);
  UnknownObject other;
  other.pose = {2.0, 1.0, 0.3};
  w.objects.push_back(other);
  const World before = w;
  RobotCapabilities caps;
  auto obs = make_obstacle(Polygon::box(0.1, 0.1), {cylinder(0.03)}, 0, caps);
  assess(obs, w, caps);
  for (std::size_t i = 0; i < w.objects.size(); ++i) EXPECT_EQ(w.objects[i].pose, before.objects[i].pose);
}

TEST(Capabilities, ValidationNamesField) {
  RobotCapabilities caps;
  EXPECT_NO_THROW(caps.validate());
  caps.c4 = 0.0;
  try {
    caps.validate();
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.field(), "c4");
  }
}

}  // namespace
}  // namespace namo::affordance
