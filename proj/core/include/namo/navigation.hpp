#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "namo/affordance.hpp"
#include "namo/cito.hpp"
#include "namo/dynamics.hpp"
#include "namo/geometry.hpp"
#include "namo/grid.hpp"
#include "namo/perception.hpp"
#include "namo/world.hpp"

namespace namo::nav {

// Static obstacles of the world rasterized over its extent.
OccupancyGrid build_global_map(const World& world, double resolution);

// Global map plus the footprint of every unknown object whose centre is
// within sensing_radius of the robot.
OccupancyGrid get_local_map(const OccupancyGrid& global, const World& world, Vec2 robot,
                            double sensing_radius);

struct CollisionHit {
  std::size_t index = 0;  // waypoint index
  Vec2 point;
};

// First waypoint at or after `from` with an occupied cell centre within radius.
std::optional<CollisionHit> check_collision(const OccupancyGrid& local, const GridPath& path, double radius,
                                            std::size_t from = 0);

// Index of the first primitive of psi that explains a blockage at o, if any.
// Planes that are not vertical within vertical_tol are skipped.
std::optional<std::size_t> filter_primitive(const std::vector<perception::Primitive>& psi, Vec2 o, double r,
                                            double vertical_tol = 10.0 * std::numbers::pi / 180.0);

struct BlockReport {
  Vec2 o;
  std::size_t path_index = 0;
  std::optional<perception::Primitive> blocking_primitive;
  affordance::AffordanceObstacle obstacle;
};

struct LiftParams {
  double search_radius = 3.0;  // m around the object's current centre
  int angles = 32;             // candidates per ring
  double clearance = 0.02;     // to statics, other objects and the robot
};

// Moves the object to the nearest placement that leaves the remaining path
// (waypoints from `from`) clear at the given radius. Returns the new pose.
// Throws NoPlacementFound.
Pose2 clear_obstacle_lift(World& world, std::size_t object_id, const OccupancyGrid& global,
                          const GridPath& path, std::size_t from, double radius, Vec2 robot,
                          double robot_radius, const LiftParams& params = {});

struct Rect {
  Vec2 min;
  Vec2 max;
  bool contains(Vec2 p, double margin = 0.0) const {
    return p.x >= min.x + margin && p.x <= max.x - margin && p.y >= min.y + margin && p.y <= max.y - margin;
  }
  bool operator==(const Rect&) const = default;
};

struct PushParams {
  int N = 20;
  double dt = 0.5;
  double w1 = 2.5e3;
  double w2 = 1e-4;
  double w3 = 7.0;
  double v_max = 2.0;
  double w_max = 2.0;
  double goal_offset = 3.0;      // push goal distance beyond o, in robot radii
  double goal_tolerance = 0.2;   // m
  double settle_time = 2.0;      // s of idle simulation after the controls run out
  double corridor_grow = 1.5;    // m per side when no scene corridor fits
  std::vector<Rect> corridors;   // scene-supplied, tried in order
  bool idle_init = false;
  cito::ScvxSettings scvx;
};

enum class PushStatus { Success, NoCorridor, NotConverged, Diverged };

const char* to_string(PushStatus s);

struct PushOutcome {
  PushStatus status = PushStatus::Success;
  std::string detail;
  Vec2 goal;
  std::size_t goal_index = 0;
  Rect corridor;
  std::vector<std::size_t> object_ids;  // world indices in state order
  cito::CitoProblem problem;
  cito::CitoSolution solution;
  std::vector<dynamics::WorldState> executed;  // control steps then settling
  double cito_seconds = 0.0;                   // wall clock in the solver
  double execution_seconds = 0.0;              // wall clock spent stepping
};

// Waypoint index of the push goal: the first one at least `offset` metres
// past o along the path, or the last waypoint.
std::size_t push_goal_index(const GridPath& path, std::size_t block_index, double offset);

// Builds and solves the pushing problem and executes it with contact forces
// only. The world is updated with the executed final state unless the
// solver fails before execution.
PushOutcome execute_push(World& world, Pose2& robot, std::size_t object_id, const OccupancyGrid& global,
                         const GridPath& path, std::size_t block_index, double robot_radius,
                         const dynamics::PhysicsParams& physics, const PushParams& params);

// Same as execute_push but throws CitoNotConverged or ExecutionDiverged.
PushOutcome clear_obstacle_push(World& world, Pose2& robot, std::size_t object_id, const OccupancyGrid& global,
                                const GridPath& path, std::size_t block_index, double robot_radius,
                                const dynamics::PhysicsParams& physics, const PushParams& params);

enum class EventKind { Block, ProbeLift, ProbePush, Cito, Lift, Push, AddStatic, Replan, Goal };

const char* to_string(EventKind kind);

struct NavEvent {
  EventKind kind = EventKind::Block;
  double time = 0.0;  // simulated seconds
  std::size_t step = 0;
  Vec2 where;
  std::optional<std::size_t> object;
  bool success = true;
  int iterations = 0;  // Cito only
  double cost = 0.0;   // Cito only
  std::string detail;
};

struct Frame {
  double time = 0.0;
  Pose2 robot;
  std::vector<Pose2> objects;
  std::size_t path_id = 0;     // index into NavReport::paths
  std::size_t static_count = 0;  // added statics visible in this frame
};

struct PhaseTimes {
  double affordance = 0.0;  // s wall clock
  double cito = 0.0;
  double execution = 0.0;
};

struct NavReport {
  bool success = false;
  std::string failure;  // error name and message when success is false
  std::vector<NavEvent> events;
  std::vector<Frame> frames;
  std::vector<GridPath> paths;
  std::vector<Polygon> added_statics;
  std::vector<PushOutcome> pushes;
  std::vector<BlockReport> blocks;
  OccupancyGrid final_global;
  World final_world;
  Pose2 final_pose;
  int replans = 0;
  std::size_t steps = 0;
  double sim_time = 0.0;
  PhaseTimes times;

  // Kinds in order, for comparing runs.
  std::vector<EventKind> kinds() const;
};

struct PlannerConfig {
  double resolution = 0.05;
  double robot_radius = 0.25;
  double inflation = 0.30;
  double sensing_radius = 2.0;
  double step_speed = 0.5;      // m/s during path following
  double filter_margin = 0.10;  // added to the inflation radius for primitive filtering
  double voxel_leaf = 0.0;      // 0 disables downsampling
  int max_replans = 10;
  int max_push_attempts = 2;
  std::size_t max_steps = 20000;
  bool use_affordances = true;
  std::uint64_t seed = 0;
  affordance::RobotCapabilities caps;
  perception::SensorParams sensor;
  perception::ClusterParams cluster;
  perception::ExtractParams extract;
  dynamics::PhysicsParams physics;
  LiftParams lift;
  PushParams push;
};

// Runs the decision loop until the goal is reached. Failures are reported in
// the returned NavReport (success = false) with the partial history.
NavReport namo_planner(const World& world, Pose2 start, Vec2 goal, const PlannerConfig& config);

}  // namespace namo::nav
