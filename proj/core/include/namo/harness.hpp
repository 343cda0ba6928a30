#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "namo/affordance.hpp"
#include "namo/cito.hpp"
#include "namo/navigation.hpp"
#include "namo/world.hpp"

namespace namo::harness {

struct MapSpec {
  Vec2 min;
  Vec2 max;
  double resolution = 0.05;  // m
  std::vector<Polygon> statics;

  bool operator==(const MapSpec&) const = default;
};

struct RobotSpec {
  Pose2 start;
  Vec2 goal;
  double radius = 0.25;          // m
  double inflation = 0.30;       // m
  double v_max = 2.0;            // m/s
  double w_max = 2.0;            // rad/s
  double sensing_radius = 2.0;   // m
  double step_speed = 0.5;       // m/s

  bool operator==(const RobotSpec&) const = default;
};

struct CitoSpec {
  int N = 20;
  double dt = 0.5;  // s
  double w1 = 2.5e3;
  double w2 = 1e-4;
  double w3 = 7.0;
  double alpha = 25.0;  // 1/m
  double k_max = 30.0;
  double goal_tolerance = 0.2;  // m
  bool idle_init = false;
  int max_iters = 100;
  std::vector<nav::Rect> corridors;
  std::optional<Vec2> goal;  // standalone solve only; defaults to the robot goal

  bool operator==(const CitoSpec&) const = default;
};

struct PlannerSpec {
  int max_replans = 10;
  int max_push_attempts = 2;
  bool use_affordances = true;
  double filter_margin = 0.10;  // m

  bool operator==(const PlannerSpec&) const = default;
};

struct SceneSpec {
  std::string name;
  std::uint64_t seed = 0;
  MapSpec map;
  RobotSpec robot;
  std::vector<UnknownObject> objects;
  affordance::RobotCapabilities capabilities;
  CitoSpec cito;
  PlannerSpec planner;

  World world() const;
  nav::PlannerConfig planner_config() const;

  bool operator==(const SceneSpec&) const = default;
};

// Throws ParseError or ValidationError.
SceneSpec parse_scene(std::istream& in);
// Throws IoError, ParseError or ValidationError.
SceneSpec load_scene(const std::filesystem::path& path);

// Throws ValidationError naming the first offending field.
void validate(const SceneSpec& scene);

// Lossless: parse_scene(write_scene(s)) == s.
void write_scene(std::ostream& out, const SceneSpec& scene);
void save_scene(const std::filesystem::path& path, const SceneSpec& scene);

struct RunReport {
  std::string scene;
  std::uint64_t seed = 0;
  bool success = false;
  nav::NavReport nav;
  double affordance_seconds = 0.0;
  double cito_seconds = 0.0;
  double execution_seconds = 0.0;
  double total_seconds = 0.0;  // wall clock of the whole run
  Pose2 final_pose;
};

RunReport run(const SceneSpec& scene);

// Global A* path on the inflated static map only. Throws NoPath or OutOfBounds.
nav::GridPath plan_global(const SceneSpec& scene);

struct CitoRun {
  cito::CitoProblem problem;
  cito::CitoSolution solution;
  std::vector<dynamics::WorldState> executed;  // open loop, contact forces only
  double goal_error = 0.0;                     // m, executed final base to goal
  double seconds = 0.0;
};

// Solves one pushing problem from the scene: robot at start, every object
// inside the first corridor, goal from [cito] or the robot goal.
// Throws ValidationError when the scene has no corridor.
CitoRun solve_cito(const SceneSpec& scene);

// Number of recorded frames in which the robot disc penetrates a static
// polygon or its centre leaves the map.
std::size_t static_overlaps(const SceneSpec& scene, const nav::NavReport& report);

// One SVG per stride-th frame, named frame_NNNNN.svg. Throws IoError.
std::vector<std::filesystem::path> emit_svg(const SceneSpec& scene, const nav::NavReport& report,
                                            const std::filesystem::path& out_dir, int stride = 1);
std::string render_svg(const SceneSpec& scene, const nav::NavReport& report, std::size_t frame);

enum class ReportFormat { Text, Records };

// Text is a table with one row per run; records are key=value lines with
// the same values followed by the event log of each run.
std::string emit_report(const std::vector<RunReport>& runs, ReportFormat format);
std::string event_records(const nav::NavReport& report);

}  // namespace namo::harness
