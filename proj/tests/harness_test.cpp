#include <gtest/gtest.h>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include "namo/errors.hpp"
#include "namo/harness.hpp"

namespace namo::harness {
namespace {

namespace fs = std::filesystem;

fs::path scene_path(const std::string& name) { return fs::path(NAMO_SOURCE_DIR) / "scenes" / (name + ".scene"); }

SceneSpec parse(const std::string& text) {
  std::istringstream in(text);
  return parse_scene(in);
}

const char* kMinimal =
    "[map]\n"
    "min = 0 0\n"
    "max = 3 2\n"
    "[robot]\n"
    "start = 0.5 0.5 0\n"
    "goal = 2.5 1.5\n";

fs::path temp_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("namo_harness_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

TEST(LoadScene, MinimalSceneGetsDefaults) {
  const SceneSpec s = parse(kMinimal);
  EXPECT_EQ(s.map.resolution, 0.05);
  EXPECT_TRUE(s.map.statics.empty());
  EXPECT_EQ(s.robot.radius, 0.25);
  EXPECT_EQ(s.robot.inflation, 0.30);
  EXPECT_EQ(s.robot.v_max, 2.0);
  EXPECT_EQ(s.robot.w_max, 2.0);
  EXPECT_EQ(s.cito.N, 20);
  EXPECT_EQ(s.cito.dt, 0.5);
  EXPECT_EQ(s.cito.w1, 2.5e3);
  EXPECT_EQ(s.cito.w2, 1e-4);
  EXPECT_EQ(s.cito.w3, 7.0);
  EXPECT_EQ(s.cito.k_max, 30.0);
  EXPECT_EQ(s.capabilities, affordance::RobotCapabilities{});
  EXPECT_EQ(s.planner.max_replans, 10);
  EXPECT_TRUE(s.planner.use_affordances);
  EXPECT_EQ(s.seed, 0u);
}

TEST(LoadScene, GoalInsideStaticObstacle) {
  const std::string text = std::string(kMinimal) + "[static]\nrect = 2 1 3 2\n";
  try {
    parse(text);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.field(), "goal");
  }
}

TEST(LoadScene, StartNextToWallIsRejected) {
  const std::string text = std::string(kMinimal) + "[static]\nrect = 0 0 0.3 2\n";
  try {
    parse(text);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.field(), "start");
  }
}

TEST(LoadScene, ObjectOutsideMap) {
  const std::string text = std::string(kMinimal) +
                           "[object]\nshape = box\npose = 2.9 1 0\nsize = 0.4 0.4\nheight = 0.4\n";
  try {
    parse(text);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.field(), "objects[0].pose");
  }
}

TEST(LoadScene, HorizonLimit) {
  EXPECT_NO_THROW(parse(std::string(kMinimal) + "[cito]\nN = 120\ndt = 0.5\n"));
  try {
    parse(std::string(kMinimal) + "[cito]\nN = 121\ndt = 0.5\n");
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.field(), "cito.N");
  }
}

TEST(LoadScene, CapabilityOverridesAreValidated) {
  EXPECT_EQ(parse(std::string(kMinimal) + "[capabilities]\nf_lift = 10\n").capabilities.f_lift, 10.0);
  EXPECT_THROW(parse(std::string(kMinimal) + "[capabilities]\nf_push = 0\n"), ValidationError);
}

struct BadInput {
  std::string text;
  int line;
  int column;
};

TEST(LoadScene, ParseErrorsCarryLineAndColumn) {
  const std::vector<BadInput> cases = {
      {"[map]\nmin = 0 0\nmax = 3 x2\n", 3, 9},
      {"[map]\n  colour = red\n", 2, 3},
      {"[mapp]\n", 1, 1},
      {"[map]\nmin = 0\n", 2, 8},
      {"[map]\nmin = 0 0 0\n", 2, 11},
      {"seed = -1\n", 1, 8},
      {"[robot]\nstart 0 0 0\n", 2, 1},
      {"[object]\nshape = cube\n", 2, 9},
      {"[static]\nrect = 1 1 0 0\n", 2, 12},
      {"[static]\npolygon = 0 0 0 1 1 0\n", 2, 11},
      {"[static]\npolygon = 0 0 1 0 1\n", 2, 19},
      {"[planner]\nuse_affordances = maybe\n", 2, 19},
      {"[map\n", 1, 4},
  };
  for (const BadInput& c : cases) {
    try {
      parse(c.text);
      ADD_FAILURE() << "no ParseError for:\n" << c.text;
    } catch (const ParseError& e) {
      EXPECT_EQ(e.line(), c.line) << c.text;
      EXPECT_EQ(e.column(), c.column) << c.text << e.what();
    }
  }
}

TEST(LoadScene, CommentsAndBlankLinesAreIgnored) {
  const SceneSpec s = parse(
      "# header\n\nseed = 7   # trailing\n[map]\n  min = 0 0\nmax = 3 2 # m\n[robot]\nstart = 0.5 0.5 0\n"
      "goal = 2.5 1.5\n");
  EXPECT_EQ(s.seed, 7u);
}

TEST(LoadScene, MissingFileIsIoError) { EXPECT_THROW(load_scene("/nonexistent/none.scene"), IoError); }

TEST(LoadScene, BundledScenesAreValid) {
  for (const char* name : {"task1", "task2", "push"}) {
    SceneSpec s;
    ASSERT_NO_THROW(s = load_scene(scene_path(name))) << name;
    EXPECT_EQ(s.name, name);
  }
}

TEST(SaveScene, BundledScenesRoundTrip) {
  const fs::path dir = temp_dir("roundtrip");
  for (const char* name : {"task1", "task2", "push"}) {
    const SceneSpec s = load_scene(scene_path(name));
    const fs::path copy = dir / (std::string(name) + ".scene");
    save_scene(copy, s);
    EXPECT_EQ(load_scene(copy), s) << name;
  }
}

TEST(SaveScene, RandomScenesRoundTripExactly) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const SceneSpec base = load_scene(scene_path("task1"));
  for (int trial = 0; trial < 200; ++trial) {
    SceneSpec s = base;
    s.seed = rng();
    s.robot.goal.x += 0.1 * u(rng);
    s.robot.start.theta = 6.0 * u(rng) - 3.0;
    s.robot.v_max = 0.5 + 3.0 * u(rng);
    s.capabilities.f_lift = 1.0 + 1e-7 * u(rng);
    s.capabilities.perp_tol = u(rng);
    s.cito.w2 = 1e-9 * u(rng);
    s.cito.dt = 0.1 + u(rng) / 3.0;
    s.cito.idle_init = trial % 2 == 0;
    if (trial % 3 == 0) s.cito.goal = Vec2{u(rng), u(rng)};
    for (UnknownObject& o : s.objects) {
      o.mass = 0.1 + 10.0 * u(rng);
      o.mu_s = u(rng);
      o.mu_v = u(rng) * 1e-3;
      o.pose.theta = u(rng);
    }
    const double a = u(rng);
    s.map.statics.push_back(Polygon({{4.5 + a, 2.0}, {5.5, 2.0 + 1e-3 * a}, {5.0, 3.0 - a / 3.0}}));
    std::ostringstream out;
    write_scene(out, s);
    std::istringstream in(out.str());
    ASSERT_EQ(parse_scene(in), s) << "trial " << trial << "\n" << out.str();
  }
}

TEST(Run, EmptySceneHasNoAffordanceWork) {
  const RunReport r = run(parse(kMinimal));
  ASSERT_TRUE(r.success) << r.nav.failure;
  EXPECT_EQ(r.affordance_seconds, 0.0);
  EXPECT_EQ(r.cito_seconds, 0.0);
  EXPECT_GE(r.execution_seconds, 0.0);
  EXPECT_GE(r.total_seconds, 0.0);
  EXPECT_EQ(r.nav.kinds(), std::vector<nav::EventKind>{nav::EventKind::Goal});
  EXPECT_NEAR(r.final_pose.x, 2.5, 1e-9);
  EXPECT_NEAR(r.final_pose.y, 1.5, 1e-9);
}

TEST(Run, Task1PushesThenLifts) {
  const SceneSpec s = load_scene(scene_path("task1"));
  const RunReport r = run(s);
  ASSERT_TRUE(r.success) << r.nav.failure;
  using K = nav::EventKind;
  const std::vector<K> expected{K::Block, K::ProbePush, K::Cito,      K::Push,
                                K::Block, K::ProbeLift, K::Lift,      K::Goal};
  EXPECT_EQ(r.nav.kinds(), expected);
  EXPECT_EQ(static_overlaps(s, r.nav), 0u);
  EXPECT_GT(r.affordance_seconds, 0.0);
  EXPECT_GT(r.cito_seconds, 0.0);
  EXPECT_GT(r.execution_seconds, 0.0);
}

TEST(Run, Task2DetoursAroundTheBottle) {
  const SceneSpec s = load_scene(scene_path("task2"));
  const RunReport r = run(s);
  ASSERT_TRUE(r.success) << r.nav.failure;
  using K = nav::EventKind;
  const std::vector<K> expected{K::Block, K::ProbeLift, K::ProbePush, K::AddStatic, K::Replan, K::Goal};
  EXPECT_EQ(r.nav.kinds(), expected);
  EXPECT_EQ(static_overlaps(s, r.nav), 0u);
  EXPECT_EQ(r.cito_seconds, 0.0);
}

TEST(Run, DeterministicForFixedSeed) {
  for (const char* name : {"task1", "task2"}) {
    const SceneSpec s = load_scene(scene_path(name));
    const RunReport a = run(s);
    const RunReport b = run(s);
    EXPECT_EQ(a.nav.kinds(), b.nav.kinds()) << name;
    EXPECT_EQ(a.final_pose, b.final_pose) << name;
    EXPECT_EQ(event_records(a.nav), event_records(b.nav)) << name;
    EXPECT_EQ(a.nav.final_world, b.nav.final_world) << name;
  }
}

TEST(Run, StaticOverlapCheckFlagsBadFrames) {
  const SceneSpec s = load_scene(scene_path("task2"));
  nav::NavReport report;
  nav::Frame f;
  f.robot = {0.8, 2.0, 0.0};
  report.frames.push_back(f);
  f.robot = {3.0, 3.0, 0.0};  // inside the dividing wall
  report.frames.push_back(f);
  f.robot = {0.2, 2.0, 0.0};  // wall within the robot radius
  report.frames.push_back(f);
  f.robot = {0.36, 2.0, 0.0};  // 1 cm clear of the outer wall
  report.frames.push_back(f);
  EXPECT_EQ(static_overlaps(s, report), 2u);
}

TEST(PlanGlobal, Task2ShortestRouteUsesTheDirectDoorway) {
  const nav::GridPath p = plan_global(load_scene(scene_path("task2")));
  EXPECT_NEAR(p.cost, 4.4, 1e-9);
}

TEST(SolveCito, PushSceneReachesGoal) {
  const CitoRun r = solve_cito(load_scene(scene_path("push")));
  EXPECT_TRUE(r.solution.converged);
  EXPECT_LE(r.goal_error, 0.2);
  EXPECT_EQ(r.problem.N, 20);
  EXPECT_EQ(r.problem.model.num_objects(), 1u);
  EXPECT_THROW(solve_cito(parse(kMinimal)), ValidationError);
}

nav::NavReport synthetic_history(std::size_t frames) {
  nav::NavReport r;
  nav::GridPath path;
  path.points = {{0.5, 0.5}, {1.5, 1.0}, {2.5, 1.5}};
  path.cells.resize(3);
  r.paths.push_back(path);
  for (std::size_t i = 0; i < frames; ++i) {
    nav::Frame f;
    f.time = 0.5 * static_cast<double>(i);
    f.robot = {0.5 + 0.01 * static_cast<double>(i), 0.5, 0.1};
    f.objects = {{1.5, 1.0, 0.2}};
    r.frames.push_back(f);
  }
  return r;
}

SceneSpec svg_scene() {
  SceneSpec s = parse(std::string(kMinimal) +
                      "[static]\nrect = 1 1.6 2 2\n[object]\nshape = box\npose = 1.5 1 0\nsize = 0.3 0.3\nheight = 0.3\n");
  s.name = "a<b>&c";
  return s;
}

TEST(EmitSvg, SingleStateGivesOneFile) {
  const fs::path dir = temp_dir("svg1");
  EXPECT_EQ(emit_svg(svg_scene(), synthetic_history(1), dir, 5).size(), 1u);
}

TEST(EmitSvg, FileCountFollowsStride) {
  for (std::size_t n : {1u, 4u, 5u, 20u}) {
    for (int stride : {1, 3, 5}) {
      const fs::path dir = temp_dir("svg_count");
      const auto files = emit_svg(svg_scene(), synthetic_history(n + 1), dir, stride);
      EXPECT_EQ(files.size(), (n + 1 + static_cast<std::size_t>(stride) - 1) / static_cast<std::size_t>(stride));
      for (const auto& f : files) EXPECT_TRUE(fs::exists(f));
    }
  }
  EXPECT_THROW(emit_svg(svg_scene(), synthetic_history(3), temp_dir("svg0"), 0), IoError);
  EXPECT_THROW(emit_svg(svg_scene(), synthetic_history(0), temp_dir("svg0"), 1), IoError);
}

TEST(EmitSvg, WellFormedXmlWithSceneLayers) {
  const fs::path dir = temp_dir("svg_xml");
  const auto files = emit_svg(svg_scene(), synthetic_history(3), dir, 1);
  for (const auto& f : files) {
    boost::property_tree::ptree tree;
    ASSERT_NO_THROW(boost::property_tree::read_xml(f.string(), tree)) << f;
    const auto& svg = tree.get_child("svg");
    std::map<std::string, int> fills;
    int circles = 0, polylines = 0;
    for (const auto& [tag, node] : svg) {
      if (tag == "polygon") fills[node.get<std::string>("<xmlattr>.fill")]++;
      if (tag == "circle") ++circles;
      if (tag == "polyline") ++polylines;
    }
    EXPECT_EQ(fills["gray"], 1);
    EXPECT_EQ(fills["red"], 1);
    EXPECT_EQ(circles, 2);
    EXPECT_GE(polylines, 1);
  }
}

TEST(EmitSvg, UnwritableDirectoryIsIoError) {
  const fs::path blocker = temp_dir("svg_block") / "file";
  std::ofstream(blocker) << "x";
  EXPECT_THROW(emit_svg(svg_scene(), synthetic_history(1), blocker / "sub", 1), IoError);
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

std::map<std::string, std::string> fields_of(const std::string& record) {
  std::map<std::string, std::string> out;
  std::istringstream in(record);
  std::string tok;
  in >> tok;
  while (in >> tok) {
    const auto eq = tok.find('=');
    if (eq != std::string::npos) out[tok.substr(0, eq)] = tok.substr(eq + 1);
  }
  return out;
}

TEST(EmitReport, ZeroEventRun) {
  RunReport r;
  r.success = true;
  const auto rows = lines_of(emit_report({r}, ReportFormat::Text));
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0], "Run | Affordance | CITO | Execution | Total");
  EXPECT_EQ(rows[1], "1 | 0.000000 | 0.000000 | 0.000000 | 0.000000");
}

TEST(EmitReport, TextAndRecordsCarryTheSameValues) {
  std::vector<RunReport> runs(3);
  for (std::size_t i = 0; i < runs.size(); ++i) {
    runs[i].success = true;
    runs[i].affordance_seconds = 0.1234567 * static_cast<double>(i + 1);
    runs[i].cito_seconds = 1.5 + static_cast<double>(i);
    runs[i].execution_seconds = 0.01;
    runs[i].total_seconds = 3.25 * static_cast<double>(i + 1);
    runs[i].nav.events.push_back({nav::EventKind::Goal, 1.0, 2, {1.0, 2.0}, std::nullopt, true, 0, 0.0, ""});
  }
  const auto rows = lines_of(emit_report(runs, ReportFormat::Text));
  ASSERT_EQ(rows.size(), 4u);
  std::vector<std::map<std::string, std::string>> records;
  for (const std::string& l : lines_of(emit_report(runs, ReportFormat::Records))) {
    if (l.rfind("run ", 0) == 0) records.push_back(fields_of(l));
  }
  ASSERT_EQ(records.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    std::istringstream row(rows[i + 1]);
    std::string run, bar, aff, cito, exec, total;
    row >> run >> bar >> aff >> bar >> cito >> bar >> exec >> bar >> total;
    EXPECT_EQ(run, std::to_string(i + 1));
    EXPECT_EQ(records[i]["affordance"], aff);
    EXPECT_EQ(records[i]["cito"], cito);
    EXPECT_EQ(records[i]["execution"], exec);
    EXPECT_EQ(records[i]["total"], total);
  }
}

TEST(EmitReport, EventRecordsListEveryEvent) {
  const RunReport r = run(load_scene(scene_path("task2")));
  const auto lines = lines_of(event_records(r.nav));
  ASSERT_EQ(lines.size(), r.nav.events.size());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    EXPECT_EQ(fields_of(lines[i])["kind"], nav::to_string(r.nav.events[i].kind));
  }
  EXPECT_EQ(fields_of(lines[1])["success"], "0");
}

}  // namespace
}  // namespace namo::harness
