#include "namo/harness.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "namo/errors.hpp"

namespace namo::harness {
namespace {

using Clock = std::chrono::steady_clock;
using nav::OccupancyGrid;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Token {
  std::string text;
  int column = 0;  // 1-based
};

struct Line {
  int number = 0;
  Token key;
  std::vector<Token> values;
  int end_column = 0;
};

std::vector<Token> split(const std::string& s, std::size_t from, std::size_t to) {
  std::vector<Token> out;
  std::size_t i = from;
  while (i < to) {
    while (i < to && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    if (i >= to) break;
    const std::size_t start = i;
    while (i < to && !std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    out.push_back({s.substr(start, i - start), static_cast<int>(start) + 1});
  }
  return out;
}

double to_double(const Token& t, int line) {
  double v = 0.0;
  const char* b = t.text.data();
  const char* e = b + t.text.size();
  const auto [p, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || p != e || !std::isfinite(v)) {
    throw ParseError("expected a finite number, got '" + t.text + "'", line, t.column);
  }
  return v;
}

template <class Int>
Int to_int(const Token& t, int line) {
  Int v = 0;
  const char* b = t.text.data();
  const char* e = b + t.text.size();
  const auto [p, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || p != e) throw ParseError("expected an integer, got '" + t.text + "'", line, t.column);
  return v;
}

bool to_bool(const Token& t, int line) {
  if (t.text == "true" || t.text == "1") return true;
  if (t.text == "false" || t.text == "0") return false;
  throw ParseError("expected true or false, got '" + t.text + "'", line, t.column);
}

void expect_count(const Line& l, std::size_t n) {
  if (l.values.size() == n) return;
  const int col = l.values.size() > n ? l.values[n].column : l.end_column;
  throw ParseError("'" + l.key.text + "' takes " + std::to_string(n) + " value(s), got " +
                       std::to_string(l.values.size()),
                   l.number, col);
}

double scalar(const Line& l) {
  expect_count(l, 1);
  return to_double(l.values[0], l.number);
}

Vec2 vec2(const Line& l) {
  expect_count(l, 2);
  return {to_double(l.values[0], l.number), to_double(l.values[1], l.number)};
}

Polygon polygon_of(const Line& l, std::vector<Vec2> pts) {
  try {
    return Polygon(std::move(pts));
  } catch (const Error& e) {
    throw ParseError(std::string("invalid polygon: ") + e.what(), l.number,
                     l.values.empty() ? l.key.column : l.values[0].column);
  }
}

using Handler = std::function<void(const Line&)>;

[[noreturn]] void unknown_key(const Line& l, const std::string& section) {
  throw ParseError("unknown key '" + l.key.text + "' in " + section, l.number, l.key.column);
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fixed(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

const char* shape_name(BodyShape s) {
  switch (s) {
    case BodyShape::Box:
      return "box";
    case BodyShape::Cylinder:
      return "cylinder";
    case BodyShape::Sphere:
      return "sphere";
  }
  return "box";
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '&':
        out += "&amp;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

OccupancyGrid static_map(const SceneSpec& scene) {
  return nav::build_global_map(scene.world(), scene.map.resolution);
}

}  // namespace

World SceneSpec::world() const {
  World w;
  w.min = map.min;
  w.max = map.max;
  w.statics = map.statics;
  w.objects = objects;
  return w;
}

nav::PlannerConfig SceneSpec::planner_config() const {
  nav::PlannerConfig c;
  c.resolution = map.resolution;
  c.robot_radius = robot.radius;
  c.inflation = robot.inflation;
  c.sensing_radius = robot.sensing_radius;
  c.step_speed = robot.step_speed;
  c.filter_margin = planner.filter_margin;
  c.max_replans = planner.max_replans;
  c.max_push_attempts = planner.max_push_attempts;
  c.use_affordances = planner.use_affordances;
  c.seed = seed;
  c.caps = capabilities;
  c.physics.vscm.alpha = cito.alpha;
  c.physics.vscm.k_max = cito.k_max;
  c.push.N = cito.N;
  c.push.dt = cito.dt;
  c.push.w1 = cito.w1;
  c.push.w2 = cito.w2;
  c.push.w3 = cito.w3;
  c.push.v_max = robot.v_max;
  c.push.w_max = robot.w_max;
  c.push.goal_tolerance = cito.goal_tolerance;
  c.push.corridors = cito.corridors;
  c.push.idle_init = cito.idle_init;
  c.push.scvx.max_iters = cito.max_iters;
  return c;
}

SceneSpec parse_scene(std::istream& in) {
  SceneSpec scene;
  std::string section;
  UnknownObject* object = nullptr;

  const auto set = [](auto& field) { return [&field](const Line& l) { field = scalar(l); }; };
  const auto set_int = [](int& field) {
    return [&field](const Line& l) {
      expect_count(l, 1);
      field = to_int<int>(l.values[0], l.number);
    };
  };
  const auto set_bool = [](bool& field) {
    return [&field](const Line& l) {
      expect_count(l, 1);
      field = to_bool(l.values[0], l.number);
    };
  };

  std::map<std::string, std::map<std::string, Handler>> table;
  table[""] = {
      {"name",
       [&](const Line& l) {
         expect_count(l, 1);
         scene.name = l.values[0].text;
       }},
      {"seed",
       [&](const Line& l) {
         expect_count(l, 1);
         scene.seed = to_int<std::uint64_t>(l.values[0], l.number);
       }},
  };
  table["map"] = {
      {"min", [&](const Line& l) { scene.map.min = vec2(l); }},
      {"max", [&](const Line& l) { scene.map.max = vec2(l); }},
      {"resolution", set(scene.map.resolution)},
  };
  table["static"] = {
      {"rect",
       [&](const Line& l) {
         expect_count(l, 4);
         double v[4];
         for (int i = 0; i < 4; ++i) v[i] = to_double(l.values[static_cast<std::size_t>(i)], l.number);
         if (!(v[2] > v[0]) || !(v[3] > v[1])) {
           throw ParseError("'rect' needs max x y above min x y", l.number, l.values[2].column);
         }
         scene.map.statics.push_back(polygon_of(l, {{v[0], v[1]}, {v[2], v[1]}, {v[2], v[3]}, {v[0], v[3]}}));
       }},
      {"polygon",
       [&](const Line& l) {
         if (l.values.size() < 6 || l.values.size() % 2 != 0) {
           throw ParseError("'polygon' takes an even number (>= 6) of coordinates", l.number,
                            l.values.empty() ? l.end_column : l.values.back().column);
         }
         std::vector<Vec2> pts;
         for (std::size_t i = 0; i < l.values.size(); i += 2) {
           pts.push_back({to_double(l.values[i], l.number), to_double(l.values[i + 1], l.number)});
         }
         scene.map.statics.push_back(polygon_of(l, std::move(pts)));
       }},
  };
  table["robot"] = {
      {"start",
       [&](const Line& l) {
         expect_count(l, 3);
         scene.robot.start = {to_double(l.values[0], l.number), to_double(l.values[1], l.number),
                              to_double(l.values[2], l.number)};
       }},
      {"goal", [&](const Line& l) { scene.robot.goal = vec2(l); }},
      {"radius", set(scene.robot.radius)},
      {"inflation", set(scene.robot.inflation)},
      {"v_max", set(scene.robot.v_max)},
      {"w_max", set(scene.robot.w_max)},
      {"sensing_radius", set(scene.robot.sensing_radius)},
      {"step_speed", set(scene.robot.step_speed)},
  };
  table["object"] = {
      {"name",
       [&](const Line& l) {
         expect_count(l, 1);
         object->name = l.values[0].text;
       }},
      {"shape",
       [&](const Line& l) {
         expect_count(l, 1);
         const std::string& s = l.values[0].text;
         if (s == "box") {
           object->shape = BodyShape::Box;
         } else if (s == "cylinder") {
           object->shape = BodyShape::Cylinder;
         } else if (s == "sphere") {
           object->shape = BodyShape::Sphere;
         } else {
           throw ParseError("unknown shape '" + s + "'", l.number, l.values[0].column);
         }
       }},
      {"pose",
       [&](const Line& l) {
         expect_count(l, 3);
         object->pose = {to_double(l.values[0], l.number), to_double(l.values[1], l.number),
                         to_double(l.values[2], l.number)};
       }},
      {"size",
       [&](const Line& l) {
         const Vec2 s = vec2(l);
         object->size_x = s.x;
         object->size_y = s.y;
       }},
      {"radius", [&](const Line& l) { object->radius = scalar(l); }},
      {"height", [&](const Line& l) { object->height = scalar(l); }},
      {"mass", [&](const Line& l) { object->mass = scalar(l); }},
      {"mu_s", [&](const Line& l) { object->mu_s = scalar(l); }},
      {"mu_v", [&](const Line& l) { object->mu_v = scalar(l); }},
  };
  affordance::RobotCapabilities& caps = scene.capabilities;
  table["capabilities"] = {
      {"c1", set(caps.c1)},         {"c2", set(caps.c2)},         {"c3", set(caps.c3)},
      {"c4", set(caps.c4)},         {"c5", set(caps.c5)},         {"c6", set(caps.c6)},
      {"f_lift", set(caps.f_lift)}, {"f_push", set(caps.f_push)}, {"perp_tol", set(caps.perp_tol)},
  };
  CitoSpec& cito = scene.cito;
  table["cito"] = {
      {"N", set_int(cito.N)},
      {"dt", set(cito.dt)},
      {"w1", set(cito.w1)},
      {"w2", set(cito.w2)},
      {"w3", set(cito.w3)},
      {"alpha", set(cito.alpha)},
      {"k_max", set(cito.k_max)},
      {"goal_tolerance", set(cito.goal_tolerance)},
      {"idle_init", set_bool(cito.idle_init)},
      {"max_iters", set_int(cito.max_iters)},
      {"corridor",
       [&](const Line& l) {
         expect_count(l, 4);
         nav::Rect r;
         r.min = {to_double(l.values[0], l.number), to_double(l.values[1], l.number)};
         r.max = {to_double(l.values[2], l.number), to_double(l.values[3], l.number)};
         cito.corridors.push_back(r);
       }},
      {"goal", [&](const Line& l) { cito.goal = vec2(l); }},
  };
  table["planner"] = {
      {"max_replans", set_int(scene.planner.max_replans)},
      {"max_push_attempts", set_int(scene.planner.max_push_attempts)},
      {"use_affordances", set_bool(scene.planner.use_affordances)},
      {"filter_margin", set(scene.planner.filter_margin)},
  };

  std::string raw;
  int number = 0;
  while (std::getline(in, raw)) {
    ++number;
    std::size_t end = raw.find('#');
    if (end == std::string::npos) end = raw.size();
    while (end > 0 && std::isspace(static_cast<unsigned char>(raw[end - 1]))) --end;
    std::size_t begin = 0;
    while (begin < end && std::isspace(static_cast<unsigned char>(raw[begin]))) ++begin;
    if (begin == end) continue;

    if (raw[begin] == '[') {
      if (raw[end - 1] != ']') throw ParseError("unterminated section header", number, static_cast<int>(end));
      section = raw.substr(begin + 1, end - begin - 2);
      if (section.empty() || !table.count(section)) {
        throw ParseError("unknown section '" + section + "'", number, static_cast<int>(begin) + 1);
      }
      if (section == "object") {
        scene.objects.emplace_back();
        object = &scene.objects.back();
      }
      continue;
    }

    const std::size_t eq = raw.find('=', begin);
    if (eq == std::string::npos || eq >= end) {
      throw ParseError("expected 'key = value'", number, static_cast<int>(begin) + 1);
    }
    const std::vector<Token> key = split(raw, begin, eq);
    if (key.size() != 1) {
      throw ParseError("expected a single key before '='", number,
                       key.empty() ? static_cast<int>(eq) + 1 : key.back().column);
    }
    Line line{number, key[0], split(raw, eq + 1, end), static_cast<int>(end) + 1};
    const auto& handlers_of = table.at(section);
    const auto it = handlers_of.find(line.key.text);
    if (it == handlers_of.end()) unknown_key(line, section.empty() ? std::string("top level") : "[" + section + "]");
    it->second(line);
  }
  validate(scene);
  return scene;
}

SceneSpec load_scene(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open scene file " + path.string());
  SceneSpec s = parse_scene(in);
  if (s.name.empty()) s.name = path.stem().string();
  return s;
}

void validate(const SceneSpec& s) {
  const auto require = [](bool ok, const std::string& field, const std::string& what) {
    if (!ok) throw ValidationError(field, what);
  };
  require(s.map.max.x > s.map.min.x && s.map.max.y > s.map.min.y, "map.max", "must exceed map.min");
  require(s.map.resolution > 0.0, "map.resolution", "must be positive");
  require(s.robot.radius > 0.0, "robot.radius", "must be positive");
  require(s.robot.inflation >= s.robot.radius, "robot.inflation", "must be at least the robot radius");
  require(s.robot.v_max > 0.0, "robot.v_max", "must be positive");
  require(s.robot.w_max > 0.0, "robot.w_max", "must be positive");
  require(s.robot.sensing_radius > 0.0, "robot.sensing_radius", "must be positive");
  require(s.robot.step_speed > 0.0, "robot.step_speed", "must be positive");

  for (std::size_t i = 0; i < s.objects.size(); ++i) {
    const UnknownObject& o = s.objects[i];
    const std::string f = "objects[" + std::to_string(i) + "]";
    require(o.mass > 0.0, f + ".mass", "must be positive");
    require(o.mu_s >= 0.0, f + ".mu_s", "must be non-negative");
    require(o.mu_v >= 0.0, f + ".mu_v", "must be non-negative");
    if (o.shape == BodyShape::Box) {
      require(o.size_x > 0.0 && o.size_y > 0.0, f + ".size", "must be positive");
      require(o.height > 0.0, f + ".height", "must be positive");
    } else {
      require(o.radius > 0.0, f + ".radius", "must be positive");
      if (o.shape == BodyShape::Cylinder) require(o.height > 0.0, f + ".height", "must be positive");
    }
    Vec2 lo, hi;
    o.footprint().bounds(lo, hi);
    require(lo.x >= s.map.min.x && lo.y >= s.map.min.y && hi.x <= s.map.max.x && hi.y <= s.map.max.y, f + ".pose",
            "footprint leaves the map");
  }

  s.capabilities.validate();

  const CitoSpec& c = s.cito;
  require(c.N >= 1, "cito.N", "must be at least 1");
  require(c.dt > 0.0, "cito.dt", "must be positive");
  require(c.N * c.dt <= 60.0, "cito.N", "horizon N * dt exceeds 60 s");
  require(c.w1 >= 0.0 && c.w2 >= 0.0 && c.w3 >= 0.0, "cito.w", "weights must be non-negative");
  require(c.alpha > 0.0, "cito.alpha", "must be positive");
  require(c.k_max >= 0.0, "cito.k_max", "must be non-negative");
  require(c.goal_tolerance > 0.0, "cito.goal_tolerance", "must be positive");
  require(c.max_iters >= 1, "cito.max_iters", "must be at least 1");
  for (const nav::Rect& r : c.corridors) {
    require(r.max.x > r.min.x && r.max.y > r.min.y, "cito.corridor", "max must exceed min");
  }

  require(s.planner.max_replans >= 0, "planner.max_replans", "must be non-negative");
  require(s.planner.max_push_attempts >= 1, "planner.max_push_attempts", "must be at least 1");
  require(s.planner.filter_margin >= 0.0, "planner.filter_margin", "must be non-negative");

  const OccupancyGrid planning = nav::inflate(static_map(s), s.robot.inflation);
  const auto free_at = [&](Vec2 p) {
    const auto cell = planning.cell_of(p);
    return cell && !planning.occupied(*cell);
  };
  require(free_at(s.robot.start.position()), "start", "not free on the inflated static map");
  require(free_at(s.robot.goal), "goal", "not free on the inflated static map");
}

void write_scene(std::ostream& out, const SceneSpec& s) {
  const auto v2 = [](Vec2 v) { return fmt(v.x) + " " + fmt(v.y); };
  if (!s.name.empty()) out << "name = " << s.name << "\n";
  out << "seed = " << s.seed << "\n\n";
  out << "[map]\nmin = " << v2(s.map.min) << "\nmax = " << v2(s.map.max) << "\nresolution = " << fmt(s.map.resolution)
      << "\n\n[static]\n";
  for (const Polygon& p : s.map.statics) {
    out << "polygon =";
    for (std::size_t i = 0; i < p.size(); ++i) out << " " << v2(p.vertex(i));
    out << "\n";
  }
  const RobotSpec& r = s.robot;
  out << "\n[robot]\nstart = " << fmt(r.start.x) << " " << fmt(r.start.y) << " " << fmt(r.start.theta)
      << "\ngoal = " << v2(r.goal) << "\nradius = " << fmt(r.radius) << "\ninflation = " << fmt(r.inflation)
      << "\nv_max = " << fmt(r.v_max) << "\nw_max = " << fmt(r.w_max) << "\nsensing_radius = " << fmt(r.sensing_radius)
      << "\nstep_speed = " << fmt(r.step_speed) << "\n";
  for (const UnknownObject& o : s.objects) {
    out << "\n[object]\n";
    if (!o.name.empty()) out << "name = " << o.name << "\n";
    out << "shape = " << shape_name(o.shape) << "\npose = " << fmt(o.pose.x) << " " << fmt(o.pose.y) << " "
        << fmt(o.pose.theta) << "\nsize = " << fmt(o.size_x) << " " << fmt(o.size_y) << "\nradius = " << fmt(o.radius)
        << "\nheight = " << fmt(o.height) << "\nmass = " << fmt(o.mass) << "\nmu_s = " << fmt(o.mu_s)
        << "\nmu_v = " << fmt(o.mu_v) << "\n";
  }
  const affordance::RobotCapabilities& k = s.capabilities;
  out << "\n[capabilities]\nc1 = " << fmt(k.c1) << "\nc2 = " << fmt(k.c2) << "\nc3 = " << fmt(k.c3)
      << "\nc4 = " << fmt(k.c4) << "\nc5 = " << fmt(k.c5) << "\nc6 = " << fmt(k.c6) << "\nf_lift = " << fmt(k.f_lift)
      << "\nf_push = " << fmt(k.f_push) << "\nperp_tol = " << fmt(k.perp_tol) << "\n";
  const CitoSpec& c = s.cito;
  out << "\n[cito]\nN = " << c.N << "\ndt = " << fmt(c.dt) << "\nw1 = " << fmt(c.w1) << "\nw2 = " << fmt(c.w2)
      << "\nw3 = " << fmt(c.w3) << "\nalpha = " << fmt(c.alpha) << "\nk_max = " << fmt(c.k_max)
      << "\ngoal_tolerance = " << fmt(c.goal_tolerance) << "\nidle_init = " << (c.idle_init ? "true" : "false")
      << "\nmax_iters = " << c.max_iters << "\n";
  for (const nav::Rect& rc : c.corridors) out << "corridor = " << v2(rc.min) << " " << v2(rc.max) << "\n";
  if (c.goal) out << "goal = " << v2(*c.goal) << "\n";
  out << "\n[planner]\nmax_replans = " << s.planner.max_replans
      << "\nmax_push_attempts = " << s.planner.max_push_attempts
      << "\nuse_affordances = " << (s.planner.use_affordances ? "true" : "false")
      << "\nfilter_margin = " << fmt(s.planner.filter_margin) << "\n";
}

void save_scene(const std::filesystem::path& path, const SceneSpec& scene) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write scene file " + path.string());
  write_scene(out, scene);
  if (!out) throw IoError("failed writing scene file " + path.string());
}

RunReport run(const SceneSpec& scene) {
  const auto t0 = Clock::now();
  RunReport r;
  r.scene = scene.name;
  r.seed = scene.seed;
  r.nav = nav::namo_planner(scene.world(), scene.robot.start, scene.robot.goal, scene.planner_config());
  r.total_seconds = seconds_since(t0);
  r.success = r.nav.success;
  r.affordance_seconds = r.nav.times.affordance;
  r.cito_seconds = r.nav.times.cito;
  r.execution_seconds = r.nav.times.execution;
  r.final_pose = r.nav.final_pose;
  return r;
}

nav::GridPath plan_global(const SceneSpec& scene) {
  const OccupancyGrid planning = nav::inflate(static_map(scene), scene.robot.inflation);
  return nav::astar(planning, scene.robot.start.position(), scene.robot.goal);
}

CitoRun solve_cito(const SceneSpec& scene) {
  if (scene.cito.corridors.empty()) throw ValidationError("cito.corridor", "a standalone solve needs a corridor");
  const nav::Rect& rect = scene.cito.corridors.front();
  const Polygon area({rect.min, {rect.max.x, rect.min.y}, rect.max, {rect.min.x, rect.max.y}});

  dynamics::Model model;
  model.robot_radius = scene.robot.radius;
  model.params.vscm.alpha = scene.cito.alpha;
  model.params.vscm.k_max = scene.cito.k_max;
  dynamics::WorldState x0;
  x0.robot = scene.robot.start;
  for (const UnknownObject& o : scene.objects) {
    const Polygon fp = o.footprint();
    if (!area.contains(o.pose.position()) && !polygons_intersect(fp, area)) continue;
    model.objects.push_back(o.props());
    x0.objects.push_back(o.pose);
    x0.object_vels.push_back({});
  }

  CitoRun out;
  const Vec2 goal = scene.cito.goal.value_or(scene.robot.goal);
  out.problem = cito::make_problem(model, x0, goal,
                                   cito::CorridorSpec{rect.min, rect.max, scene.robot.v_max, scene.robot.w_max},
                                   scene.cito.N, scene.cito.dt);
  out.problem.w1 = scene.cito.w1;
  out.problem.w2 = scene.cito.w2;
  out.problem.w3 = scene.cito.w3;

  cito::ScvxSettings settings;
  settings.max_iters = scene.cito.max_iters;
  settings.keep_history = true;
  const std::vector<dynamics::Control> init =
      scene.cito.idle_init ? cito::idle_init(out.problem) : cito::straight_line_init(out.problem);
  const auto t0 = Clock::now();
  out.solution = cito::scvx_solve(out.problem, init, settings);
  out.seconds = seconds_since(t0);

  dynamics::Model physical = model;
  physical.params.virtual_forces = false;
  out.executed = dynamics::rollout(x0, out.solution.U, scene.cito.dt, physical);
  out.goal_error = distance(out.executed.back().robot.position(), goal);
  return out;
}

std::size_t static_overlaps(const SceneSpec& scene, const nav::NavReport& report) {
  std::size_t n = 0;
  for (const nav::Frame& f : report.frames) {
    const Circle body{f.robot.position(), scene.robot.radius};
    const Vec2 p = body.center;
    bool hit = p.x < scene.map.min.x || p.y < scene.map.min.y || p.x > scene.map.max.x || p.y > scene.map.max.y;
    for (const Polygon& poly : scene.map.statics) {
      hit = hit || signed_distance_circle_polygon(body, poly).distance < -1e-9;
    }
    if (hit) ++n;
  }
  return n;
}

std::string render_svg(const SceneSpec& scene, const nav::NavReport& report, std::size_t frame) {
  const nav::Frame& f = report.frames.at(frame);
  const double w = scene.map.max.x - scene.map.min.x;
  const double h = scene.map.max.y - scene.map.min.y;
  constexpr double kScale = 100.0;  // px per metre
  const auto px = [&](Vec2 p) {
    return fixed((p.x - scene.map.min.x) * kScale, 2) + "," + fixed((scene.map.max.y - p.y) * kScale, 2);
  };
  const auto points = [&](const Polygon& poly) {
    std::string s;
    for (std::size_t i = 0; i < poly.size(); ++i) s += (i ? " " : "") + px(poly.vertex(i));
    return s;
  };

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fixed(w * kScale, 0) << "\" height=\""
      << fixed(h * kScale, 0) << "\" viewBox=\"0 0 " << fixed(w * kScale, 2) << " " << fixed(h * kScale, 2)
      << "\">\n";
  svg << "  <title>" << xml_escape(scene.name.empty() ? "scene" : scene.name) << " t=" << fixed(f.time, 2) << "s</title>\n";
  svg << "  <rect x=\"0\" y=\"0\" width=\"" << fixed(w * kScale, 2) << "\" height=\"" << fixed(h * kScale, 2)
      << "\" fill=\"white\"/>\n";
  for (const Polygon& p : scene.map.statics) svg << "  <polygon points=\"" << points(p) << "\" fill=\"gray\"/>\n";
  for (std::size_t i = 0; i < f.static_count && i < report.added_statics.size(); ++i) {
    svg << "  <polygon points=\"" << points(report.added_statics[i]) << "\" fill=\"dimgray\"/>\n";
  }
  for (std::size_t i = 0; i < scene.objects.size() && i < f.objects.size(); ++i) {
    UnknownObject o = scene.objects[i];
    o.pose = f.objects[i];
    svg << "  <polygon points=\"" << points(o.footprint()) << "\" fill=\"red\"/>\n";
  }
  if (f.path_id < report.paths.size()) {
    svg << "  <polyline points=\"";
    const nav::GridPath& path = report.paths[f.path_id];
    for (std::size_t i = 0; i < path.points.size(); ++i) svg << (i ? " " : "") << px(path.points[i]);
    svg << "\" fill=\"none\" stroke=\"blue\" stroke-width=\"2\"/>\n";
  }
  const std::string goal = px(scene.robot.goal);
  const std::size_t comma = goal.find(',');
  svg << "  <circle cx=\"" << goal.substr(0, comma) << "\" cy=\"" << goal.substr(comma + 1) << "\" r=\""
      << fixed(0.1 * kScale, 2) << "\" fill=\"green\"/>\n";
  const std::string robot = px(f.robot.position());
  const std::size_t rc = robot.find(',');
  svg << "  <circle cx=\"" << robot.substr(0, rc) << "\" cy=\"" << robot.substr(rc + 1) << "\" r=\""
      << fixed(scene.robot.radius * kScale, 2) << "\" fill=\"none\" stroke=\"black\" stroke-width=\"2\"/>\n";
  const Vec2 tip = f.robot.position() + Vec2{std::cos(f.robot.theta), std::sin(f.robot.theta)} * scene.robot.radius;
  svg << "  <polyline points=\"" << robot << " " << px(tip) << "\" stroke=\"black\" stroke-width=\"2\"/>\n";
  svg << "</svg>\n";
  return svg.str();
}

std::vector<std::filesystem::path> emit_svg(const SceneSpec& scene, const nav::NavReport& report,
                                            const std::filesystem::path& out_dir, int stride) {
  if (stride < 1) throw IoError("svg stride must be at least 1");
  if (report.frames.empty()) throw IoError("no frames to render");
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());
  std::vector<std::filesystem::path> files;
  for (std::size_t i = 0; i < report.frames.size(); i += static_cast<std::size_t>(stride)) {
    char name[32];
    std::snprintf(name, sizeof name, "frame_%05zu.svg", i);
    const std::filesystem::path file = out_dir / name;
    std::ofstream out(file);
    out << render_svg(scene, report, i);
    if (!out) throw IoError("cannot write " + file.string());
    files.push_back(file);
  }
  return files;
}

std::string event_records(const nav::NavReport& report) {
  std::ostringstream out;
  for (const nav::NavEvent& e : report.events) {
    out << "event kind=" << nav::to_string(e.kind) << " time=" << fixed(e.time, 3) << " step=" << e.step
        << " x=" << fixed(e.where.x, 4) << " y=" << fixed(e.where.y, 4)
        << " object=" << (e.object ? std::to_string(*e.object) : std::string("-"))
        << " success=" << (e.success ? 1 : 0);
    if (e.kind == nav::EventKind::Cito) out << " iterations=" << e.iterations << " cost=" << fmt(e.cost);
    if (!e.detail.empty()) {
      std::string d = e.detail;
      std::replace(d.begin(), d.end(), '"', '\'');
      out << " detail=\"" << d << "\"";
    }
    out << "\n";
  }
  return out.str();
}

std::string emit_report(const std::vector<RunReport>& runs, ReportFormat format) {
  std::ostringstream out;
  if (format == ReportFormat::Text) {
    out << "Run | Affordance | CITO | Execution | Total\n";
    for (std::size_t i = 0; i < runs.size(); ++i) {
      const RunReport& r = runs[i];
      out << (i + 1) << " | " << fixed(r.affordance_seconds) << " | " << fixed(r.cito_seconds) << " | "
          << fixed(r.execution_seconds) << " | " << fixed(r.total_seconds) << "\n";
    }
    return out.str();
  }
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const RunReport& r = runs[i];
    out << "run index=" << (i + 1) << " scene=" << (r.scene.empty() ? "-" : r.scene) << " seed=" << r.seed
        << " success=" << (r.success ? 1 : 0) << " affordance=" << fixed(r.affordance_seconds)
        << " cito=" << fixed(r.cito_seconds) << " execution=" << fixed(r.execution_seconds)
        << " total=" << fixed(r.total_seconds) << " final_x=" << fixed(r.final_pose.x, 4)
        << " final_y=" << fixed(r.final_pose.y, 4) << " final_theta=" << fixed(r.final_pose.theta, 4)
        << " events=" << r.nav.events.size() << "\n";
    if (!r.success) out << "failure run=" << (i + 1) << " message=\"" << r.nav.failure << "\"\n";
    out << event_records(r.nav);
  }
  return out.str();
}

}  // namespace namo::harness
