#include "namo/navigation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>

#include "namo/errors.hpp"

namespace namo::nav {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

Polygon rect_polygon(const Rect& r) {
  return Polygon({r.min, {r.max.x, r.min.y}, r.max, {r.min.x, r.max.y}});
}

double circumradius(const Polygon& body) {
  double r = 0.0;
  for (const Vec2& v : body.vertices()) r = std::max(r, v.norm());
  return r;
}

dynamics::Model world_model(const World& world, const std::vector<std::size_t>& ids, double robot_radius,
                            const dynamics::PhysicsParams& physics) {
  dynamics::Model m;
  m.robot_radius = robot_radius;
  m.params = physics;
  for (std::size_t id : ids) m.objects.push_back(world.objects[id].props());
  return m;
}

dynamics::WorldState world_state(const World& world, const std::vector<std::size_t>& ids, Pose2 robot) {
  dynamics::WorldState x;
  x.robot = robot;
  for (std::size_t id : ids) {
    x.objects.push_back(world.objects[id].pose);
    x.object_vels.push_back({});
  }
  return x;
}

dynamics::Control idle_control(const dynamics::Model& m) {
  dynamics::Control u;
  u.stiffness.assign(m.num_pairs(), 0.0);
  return u;
}

bool objects_at_rest(const dynamics::WorldState& x) {
  for (const auto& v : x.object_vels) {
    if (std::hypot(v.vx, v.vy) > 1e-6 || std::abs(v.omega) > 1e-6) return false;
  }
  return true;
}

}  // namespace

OccupancyGrid build_global_map(const World& world, double resolution) {
  OccupancyGrid g = OccupancyGrid::covering(world.min, world.max, resolution);
  for (const Polygon& p : world.statics) g.rasterize(p);
  return g;
}

OccupancyGrid get_local_map(const OccupancyGrid& global, const World& world, Vec2 robot, double sensing_radius) {
  if (!(sensing_radius > 0.0)) throw DegenerateInput("sensing radius must be positive");
  OccupancyGrid local = global;
  for (const UnknownObject& o : world.objects) {
    if (distance(o.pose.position(), robot) <= sensing_radius) local.rasterize(o.footprint());
  }
  return local;
}

std::optional<CollisionHit> check_collision(const OccupancyGrid& local, const GridPath& path, double radius,
                                            std::size_t from) {
  const std::vector<Cell> disc = disc_offsets(radius, local.resolution());
  for (std::size_t i = from; i < path.size(); ++i) {
    const Cell c = path.cells[i];
    for (const Cell& d : disc) {
      const Cell n{c.x + d.x, c.y + d.y};
      if (local.in_bounds(n) && local.occupied(n)) return CollisionHit{i, path.points[i]};
    }
  }
  return std::nullopt;
}

std::optional<std::size_t> filter_primitive(const std::vector<perception::Primitive>& psi, Vec2 o, double r,
                                            double vertical_tol) {
  if (!(r > 0.0)) throw DegenerateInput("filter radius must be positive");
  for (std::size_t i = 0; i < psi.size(); ++i) {
    const perception::Primitive& p = psi[i];
    const Vec2 v = o - Vec2{p.center.x(), p.center.y()};
    if (p.shape == perception::ShapeKind::Plane) {
      if (!p.is_vertical_plane(vertical_tol)) continue;
      const ProjectionRejection pr = project_reject(v, p.normal);
      if (pr.projection < r && pr.rejection < p.width / 2.0 + r) return i;
    } else if (v.norm() < p.radius + r) {
      return i;
    }
  }
  return std::nullopt;
}

Pose2 clear_obstacle_lift(World& world, std::size_t object_id, const OccupancyGrid& global, const GridPath& path,
                          std::size_t from, double radius, Vec2 robot, double robot_radius,
                          const LiftParams& params) {
  if (object_id >= world.objects.size()) throw Error("lift target is not a world object");
  UnknownObject& target = world.objects[object_id];
  const Polygon body = target.body_footprint();

  OccupancyGrid corridor(global.origin(), global.resolution(), global.width(), global.height());
  for (std::size_t i = from; i < path.size(); ++i) corridor.set(path.cells[i], true);
  corridor = inflate(corridor, radius);

  const double res = global.resolution();
  const Vec2 lo = global.origin();
  const Vec2 hi = lo + Vec2{global.width() * res, global.height() * res};
  const int rings = static_cast<int>(std::floor(params.search_radius / res + 1e-9));

  const auto valid = [&](const Pose2& pose) {
    const Polygon fp = body.transformed(pose);
    Vec2 fmin, fmax;
    fp.bounds(fmin, fmax);
    if (fmin.x < lo.x || fmin.y < lo.y || fmax.x > hi.x || fmax.y > hi.y) return false;
    for (const Cell& c : global.overlapped_cells(fp)) {
      if (global.occupied(c) || corridor.occupied(c)) return false;
    }
    for (std::size_t j = 0; j < world.objects.size(); ++j) {
      if (j != object_id && polygons_intersect(fp, world.objects[j].footprint())) return false;
    }
    return signed_distance_circle_polygon({robot, robot_radius + params.clearance}, fp).distance > 0.0;
  };

  for (int k = 1; k <= rings; ++k) {
    for (int j = 0; j < params.angles; ++j) {
      const double a = 2.0 * std::numbers::pi * j / params.angles;
      const Pose2 pose{target.pose.x + k * res * std::cos(a), target.pose.y + k * res * std::sin(a),
                       target.pose.theta};
      if (valid(pose)) {
        target.pose = pose;
        return pose;
      }
    }
  }
  throw NoPlacementFound("no free placement within the search radius");
}

const char* to_string(PushStatus s) {
  switch (s) {
    case PushStatus::Success: return "success";
    case PushStatus::NoCorridor: return "no-corridor";
    case PushStatus::NotConverged: return "not-converged";
    case PushStatus::Diverged: return "diverged";
  }
  return "?";
}

std::size_t push_goal_index(const GridPath& path, std::size_t block_index, double offset) {
  if (path.empty()) throw DegenerateInput("empty path");
  double s = 0.0;
  for (std::size_t i = block_index + 1; i < path.size(); ++i) {
    s += distance(path.points[i - 1], path.points[i]);
    if (s >= offset - 1e-9) return i;
  }
  return path.size() - 1;
}

namespace {

// Rectangle that holds the robot, the goal and the object, free of statics
// and of every other object. Grows greedily up to params.corridor_grow.
std::optional<Rect> auto_corridor(const World& world, std::size_t object_id, const OccupancyGrid& global,
                                  Vec2 robot, Vec2 goal, double robot_radius, double grow) {
  const double res = global.resolution();
  const Vec2 glo = global.origin();
  const Vec2 ghi = glo + Vec2{global.width() * res, global.height() * res};
  const auto free = [&](const Rect& r) {
    if (r.min.x < glo.x || r.min.y < glo.y || r.max.x > ghi.x || r.max.y > ghi.y) return false;
    const Polygon poly = rect_polygon(r);
    for (const Cell& c : global.overlapped_cells(poly)) {
      if (global.occupied(c)) return false;
    }
    for (std::size_t j = 0; j < world.objects.size(); ++j) {
      if (j != object_id && polygons_intersect(poly, world.objects[j].footprint())) return false;
    }
    return true;
  };

  const UnknownObject& obj = world.objects[object_id];
  const double rc = circumradius(obj.body_footprint()) + 1e-3;
  const double rr = robot_radius + 1e-3;
  Rect r{{std::min({robot.x - rr, goal.x - rr, obj.pose.x - rc}), std::min({robot.y - rr, goal.y - rr, obj.pose.y - rc})},
         {std::max({robot.x + rr, goal.x + rr, obj.pose.x + rc}), std::max({robot.y + rr, goal.y + rr, obj.pose.y + rc})}};
  if (!free(r)) return std::nullopt;

  double grown[4] = {0.0, 0.0, 0.0, 0.0};
  bool open[4] = {true, true, true, true};
  while (open[0] || open[1] || open[2] || open[3]) {
    for (int side = 0; side < 4; ++side) {
      if (!open[side]) continue;
      Rect next = r;
      switch (side) {
        case 0: next.max.x += res; break;
        case 1: next.min.x -= res; break;
        case 2: next.max.y += res; break;
        default: next.min.y -= res; break;
      }
      if (grown[side] + res > grow + 1e-9 || !free(next)) {
        open[side] = false;
        continue;
      }
      r = next;
      grown[side] += res;
    }
  }
  return r;
}

bool corridor_fits(const Rect& r, const World& world, std::size_t object_id, Vec2 robot, Vec2 goal,
                   double robot_radius) {
  const UnknownObject& obj = world.objects[object_id];
  return r.contains(robot, robot_radius) && r.contains(goal, robot_radius) &&
         r.contains(obj.pose.position(), circumradius(obj.body_footprint()));
}

}  // namespace

PushOutcome execute_push(World& world, Pose2& robot, std::size_t object_id, const OccupancyGrid& global,
                         const GridPath& path, std::size_t block_index, double robot_radius,
                         const dynamics::PhysicsParams& physics, const PushParams& params) {
  if (object_id >= world.objects.size()) throw Error("push target is not a world object");
  PushOutcome out;
  out.goal_index = push_goal_index(path, block_index, params.goal_offset * robot_radius);
  out.goal = path.points[out.goal_index];

  // Pull the goal back along the path into the first scene corridor that
  // holds the robot and the object.
  std::optional<Rect> corridor;
  for (std::size_t gi = out.goal_index; gi > block_index && !corridor; --gi) {
    for (const Rect& r : params.corridors) {
      if (corridor_fits(r, world, object_id, robot.position(), path.points[gi], robot_radius)) {
        corridor = r;
        out.goal_index = gi;
        out.goal = path.points[gi];
        break;
      }
    }
  }
  if (!corridor) {
    corridor = auto_corridor(world, object_id, global, robot.position(), out.goal, robot_radius,
                             params.corridor_grow);
  }
  if (!corridor) {
    out.status = PushStatus::NoCorridor;
    out.detail = "no obstacle-free corridor holds the robot, the object and the goal";
    return out;
  }
  out.corridor = *corridor;

  out.object_ids.push_back(object_id);
  const Polygon cpoly = rect_polygon(*corridor);
  for (std::size_t j = 0; j < world.objects.size(); ++j) {
    if (j != object_id && polygons_intersect(cpoly, world.objects[j].footprint())) out.object_ids.push_back(j);
  }

  dynamics::PhysicsParams plan_physics = physics;
  plan_physics.virtual_forces = true;
  const dynamics::Model model = world_model(world, out.object_ids, robot_radius, plan_physics);
  const dynamics::WorldState x0 = world_state(world, out.object_ids, robot);
  try {
    out.problem = cito::make_problem(model, x0, out.goal,
                                     cito::CorridorSpec{corridor->min, corridor->max, params.v_max, params.w_max},
                                     params.N, params.dt);
  } catch (const Error& e) {
    out.status = PushStatus::NoCorridor;
    out.detail = e.what();
    return out;
  }
  out.problem.w1 = params.w1;
  out.problem.w2 = params.w2;
  out.problem.w3 = params.w3;
  if (cito::bound_violation({x0}, out.problem) > 1e-6) {
    out.status = PushStatus::NoCorridor;
    out.detail = "an object in the corridor starts outside its bounds";
    return out;
  }

  const auto t_solve = Clock::now();
  out.solution = cito::scvx_solve(out.problem, params.idle_init ? cito::idle_init(out.problem) : cito::straight_line_init(out.problem), params.scvx);
  out.cito_seconds = seconds_since(t_solve);
  if (!out.solution.converged) {
    out.status = PushStatus::NotConverged;
    out.detail = "trajectory optimization did not converge";
    return out;
  }

  const auto t0 = Clock::now();
  dynamics::Model exec = model;
  exec.params.virtual_forces = false;
  try {
    out.executed = dynamics::rollout(x0, out.solution.U, params.dt, exec);
    const dynamics::Control idle = idle_control(exec);
    for (double t = 0.0; t < params.settle_time - 1e-9 && !objects_at_rest(out.executed.back()); t += params.dt) {
      out.executed.push_back(dynamics::step(out.executed.back(), idle, params.dt, exec));
    }
  } catch (const NonFiniteState& e) {
    out.execution_seconds = seconds_since(t0);
    out.status = PushStatus::Diverged;
    out.detail = e.what();
    return out;
  }
  out.execution_seconds = seconds_since(t0);

  const dynamics::WorldState& xf = out.executed.back();
  robot = xf.robot;
  for (std::size_t i = 0; i < out.object_ids.size(); ++i) world.objects[out.object_ids[i]].pose = xf.objects[i];

  const double miss = distance(robot.position(), out.goal);
  OccupancyGrid moved = global;
  for (std::size_t id : out.object_ids) moved.rasterize(world.objects[id].footprint());
  const auto hit = check_collision(moved, path, robot_radius, out.goal_index);
  if (miss > params.goal_tolerance) {
    out.status = PushStatus::Diverged;
    out.detail = "robot ended " + std::to_string(miss) + " m from the push goal";
  } else if (hit) {
    out.status = PushStatus::Diverged;
    out.detail = "path still blocked at waypoint " + std::to_string(hit->index);
  }
  return out;
}

PushOutcome clear_obstacle_push(World& world, Pose2& robot, std::size_t object_id, const OccupancyGrid& global,
                                const GridPath& path, std::size_t block_index, double robot_radius,
                                const dynamics::PhysicsParams& physics, const PushParams& params) {
  PushOutcome out = execute_push(world, robot, object_id, global, path, block_index, robot_radius, physics, params);
  switch (out.status) {
    case PushStatus::Success: break;
    case PushStatus::NotConverged: throw CitoNotConverged(out.detail);
    default: throw ExecutionDiverged(out.detail);
  }
  return out;
}

const char* to_string(EventKind kind) {
  switch (kind) {
    case EventKind::Block: return "Block";
    case EventKind::ProbeLift: return "ProbeLift";
    case EventKind::ProbePush: return "ProbePush";
    case EventKind::Cito: return "Cito";
    case EventKind::Lift: return "Lift";
    case EventKind::Push: return "Push";
    case EventKind::AddStatic: return "AddStatic";
    case EventKind::Replan: return "Replan";
    case EventKind::Goal: return "Goal";
  }
  return "?";
}

std::vector<EventKind> NavReport::kinds() const {
  std::vector<EventKind> out;
  out.reserve(events.size());
  for (const NavEvent& e : events) out.push_back(e.kind);
  return out;
}

namespace {

class Planner {
 public:
  Planner(const World& world, Pose2 start, Vec2 goal, const PlannerConfig& config)
      : cfg_(config), world_(world), robot_(start), goal_(goal) {}

  NavReport run() {
    try {
      loop();
      report_.success = true;
    } catch (const NoPath& e) {
      report_.failure = std::string("NoPath: ") + e.what();
    } catch (const StepLimitExceeded& e) {
      report_.failure = std::string("StepLimitExceeded: ") + e.what();
    } catch (const Error& e) {
      report_.failure = std::string("Error: ") + e.what();
    }
    report_.final_global = global_;
    report_.final_world = world_;
    report_.final_pose = robot_;
    report_.sim_time = time_;
    return std::move(report_);
  }

 private:
  void loop() {
    cfg_.caps.validate();
    global_ = build_global_map(world_, cfg_.resolution);
    plan();
    record_frame();
    while (true) {
      if (progress_ + 1 >= path_.size()) {
        if (distance(robot_.position(), goal_) > 1e-9) take_step(goal_);
        emit(EventKind::Goal, goal_);
        return;
      }
      const OccupancyGrid local = get_local_map(global_, world_, robot_.position(), cfg_.sensing_radius);
      const auto hit = check_collision(local, path_, cfg_.robot_radius, progress_ + 1);
      if (!hit) {
        take_step(path_.points[progress_ + 1]);
        ++progress_;
        continue;
      }
      handle_block(*hit);
    }
  }

  void plan() {
    const OccupancyGrid planning = inflate(global_, cfg_.inflation);
    auto start = global_.cell_of(robot_.position());
    if (!start) throw OutOfBounds("robot is outside the map");
    if (planning.occupied(*start)) {
      start = nearest_free(planning, *start);
      if (!start) throw NoPath("no free cell in the planning map");
    }
    const auto goal = global_.cell_of(goal_);
    if (!goal) throw OutOfBounds("goal is outside the map");
    path_ = astar(planning, *start, *goal);
    report_.paths.push_back(path_);
    progress_ = 0;
  }

  void replan() {
    if (++report_.replans > cfg_.max_replans) throw NoPath("replan limit reached");
    plan();
    emit(EventKind::Replan, robot_.position());
  }

  void take_step(Vec2 target) {
    if (report_.steps >= cfg_.max_steps) throw StepLimitExceeded("step limit reached");
    const auto t0 = Clock::now();
    const Vec2 d = target - robot_.position();
    const double len = d.norm();
    if (len > 0.0) {
      const double dt = len / cfg_.step_speed;
      std::vector<std::size_t> ids(world_.objects.size());
      for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = i;
      dynamics::PhysicsParams physics = cfg_.physics;
      physics.virtual_forces = false;
      const dynamics::Model model = world_model(world_, ids, cfg_.robot_radius, physics);
      dynamics::Control u = idle_control(model);
      u.base = {d.x / dt, d.y / dt, 0.0};
      const dynamics::WorldState x = dynamics::step(world_state(world_, ids, robot_), u, dt, model);
      robot_ = {target.x, target.y, x.robot.theta};
      for (std::size_t i = 0; i < ids.size(); ++i) world_.objects[i].pose = x.objects[i];
      time_ += dt;
    }
    report_.times.execution += seconds_since(t0);
    ++report_.steps;
    record_frame();
  }

  void record_frame() {
    Frame f;
    f.time = time_;
    f.robot = robot_;
    for (const UnknownObject& o : world_.objects) f.objects.push_back(o.pose);
    f.path_id = report_.paths.empty() ? 0 : report_.paths.size() - 1;
    f.static_count = report_.added_statics.size();
    report_.frames.push_back(std::move(f));
  }

  NavEvent& emit(EventKind kind, Vec2 where, std::optional<std::size_t> object = std::nullopt, bool success = true) {
    NavEvent e;
    e.kind = kind;
    e.time = time_;
    e.step = report_.steps;
    e.where = where;
    e.object = object;
    e.success = success;
    report_.events.push_back(std::move(e));
    return report_.events.back();
  }

  std::size_t nearest_object(Vec2 p) const {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < world_.objects.size(); ++i) {
      const double d = signed_distance_circle_polygon({p, 0.0}, world_.objects[i].footprint()).distance;
      if (d < best_d) {
        best_d = d;
        best = i;
      }
    }
    if (!std::isfinite(best_d)) throw Error("blocked by something that is not an object");
    return best;
  }

  // Perceives the scene around o and binds the blocking primitive to an obstacle.
  BlockReport perceive(const CollisionHit& hit) {
    BlockReport block;
    block.o = hit.point;
    block.path_index = hit.index;

    const Vec2 look = hit.point - robot_.position();
    const Pose2 sensor{robot_.x, robot_.y, std::atan2(look.y, look.x)};
    const std::uint64_t seed = cfg_.seed + 7919u * static_cast<std::uint64_t>(report_.blocks.size());
    perception::PointCloud cloud = perception::synthesize_cloud(world_, sensor, cfg_.sensor, seed);
    if (cfg_.voxel_leaf > 0.0) cloud = perception::voxel_downsample(cloud, cfg_.voxel_leaf);
    std::vector<perception::Cluster> clusters = perception::cluster_cloud(cloud, cfg_.cluster);

    std::vector<perception::Primitive> psi;
    std::vector<std::size_t> owner;
    for (std::size_t c = 0; c < clusters.size(); ++c) {
      if (clusters[c].points.size() < cfg_.extract.ransac.min_inliers) continue;
      perception::ExtractParams ep = cfg_.extract;
      ep.ransac.seed = seed + 31u * c;
      ep.ransac.viewpoint = cloud.sensor_position();
      clusters[c].primitives = perception::extract_primitives(clusters[c], ep);
      for (const auto& p : clusters[c].primitives) {
        psi.push_back(p);
        owner.push_back(c);
      }
    }

    const auto idx = filter_primitive(psi, hit.point, cfg_.inflation + cfg_.filter_margin, cfg_.caps.perp_tol);
    if (idx) {
      const perception::Cluster& cluster = clusters[owner[*idx]];
      block.blocking_primitive = psi[*idx];
      Vec2 centroid;
      for (const auto& p : cluster.points) centroid = centroid + Vec2{p.x(), p.y()};
      centroid = centroid * (1.0 / static_cast<double>(cluster.points.size()));
      const std::size_t id = nearest_object(centroid);
      const Polygon fp = cluster.footprint ? *cluster.footprint : world_.objects[id].footprint();
      block.obstacle = affordance::make_obstacle(fp, cluster.primitives, id, cfg_.caps);
    } else {
      const std::size_t id = nearest_object(hit.point);
      block.obstacle = affordance::make_obstacle(world_.objects[id].footprint(), {}, id, cfg_.caps);
    }
    return block;
  }

  void handle_block(const CollisionHit& hit) {
    emit(EventKind::Block, hit.point);
    BlockReport block;
    if (cfg_.use_affordances) {
      const auto t0 = Clock::now();
      block = perceive(hit);
      const std::size_t id = *block.obstacle.object_id;
      report_.events.back().object = id;
      const auto known = movability_.find(id);
      if (known != movability_.end()) {
        block.obstacle.movability = known->second;
      } else {
        const affordance::Movability m = affordance::assess(block.obstacle, world_, cfg_.caps);
        if (block.obstacle.lift_probes > 0) {
          emit(EventKind::ProbeLift, hit.point, id, m == affordance::Movability::Liftable);
        }
        if (block.obstacle.push_probes > 0) {
          emit(EventKind::ProbePush, hit.point, id, m == affordance::Movability::Pushable);
        }
        movability_[id] = m;
      }
      report_.times.affordance += seconds_since(t0);
    } else {
      block.o = hit.point;
      block.path_index = hit.index;
      const std::size_t id = nearest_object(hit.point);
      report_.events.back().object = id;
      block.obstacle = affordance::make_obstacle(world_.objects[id].footprint(), {}, id, cfg_.caps);
      block.obstacle.movability = affordance::Movability::Unmovable;
    }
    report_.blocks.push_back(block);

    const std::size_t id = *block.obstacle.object_id;
    switch (block.obstacle.movability) {
      case affordance::Movability::Liftable:
        if (lift(block, id)) return;
        break;
      case affordance::Movability::Pushable:
        if (push(block, id)) return;
        break;
      default:
        break;
    }
    add_static(block, id);
  }

  bool lift(const BlockReport& block, std::size_t id) {
    try {
      clear_obstacle_lift(world_, id, global_, path_, progress_ + 1, cfg_.inflation, robot_.position(),
                          cfg_.robot_radius, cfg_.lift);
    } catch (const NoPlacementFound& e) {
      emit(EventKind::Lift, block.o, id, false).detail = e.what();
      movability_[id] = affordance::Movability::Unmovable;
      return false;
    }
    emit(EventKind::Lift, world_.objects[id].pose.position(), id);
    record_frame();
    return true;
  }

  bool push(const BlockReport& block, std::size_t id) {
    PushOutcome out = execute_push(world_, robot_, id, global_, path_, block.path_index, cfg_.robot_radius, cfg_.physics, cfg_.push);
    if (!out.solution.trace.empty() || out.status == PushStatus::NotConverged) {
      NavEvent& e = emit(EventKind::Cito, out.goal, id, out.status != PushStatus::NotConverged);
      e.iterations = out.solution.iterations;
      e.cost = out.solution.cost;
    }
    report_.times.cito += out.cito_seconds;
    for (std::size_t i = 1; i < out.executed.size(); ++i) {
      time_ += cfg_.push.dt;
      Frame f;
      f.time = time_;
      f.robot = out.executed[i].robot;
      for (const UnknownObject& o : world_.objects) f.objects.push_back(o.pose);
      for (std::size_t k = 0; k < out.object_ids.size(); ++k) f.objects[out.object_ids[k]] = out.executed[i].objects[k];
      f.path_id = report_.paths.size() - 1;
      f.static_count = report_.added_statics.size();
      report_.frames.push_back(std::move(f));
    }
    report_.times.execution += out.execution_seconds;
    const bool ok = out.status == PushStatus::Success;
    emit(EventKind::Push, robot_.position(), id, ok).detail = ok ? std::string() : out.detail;
    const bool executed = !out.executed.empty();
    report_.pushes.push_back(std::move(out));
    if (ok) {
      plan();
      return true;
    }
    if (++push_attempts_[id] < cfg_.max_push_attempts && executed) {
      replan();
      return true;
    }
    movability_[id] = affordance::Movability::Unmovable;
    return false;
  }

  void add_static(const BlockReport& block, std::size_t id) {
    std::size_t grown = global_.rasterize(block.obstacle.footprint);
    const Polygon truth = world_.objects[id].footprint();
    grown += global_.rasterize(truth);
    if (grown == 0) throw NoPath("blocking obstacle is already part of the map");
    report_.added_statics.push_back(truth);
    emit(EventKind::AddStatic, block.o, id);
    replan();
    record_frame();
  }

  PlannerConfig cfg_;
  World world_;
  Pose2 robot_;
  Vec2 goal_;
  OccupancyGrid global_;
  GridPath path_;
  std::size_t progress_ = 0;
  double time_ = 0.0;
  std::map<std::size_t, affordance::Movability> movability_;
  std::map<std::size_t, int> push_attempts_;
  NavReport report_;
};

}  // namespace

NavReport namo_planner(const World& world, Pose2 start, Vec2 goal, const PlannerConfig& config) {
  return Planner(world, start, goal, config).run();
}

}  // namespace namo::nav
