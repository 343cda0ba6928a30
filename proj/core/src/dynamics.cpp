#include "namo/dynamics.hpp"

#include <algorithm>
#include <cmath>

#include "namo/errors.hpp"

namespace namo::dynamics {

std::size_t Model::num_pairs() const {
  std::size_t n = 0;
  for (const ObjectProps& o : objects) n += o.footprint.size();
  return n;
}

Eigen::VectorXd WorldState::to_vector() const {
  const std::size_t n = objects.size();
  Eigen::VectorXd v(dim());
  v << robot.x, robot.y, robot.theta, Eigen::VectorXd::Zero(3 * n), robot_vel.vx, robot_vel.vy,
      robot_vel.omega, Eigen::VectorXd::Zero(3 * n);
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Index q = 3 + 3 * static_cast<Eigen::Index>(i);
    const Eigen::Index qd = 6 + 3 * static_cast<Eigen::Index>(n + i);
    v[q] = objects[i].x;
    v[q + 1] = objects[i].y;
    v[q + 2] = objects[i].theta;
    v[qd] = object_vels[i].vx;
    v[qd + 1] = object_vels[i].vy;
    v[qd + 2] = object_vels[i].omega;
  }
  return v;
}

WorldState WorldState::from_vector(const Eigen::VectorXd& v, std::size_t num_objects) {
  if (static_cast<std::size_t>(v.size()) != 6 + 6 * num_objects) {
    throw DimensionMismatch("state vector has wrong dimension");
  }
  const Eigen::Index n = static_cast<Eigen::Index>(num_objects);
  WorldState s;
  s.robot = {v[0], v[1], v[2]};
  s.robot_vel = {v[3 + 3 * n], v[4 + 3 * n], v[5 + 3 * n]};
  s.objects.resize(num_objects);
  s.object_vels.resize(num_objects);
  for (Eigen::Index i = 0; i < n; ++i) {
    s.objects[static_cast<std::size_t>(i)] = {v[3 + 3 * i], v[4 + 3 * i], v[5 + 3 * i]};
    const Eigen::Index qd = 6 + 3 * n + 3 * i;
    s.object_vels[static_cast<std::size_t>(i)] = {v[qd], v[qd + 1], v[qd + 2]};
  }
  return s;
}

bool WorldState::is_finite() const {
  return to_vector().allFinite();
}

Eigen::VectorXd Control::to_vector() const {
  Eigen::VectorXd v(dim());
  v[0] = base.vx;
  v[1] = base.vy;
  v[2] = base.omega;
  for (std::size_t i = 0; i < stiffness.size(); ++i) {
    v[3 + static_cast<Eigen::Index>(i)] = stiffness[i];
  }
  return v;
}

Control Control::from_vector(const Eigen::VectorXd& v) {
  if (v.size() < 3) throw DimensionMismatch("control vector needs at least 3 entries");
  Control u;
  u.base = {v[0], v[1], v[2]};
  u.stiffness.assign(v.data() + 3, v.data() + v.size());
  return u;
}

double virtual_force_magnitude(double stiffness, double phi, const VscmParams& params) {
  return stiffness * std::exp(-params.alpha * phi);
}

Wrench generalized_virtual_wrench(Vec2 normal, Vec2 lever, double gamma) {
  return {normal * gamma, gamma * cross(lever, normal)};
}

Polygon object_footprint(const Model& model, const WorldState& state, std::size_t i) {
  return model.objects[i].footprint.transformed(state.objects[i]);
}

std::vector<ContactPair> contact_pairs(const Model& model, const WorldState& state) {
  std::vector<ContactPair> pairs;
  pairs.reserve(model.num_pairs());
  const Circle base{state.robot.position(), model.robot_radius};
  for (std::size_t i = 0; i < model.num_objects(); ++i) {
    const Polygon footprint = object_footprint(model, state, i);
    const Vec2 lever = base.center - state.objects[i].position();
    for (std::size_t e = 0; e < footprint.size(); ++e) {
      const SignedDistance sd = signed_distance_circle_edge(base, footprint, e);
      pairs.push_back({i, e, footprint.edge_normal(e), lever, sd.distance});
    }
  }
  return pairs;
}

namespace {

Wrench penalty_wrench(const Model& model, const WorldState& state, std::size_t i,
                      const Polygon& footprint) {
  const Circle base{state.robot.position(), model.robot_radius};
  const SignedDistance sd = signed_distance_circle_polygon(base, footprint);
  if (sd.distance >= 0.0) return {};

  const PhysicsParams& p = model.params;
  const ObjectProps& obj = model.objects[i];
  const Vec2 com = state.objects[i].position();
  const Velocity2& ov = state.object_vels[i];
  const Vec2 r = sd.witness - com;
  const Vec2 point_vel = ov.linear() + perp(r) * ov.omega;
  const Vec2 rel = state.robot_vel.linear() - point_vel;

  // The base presses along -n; phi shrinks when the base moves along -n.
  const double phi_rate = dot(rel, sd.normal);
  double fn = p.k_pen * (-sd.distance);
  if (p.critical_damping) fn -= 2.0 * std::sqrt(p.k_pen * obj.mass) * phi_rate;
  fn = std::max(fn, 0.0);

  const Vec2 tangent = perp(sd.normal);
  const double ft = p.mu_contact * fn * std::tanh(dot(rel, tangent) / p.v_eps);
  const Vec2 force = -sd.normal * fn + tangent * ft;
  return {force, cross(r, force)};
}

void integrate_object(const ObjectProps& obj, const PhysicsParams& p, const Wrench& w, double h,
                      Pose2& pose, Velocity2& vel) {
  // Implicit (proximal) Coulomb friction: the object sticks exactly when the
  // impulse of the applied wrench stays inside the friction cone.
  const double slip_impulse = h * obj.mu_s * obj.mass * p.gravity;
  const Vec2 momentum = vel.linear() * obj.mass + w.force * h;
  const double pn = momentum.norm();
  Vec2 v;
  if (pn > slip_impulse) {
    v = momentum * ((pn - slip_impulse) / (pn * (obj.mass + h * obj.mu_v)));
  }
  const double gyration = std::sqrt(obj.inertia / obj.mass);
  const double twist_impulse = slip_impulse * gyration;
  const double ang = vel.omega * obj.inertia + w.torque * h;
  double omega = 0.0;
  if (std::abs(ang) > twist_impulse) {
    omega = std::copysign(std::abs(ang) - twist_impulse, ang) /
            (obj.inertia + h * obj.mu_v * gyration * gyration);
  }
  vel = {v.x, v.y, omega};
  pose.x += h * v.x;
  pose.y += h * v.y;
  pose.theta = normalize_angle(pose.theta + h * omega);
}

void substep(WorldState& s, const Control& u, double h, const Model& model) {
  const PhysicsParams& p = model.params;
  if (p.base_lag > 0.0) {
    const double a = std::min(1.0, h / p.base_lag);
    s.robot_vel.vx += a * (u.base.vx - s.robot_vel.vx);
    s.robot_vel.vy += a * (u.base.vy - s.robot_vel.vy);
    s.robot_vel.omega += a * (u.base.omega - s.robot_vel.omega);
  } else {
    s.robot_vel = u.base;
  }
  s.robot.x += h * s.robot_vel.vx;
  s.robot.y += h * s.robot_vel.vy;
  s.robot.theta = normalize_angle(s.robot.theta + h * s.robot_vel.omega);

  std::vector<Wrench> applied(model.num_objects());
  if (p.virtual_forces) applied = virtual_wrenches(model, s, u.stiffness);
  for (std::size_t i = 0; i < model.num_objects(); ++i) {
    const Polygon footprint = object_footprint(model, s, i);
    const Wrench contact = penalty_wrench(model, s, i, footprint);
    applied[i].force += contact.force;
    applied[i].torque += contact.torque;
  }
  for (std::size_t i = 0; i < model.num_objects(); ++i) {
    integrate_object(model.objects[i], p, applied[i], h, s.objects[i], s.object_vels[i]);
  }
}

}  // namespace

Wrench physical_contact_force(const Model& model, const WorldState& state, std::size_t object) {
  return penalty_wrench(model, state, object, object_footprint(model, state, object));
}

std::vector<Wrench> virtual_wrenches(const Model& model, const WorldState& state,
                                     const std::vector<double>& stiffness) {
  if (stiffness.size() != model.num_pairs()) {
    throw DimensionMismatch("stiffness vector length must equal the number of contact pairs");
  }
  std::vector<Wrench> out(model.num_objects());
  const auto pairs = contact_pairs(model, state);
  for (std::size_t j = 0; j < pairs.size(); ++j) {
    if (stiffness[j] == 0.0) continue;
    const double gamma = virtual_force_magnitude(stiffness[j], pairs[j].phi, model.params.vscm);
    // The base presses on the surface, so the force acts along the inward normal.
    const Wrench w = generalized_virtual_wrench(-pairs[j].normal, pairs[j].lever, gamma);
    out[pairs[j].object].force += w.force;
    out[pairs[j].object].torque += w.torque;
  }
  return out;
}

WorldState step(const WorldState& x, const Control& u, double dt, const Model& model) {
  if (x.objects.size() != model.num_objects() || x.object_vels.size() != model.num_objects()) {
    throw DimensionMismatch("state does not match the model's object count");
  }
  if (u.stiffness.size() != model.num_pairs()) {
    throw DimensionMismatch("control stiffness length must equal the number of contact pairs");
  }
  if (!(dt > 0.0)) throw DimensionMismatch("dt must be positive");
  const int substeps = std::max(1, static_cast<int>(std::lround(dt / model.params.dt_sub)));
  const double h = dt / substeps;
  WorldState s = x;
  for (int k = 0; k < substeps; ++k) substep(s, u, h, model);
  if (!s.is_finite()) throw NonFiniteState("integration produced a non-finite state", 0);
  return s;
}

std::vector<WorldState> rollout(const WorldState& x0, const std::vector<Control>& controls,
                                double dt, const Model& model) {
  std::vector<WorldState> xs;
  xs.reserve(controls.size() + 1);
  xs.push_back(x0);
  for (std::size_t i = 0; i < controls.size(); ++i) {
    try {
      xs.push_back(step(xs.back(), controls[i], dt, model));
    } catch (const NonFiniteState&) {
      throw NonFiniteState("rollout diverged", i);
    }
  }
  return xs;
}

double object_kinetic_energy(const Model& model, const WorldState& state) {
  double e = 0.0;
  for (std::size_t i = 0; i < model.num_objects(); ++i) {
    const auto& v = state.object_vels[i];
    e += 0.5 * model.objects[i].mass * (v.vx * v.vx + v.vy * v.vy) +
         0.5 * model.objects[i].inertia * v.omega * v.omega;
  }
  return e;
}

}  // namespace namo::dynamics
