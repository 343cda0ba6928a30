#pragma once

#include <Eigen/Core>
#include <vector>

#include "namo/geometry.hpp"

namespace namo::dynamics {

struct Velocity2 {
  double vx = 0.0;
  double vy = 0.0;
  double omega = 0.0;

  constexpr Vec2 linear() const { return {vx, vy}; }
  bool operator==(const Velocity2&) const = default;
};

struct Wrench {
  Vec2 force;
  double torque = 0.0;
};

// Mass properties and ground contact of one movable object. The footprint is
// expressed in the body frame with the centre of mass at the origin.
struct ObjectProps {
  double mass = 1.0;
  double inertia = 0.1;
  double mu_s = 0.3;  // static / Coulomb ground friction
  double mu_v = 0.0;  // viscous ground damping, N s/m
  Polygon footprint;
};

struct VscmParams {
  double alpha = 25.0;  // curvature, 1/m
  double k_max = 30.0;
};

struct PhysicsParams {
  double dt_sub = 0.01;
  double gravity = 9.81;
  double k_pen = 2000.0;         // penalty stiffness, N/m
  bool critical_damping = true;  // on the normal penetration rate
  double mu_contact = 0.2;       // base/object tangential friction
  double v_eps = 0.01;           // tangential friction regularization, m/s
  double base_lag = 0.0;         // first-order actuation lag of the base, s (0 = none)
  bool virtual_forces = true;    // false during real execution
  VscmParams vscm;
};

// Everything that is fixed during a rollout.
struct Model {
  double robot_radius = 0.25;
  std::vector<ObjectProps> objects;
  PhysicsParams params;

  std::size_t num_objects() const { return objects.size(); }
  // Number of base/surface contact pairs: one per footprint edge.
  std::size_t num_pairs() const;
  std::size_t state_dim() const { return 6 + 6 * objects.size(); }
  std::size_t control_dim() const { return 3 + num_pairs(); }
};

// x = [q_r, q_o, qdot_r, qdot_o].
struct WorldState {
  Pose2 robot;
  Velocity2 robot_vel;
  std::vector<Pose2> objects;
  std::vector<Velocity2> object_vels;

  std::size_t dim() const { return 6 + 6 * objects.size(); }
  Eigen::VectorXd to_vector() const;
  static WorldState from_vector(const Eigen::VectorXd& v, std::size_t num_objects);
  bool is_finite() const;
  bool operator==(const WorldState&) const = default;
};

// u = [qdot_r command, k].
struct Control {
  Velocity2 base;
  std::vector<double> stiffness;

  std::size_t dim() const { return 3 + stiffness.size(); }
  Eigen::VectorXd to_vector() const;
  static Control from_vector(const Eigen::VectorXd& v);
  bool operator==(const Control&) const = default;
};

struct ContactPair {
  std::size_t object = 0;
  std::size_t edge = 0;
  Vec2 normal;      // outward unit normal of the surface
  Vec2 lever;       // object centre of mass -> base centre
  double phi = 0.0; // signed distance base <-> surface
};

// gamma = k exp(-alpha phi).
double virtual_force_magnitude(double stiffness, double phi, const VscmParams& params);

// Planar reduction of gamma [I; l^]^T n: force gamma n, torque gamma (l x n).
Wrench generalized_virtual_wrench(Vec2 normal, Vec2 lever, double gamma);
inline Wrench generalized_virtual_wrench(const ContactPair& pair, double gamma) {
  return generalized_virtual_wrench(pair.normal, pair.lever, gamma);
}

std::vector<ContactPair> contact_pairs(const Model& model, const WorldState& state);

// Penalty force exerted by the base on one object: zero unless the base
// penetrates the footprint. The normal component pushes into the object.
Wrench physical_contact_force(const Model& model, const WorldState& state, std::size_t object);

// Net virtual wrench on every object for stiffness vector k (length n_p).
std::vector<Wrench> virtual_wrenches(const Model& model, const WorldState& state,
                                     const std::vector<double>& stiffness);

// Advances the world by dt with zero-order-hold control, sub-stepping at
// params.dt_sub. Throws NonFiniteState.
WorldState step(const WorldState& x, const Control& u, double dt, const Model& model);

// X[0] = x0, X[i+1] = step(X[i], U[i]).
std::vector<WorldState> rollout(const WorldState& x0, const std::vector<Control>& controls,
                                double dt, const Model& model);

double object_kinetic_energy(const Model& model, const WorldState& state);

// World-frame footprint of object i.
Polygon object_footprint(const Model& model, const WorldState& state, std::size_t i);

}  // namespace namo::dynamics
