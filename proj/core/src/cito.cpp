#include "namo/cito.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "namo/errors.hpp"

namespace namo::cito {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::Index velocity_offset(std::size_t num_objects) {
  return 3 + 3 * static_cast<Eigen::Index>(num_objects);
}

// Merit of a trajectory given as stacked state vectors. The trajectory cost
// is a convex quadratic in the states plus a linear term in k, so the same
// routine evaluates both the true and the linearized model.
double merit_from_vectors(const std::vector<Eigen::VectorXd>& xs, const std::vector<Eigen::VectorXd>& us,
                          const CitoProblem& p, double penalty) {
  const Eigen::Index voff = velocity_offset(p.model.num_objects());
  const Eigen::Index nv = static_cast<Eigen::Index>(xs.front().size()) - voff;
  double c = 0.0;
  for (std::size_t i = 0; i < us.size(); ++i) {
    c += p.w2 * xs[i].segment(voff, nv).squaredNorm() + p.w3 * us[i].tail(us[i].size() - 3).sum();
  }
  const Eigen::VectorXd& last = xs.back();
  c += p.w1 * (std::pow(last[0] - p.goal.x, 2) + std::pow(last[1] - p.goal.y, 2));
  if (penalty > 0.0) {
    double viol = 0.0;
    for (std::size_t i = 1; i < xs.size(); ++i) {
      viol += (p.x_lower - xs[i]).cwiseMax(0.0).sum() + (xs[i] - p.x_upper).cwiseMax(0.0).sum();
    }
    c += penalty * viol;
  }
  return c;
}

double merit(const std::vector<WorldState>& X, const std::vector<Control>& U, const CitoProblem& p,
             double penalty) {
  return total_cost(X, U, p) + penalty * bound_violation(X, p);
}

bool controls_within_bounds(const std::vector<Control>& U, const CitoProblem& p, double tol) {
  for (const Control& u : U) {
    const Eigen::VectorXd v = u.to_vector();
    if (v.size() != p.u_lower.size()) return false;
    if (((p.u_lower.array() - tol) > v.array()).any() || (v.array() > (p.u_upper.array() + tol)).any()) {
      return false;
    }
  }
  return true;
}

}  // namespace

void CitoProblem::validate() const {
  const auto nx = static_cast<Eigen::Index>(model.state_dim());
  const auto nu = static_cast<Eigen::Index>(model.control_dim());
  if (N < 1) throw DimensionMismatch("N must be at least 1");
  if (!(dt > 0.0)) throw DimensionMismatch("dt must be positive");
  if (x0.objects.size() != model.num_objects()) {
    throw DimensionMismatch("x0 object count does not match the model");
  }
  if (u_lower.size() != nu || u_upper.size() != nu) throw DimensionMismatch("control bounds size");
  if (x_lower.size() != nx || x_upper.size() != nx) throw DimensionMismatch("state bounds size");
  if ((u_lower.array() > u_upper.array()).any() || (x_lower.array() > x_upper.array()).any()) {
    throw Error("bounds are not ordered");
  }
  if (w1 < 0.0 || w2 < 0.0 || w3 < 0.0) throw Error("weights must be non-negative");
}

CitoProblem make_problem(const dynamics::Model& model, const WorldState& x0, Vec2 goal,
                         const CorridorSpec& corridor, int N, double dt) {
  CitoProblem p;
  p.N = N;
  p.dt = dt;
  p.model = model;
  p.x0 = x0;
  p.goal = goal;
  const auto nu = static_cast<Eigen::Index>(model.control_dim());
  const auto nx = static_cast<Eigen::Index>(model.state_dim());
  p.u_lower = Eigen::VectorXd::Zero(nu);
  p.u_upper = Eigen::VectorXd::Constant(nu, model.params.vscm.k_max);
  p.u_lower.head(3) << -corridor.v_max, -corridor.v_max, -corridor.w_max;
  p.u_upper.head(3) << corridor.v_max, corridor.v_max, corridor.w_max;
  p.x_lower = Eigen::VectorXd::Constant(nx, -kInf);
  p.x_upper = Eigen::VectorXd::Constant(nx, kInf);

  const auto set_box = [&](Eigen::Index at, double margin) {
    p.x_lower[at] = corridor.min.x + margin;
    p.x_upper[at] = corridor.max.x - margin;
    p.x_lower[at + 1] = corridor.min.y + margin;
    p.x_upper[at + 1] = corridor.max.y - margin;
    if (p.x_lower[at] > p.x_upper[at] || p.x_lower[at + 1] > p.x_upper[at + 1]) {
      throw Error("corridor is narrower than a body it must contain");
    }
  };
  set_box(0, model.robot_radius);
  for (std::size_t i = 0; i < model.num_objects(); ++i) {
    double radius = 0.0;
    for (const Vec2& v : model.objects[i].footprint.vertices()) radius = std::max(radius, v.norm());
    set_box(3 + 3 * static_cast<Eigen::Index>(i), radius);
  }
  p.validate();
  return p;
}

double cost_final(const WorldState& x, Vec2 goal, double w1) {
  const Vec2 e = x.robot.position() - goal;
  return w1 * e.squared_norm();
}

double cost_integrated(const WorldState& x, const Control& u, double w2, double w3) {
  double v2 = x.robot_vel.vx * x.robot_vel.vx + x.robot_vel.vy * x.robot_vel.vy +
              x.robot_vel.omega * x.robot_vel.omega;
  for (const auto& v : x.object_vels) v2 += v.vx * v.vx + v.vy * v.vy + v.omega * v.omega;
  double k1 = 0.0;
  for (double k : u.stiffness) k1 += k;  // k >= 0, so this is ||k||_1
  return w2 * v2 + w3 * k1;
}

double total_cost(const std::vector<WorldState>& X, const std::vector<Control>& U,
                  const CitoProblem& problem) {
  if (X.size() != U.size() + 1 || U.empty()) {
    throw DimensionMismatch("total_cost expects N+1 states and N controls");
  }
  double c = cost_final(X.back(), problem.goal, problem.w1);
  for (std::size_t i = 0; i < U.size(); ++i) c += cost_integrated(X[i], U[i], problem.w2, problem.w3);
  return c;
}

double bound_violation(const std::vector<WorldState>& X, const CitoProblem& problem) {
  double v = 0.0;
  for (std::size_t i = 1; i < X.size(); ++i) {
    const Eigen::VectorXd x = X[i].to_vector();
    v += (problem.x_lower - x).cwiseMax(0.0).sum() + (x - problem.x_upper).cwiseMax(0.0).sum();
  }
  return v;
}

Jacobians linearize(const WorldState& x, const Control& u, double dt, const dynamics::Model& model,
                    double fd_step) {
  if (!(fd_step > 0.0)) throw Error("fd_step must be positive");
  const std::size_t n_o = model.num_objects();
  const Eigen::VectorXd xv = x.to_vector();
  const Eigen::VectorXd uv = u.to_vector();
  Jacobians J{Eigen::MatrixXd(xv.size(), xv.size()), Eigen::MatrixXd(xv.size(), uv.size())};
  const double inv = 1.0 / (2.0 * fd_step);
  for (Eigen::Index j = 0; j < xv.size(); ++j) {
    Eigen::VectorXd xp = xv, xm = xv;
    xp[j] += fd_step;
    xm[j] -= fd_step;
    J.A.col(j) = (dynamics::step(WorldState::from_vector(xp, n_o), u, dt, model).to_vector() -
                  dynamics::step(WorldState::from_vector(xm, n_o), u, dt, model).to_vector()) * inv;
  }
  for (Eigen::Index j = 0; j < uv.size(); ++j) {
    Eigen::VectorXd up = uv, um = uv;
    up[j] += fd_step;
    um[j] -= fd_step;
    J.B.col(j) = (dynamics::step(x, Control::from_vector(up), dt, model).to_vector() -
                  dynamics::step(x, Control::from_vector(um), dt, model).to_vector()) * inv;
  }
  return J;
}

SubproblemResult solve_subproblem(const CitoProblem& p, const std::vector<WorldState>& X,
                                  const std::vector<Control>& U,
                                  const std::vector<Jacobians>& jac, double radius,
                                  const ScvxSettings& settings) {
  const std::size_t N = U.size();
  if (X.size() != N + 1 || jac.size() != N || N == 0) {
    throw DimensionMismatch("subproblem expects N controls, N+1 states and N Jacobians");
  }
  const Eigen::Index nx = static_cast<Eigen::Index>(p.model.state_dim());
  const Eigen::Index nu = static_cast<Eigen::Index>(p.model.control_dim());
  const Eigen::Index nN = static_cast<Eigen::Index>(N);
  const Eigen::Index voff = velocity_offset(p.model.num_objects());
  const Eigen::Index nv = nx - voff;
  const double penalty = settings.bound_penalty;

  std::vector<Eigen::VectorXd> xs(N + 1), us(N);
  for (std::size_t i = 0; i <= N; ++i) xs[i] = X[i].to_vector();
  for (std::size_t i = 0; i < N; ++i) us[i] = U[i].to_vector();

  std::vector<Eigen::Index> bounded;
  for (Eigen::Index r = 0; r < nx; ++r) {
    if (std::isfinite(p.x_lower[r]) || std::isfinite(p.x_upper[r])) bounded.push_back(r);
  }
  const Eigen::Index nb = static_cast<Eigen::Index>(bounded.size());
  const Eigen::Index n_ctrl = nN * nu;
  const Eigen::Index n = n_ctrl + nN * nb;

  // Condensed sensitivities: delta x_i = G[i] * delta U.
  std::vector<Eigen::MatrixXd> G(N + 1, Eigen::MatrixXd::Zero(nx, n_ctrl));
  for (std::size_t i = 0; i < N; ++i) {
    G[i + 1] = jac[i].A * G[i];
    G[i + 1].middleCols(static_cast<Eigen::Index>(i) * nu, nu) += jac[i].B;
  }

  QpProblem qp;
  qp.P = Eigen::MatrixXd::Zero(n, n);
  qp.q = Eigen::VectorXd::Zero(n);
  auto Pc = qp.P.topLeftCorner(n_ctrl, n_ctrl);
  auto qc = qp.q.head(n_ctrl);
  for (std::size_t i = 1; i < N; ++i) {
    const Eigen::MatrixXd Gv = G[i].middleRows(voff, nv);
    Pc.noalias() += 2.0 * p.w2 * Gv.transpose() * Gv;
    qc.noalias() += 2.0 * p.w2 * Gv.transpose() * xs[i].segment(voff, nv);
  }
  {
    const Eigen::MatrixXd Gp = G[N].topRows(2);
    Eigen::Vector2d err(xs[N][0] - p.goal.x, xs[N][1] - p.goal.y);
    Pc.noalias() += 2.0 * p.w1 * Gp.transpose() * Gp;
    qc.noalias() += 2.0 * p.w1 * Gp.transpose() * err;
  }
  for (Eigen::Index i = 0; i < nN; ++i) {
    qc.segment(i * nu + 3, nu - 3).array() += p.w3;
  }
  qp.q.tail(nN * nb).setConstant(penalty);

  // Constraint rows: controls, then state bounds with slacks, then slack >= 0.
  Eigen::Index rows = n_ctrl + nN * nb;
  for (Eigen::Index r : bounded) {
    rows += nN * ((std::isfinite(p.x_lower[r]) ? 1 : 0) + (std::isfinite(p.x_upper[r]) ? 1 : 0));
  }
  qp.A = Eigen::MatrixXd::Zero(rows, n);
  qp.l = Eigen::VectorXd::Constant(rows, -kInf);
  qp.u = Eigen::VectorXd::Constant(rows, kInf);
  Eigen::VectorXd du_lo(n_ctrl), du_hi(n_ctrl);
  for (Eigen::Index i = 0; i < nN; ++i) {
    for (Eigen::Index j = 0; j < nu; ++j) {
      const Eigen::Index c = i * nu + j;
      du_lo[c] = std::max(p.u_lower[j] - us[static_cast<std::size_t>(i)][j], -radius);
      du_hi[c] = std::min(p.u_upper[j] - us[static_cast<std::size_t>(i)][j], radius);
      if (du_lo[c] > du_hi[c]) {
        throw SubproblemInfeasible("control bounds and trust region do not intersect");
      }
      qp.A(c, c) = 1.0;
      qp.l[c] = du_lo[c];
      qp.u[c] = du_hi[c];
    }
  }
  Eigen::Index row = n_ctrl;
  for (Eigen::Index i = 1; i <= nN; ++i) {
    for (Eigen::Index b = 0; b < nb; ++b) {
      const Eigen::Index r = bounded[static_cast<std::size_t>(b)];
      const Eigen::Index slack = n_ctrl + (i - 1) * nb + b;
      const double xr = xs[static_cast<std::size_t>(i)][r];
      if (std::isfinite(p.x_lower[r])) {
        qp.A.row(row).head(n_ctrl) = G[static_cast<std::size_t>(i)].row(r);
        qp.A(row, slack) = 1.0;
        qp.l[row] = p.x_lower[r] - xr;
        ++row;
      }
      if (std::isfinite(p.x_upper[r])) {
        qp.A.row(row).head(n_ctrl) = G[static_cast<std::size_t>(i)].row(r);
        qp.A(row, slack) = -1.0;
        qp.u[row] = p.x_upper[r] - xr;
        ++row;
      }
    }
  }
  for (Eigen::Index s = 0; s < nN * nb; ++s, ++row) {
    qp.A(row, n_ctrl + s) = 1.0;
    qp.l[row] = 0.0;
  }

  const QpResult sol = solve_qp(qp, settings.qp);
  if (!sol.converged) throw MaxInnerIterations("QP solver hit its iteration limit");

  // Clip to the exact feasible box; ADMM feasibility is only to tolerance.
  const Eigen::VectorXd du = sol.x.head(n_ctrl).cwiseMax(du_lo).cwiseMin(du_hi);
  SubproblemResult out;
  out.qp_iterations = sol.iterations;
  std::vector<Eigen::VectorXd> xs_lin(N + 1), us_new(N);
  for (std::size_t i = 0; i <= N; ++i) xs_lin[i] = xs[i] + G[i] * du;
  out.U.reserve(N);
  for (std::size_t i = 0; i < N; ++i) {
    us_new[i] = us[i] + du.segment(static_cast<Eigen::Index>(i) * nu, nu);
    us_new[i] = us_new[i].cwiseMax(p.u_lower).cwiseMin(p.u_upper);
    out.U.push_back(Control::from_vector(us_new[i]));
  }
  out.predicted_cost = merit_from_vectors(xs_lin, us_new, p, penalty);
  out.model_cost = merit_from_vectors(xs, us, p, penalty);
  return out;
}

double sum_stiffness(const std::vector<Control>& U) {
  double s = 0.0;
  for (const Control& u : U) {
    for (double k : u.stiffness) s += k;
  }
  return s;
}

double max_stiffness(const std::vector<Control>& U) {
  double m = 0.0;
  for (const Control& u : U) {
    for (double k : u.stiffness) m = std::max(m, k);
  }
  return m;
}

std::vector<Control> straight_line_init(const CitoProblem& p) {
  Control u;
  const Vec2 v = (p.goal - p.x0.robot.position()) / (p.N * p.dt);
  u.base = {std::clamp(v.x, p.u_lower[0], p.u_upper[0]), std::clamp(v.y, p.u_lower[1], p.u_upper[1]),
            0.0};
  u.stiffness.assign(p.model.num_pairs(), 0.0);
  return std::vector<Control>(static_cast<std::size_t>(p.N), u);
}

std::vector<Control> idle_init(const CitoProblem& p) {
  Control u;
  u.stiffness.assign(p.model.num_pairs(), 0.0);
  return std::vector<Control>(static_cast<std::size_t>(p.N), u);
}

CitoSolution scvx_solve(const CitoProblem& problem, const std::vector<Control>& U_init,
                        const ScvxSettings& settings) {
  problem.validate();
  if (U_init.size() != static_cast<std::size_t>(problem.N)) {
    throw DimensionMismatch("U_init must have N controls");
  }
  if (!controls_within_bounds(U_init, problem, 1e-12)) {
    throw Error("U_init violates the control bounds");
  }
  const double penalty = settings.bound_penalty;
  const double range = (problem.u_upper - problem.u_lower).lpNorm<Eigen::Infinity>();
  double radius = settings.trust.radius > 0.0 ? settings.trust.radius : 0.5 * range;
  const double max_radius = std::max(range, radius);

  CitoSolution sol;
  std::vector<Control> U = U_init;
  // Re-integration: the state trajectory always comes from a full nonlinear rollout.
  std::vector<WorldState> X = dynamics::rollout(problem.x0, U, problem.dt, problem.model);
  double J = merit(X, U, problem, penalty);
  bool have_accepted = false;

  int it = 0;
  for (it = 1; it <= settings.max_iters; ++it) {
    IterationRecord rec;
    rec.iteration = it;
    rec.radius = radius;

    std::vector<Jacobians> jac;
    jac.reserve(U.size());
    for (std::size_t i = 0; i < U.size(); ++i) {
      jac.push_back(linearize(X[i], U[i], problem.dt, problem.model, settings.fd_step));
    }

    SubproblemResult sub;
    try {
      sub = solve_subproblem(problem, X, U, jac, radius, settings);
    } catch (const MaxInnerIterations&) {
      radius /= settings.trust.shrink;
      rec.cost = J;
      rec.max_k = max_stiffness(U);
      rec.sum_k = sum_stiffness(U);
      sol.trace.push_back(rec);
      if (radius < settings.tol_radius) {
        sol.converged = true;
        break;
      }
      continue;
    }
    rec.predicted_cost = sub.predicted_cost;
    const double predicted = J - sub.predicted_cost;
    if (predicted < settings.tol_cost) {
      // The convex model sees no further improvement within the trust region.
      rec.cost = J;
      rec.rho = 1.0;
      rec.max_k = max_stiffness(U);
      rec.sum_k = sum_stiffness(U);
      sol.trace.push_back(rec);
      sol.converged = true;
      break;
    }

    double J_new = std::numeric_limits<double>::infinity();
    std::vector<WorldState> X_new;
    try {
      X_new = dynamics::rollout(problem.x0, sub.U, problem.dt, problem.model);
      J_new = merit(X_new, sub.U, problem, penalty);
    } catch (const NonFiniteState&) {
    }
    const double actual = J - J_new;
    const double rho = actual / predicted;
    rec.candidate_cost = J_new;
    rec.rho = rho;

    // Only state-feasible iterates are accepted, even from an infeasible start.
    const bool bounds_ok = std::isfinite(J_new) && bound_violation(X_new, problem) <= 1e-6;
    const bool accept = rho >= settings.trust.rho0 && bounds_ok;
    if (accept) {
      U = std::move(sub.U);
      X = std::move(X_new);
      J = J_new;
      if (!have_accepted) {
        sol.first_accepted_sum_k = sum_stiffness(U);
        have_accepted = true;
      }
      if (settings.keep_history) {
        sol.accepted_controls.push_back(U);
        sol.accepted_states.push_back(X);
      }
    }
    if (!accept || rho < settings.trust.rho1) {
      radius /= settings.trust.shrink;
    } else if (rho > settings.trust.rho2) {
      radius = std::min(radius * settings.trust.grow, max_radius);
    }
    rec.accepted = accept;
    rec.cost = J;
    rec.max_k = max_stiffness(U);
    rec.sum_k = sum_stiffness(U);
    sol.trace.push_back(rec);

    if (accept && std::abs(actual) < settings.tol_cost) {
      sol.converged = true;
      break;
    }
    if (radius < settings.tol_radius) {
      sol.converged = true;
      break;
    }
  }

  sol.iterations = std::min(it, settings.max_iters);
  sol.U = std::move(U);
  sol.X = std::move(X);
  sol.cost = total_cost(sol.X, sol.U, problem);
  sol.max_terminal_stiffness = max_stiffness(sol.U);
  sol.final_sum_k = sum_stiffness(sol.U);
  if (!have_accepted) sol.first_accepted_sum_k = sum_stiffness(U_init);
  return sol;
}

}  // namespace namo::cito
