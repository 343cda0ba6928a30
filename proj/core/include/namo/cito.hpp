#pragma once

#include <Eigen/Core>
#include <vector>

#include "namo/dynamics.hpp"
#include "namo/geometry.hpp"
#include "namo/qp.hpp"

namespace namo::cito {

using dynamics::Control;
using dynamics::WorldState;

struct CitoProblem {
  int N = 20;
  double dt = 0.5;
  dynamics::Model model;
  WorldState x0;
  Vec2 goal;  // position only, heading is ignored
  Eigen::VectorXd u_lower, u_upper;  // control_dim
  Eigen::VectorXd x_lower, x_upper;  // state_dim, +-inf where unbounded
  double w1 = 2.5e3;
  double w2 = 1e-4;
  double w3 = 7.0;

  // Throws DimensionMismatch or Error on broken invariants.
  void validate() const;
};

struct CorridorSpec {
  Vec2 min;  // rectangle certified free of static obstacles
  Vec2 max;
  double v_max = 2.0;  // m/s
  double w_max = 2.0;  // rad/s
};

// Builds velocity/stiffness bounds and position box bounds: the base centre
// and every object centre must stay inside the corridor shrunk by their radius.
CitoProblem make_problem(const dynamics::Model& model, const WorldState& x0, Vec2 goal,
                         const CorridorSpec& corridor, int N = 20, double dt = 0.5);

struct TrustRegion {
  double radius = -1.0;  // <= 0: 0.5 * ||u_U - u_L||_inf
  double rho0 = 0.0;
  double rho1 = 0.25;
  double rho2 = 0.7;
  double shrink = 2.0;
  double grow = 1.5;
};

struct ScvxSettings {
  TrustRegion trust;
  double tol_cost = 1e-3;
  double tol_radius = 1e-4;
  int max_iters = 100;
  double fd_step = 1e-6;
  // l1 penalty on linearized state-bound violation inside the subproblem.
  double bound_penalty = 1e4;
  bool keep_history = false;
  QpSettings qp;
};

double cost_final(const WorldState& x, Vec2 goal, double w1);
double cost_integrated(const WorldState& x, const Control& u, double w2, double w3);
// C_F(x_{N+1}) + sum_i C_I(x_i, u_i); throws DimensionMismatch.
double total_cost(const std::vector<WorldState>& X, const std::vector<Control>& U,
                  const CitoProblem& problem);
// Sum over x_1..x_{N+1} of the state-bound violation (l1).
double bound_violation(const std::vector<WorldState>& X, const CitoProblem& problem);

struct Jacobians {
  Eigen::MatrixXd A;  // state x state
  Eigen::MatrixXd B;  // state x control
};

// Central finite differences of dynamics::step, column by column.
Jacobians linearize(const WorldState& x, const Control& u, double dt, const dynamics::Model& model,
                    double fd_step = 1e-6);

struct SubproblemResult {
  std::vector<Control> U;
  double predicted_cost = 0.0;  // convexified merit at the new controls
  double model_cost = 0.0;      // convexified merit at U_prev (equals the true merit)
  int qp_iterations = 0;
};

// Minimizes the convexified cost under linearized dynamics, box bounds and
// ||U_new - U_prev||_inf <= radius. Throws SubproblemInfeasible and
// MaxInnerIterations.
SubproblemResult solve_subproblem(const CitoProblem& problem, const std::vector<WorldState>& X,
                                  const std::vector<Control>& U,
                                  const std::vector<Jacobians>& jacobians, double radius,
                                  const ScvxSettings& settings = {});

struct IterationRecord {
  int iteration = 0;
  double cost = 0.0;       // merit after the accept/reject decision
  double candidate_cost = 0.0;
  double predicted_cost = 0.0;
  double rho = 0.0;
  double radius = 0.0;     // radius used for this iteration
  double max_k = 0.0;      // of the current iterate after the decision
  double sum_k = 0.0;
  bool accepted = false;
};

struct CitoSolution {
  std::vector<Control> U;
  std::vector<WorldState> X;
  double cost = 0.0;
  int iterations = 0;
  bool converged = false;
  double max_terminal_stiffness = 0.0;
  double first_accepted_sum_k = 0.0;
  double final_sum_k = 0.0;
  std::vector<IterationRecord> trace;
  // Accepted iterates, only filled when settings.keep_history is set.
  std::vector<std::vector<Control>> accepted_controls;
  std::vector<std::vector<WorldState>> accepted_states;
};

// Straight-line velocity profile to the goal with all stiffnesses zero.
std::vector<Control> straight_line_init(const CitoProblem& problem);
// Zero base velocity and stiffness at every step.
std::vector<Control> idle_init(const CitoProblem& problem);

CitoSolution scvx_solve(const CitoProblem& problem, const std::vector<Control>& U_init,
                        const ScvxSettings& settings = {});

double sum_stiffness(const std::vector<Control>& U);
double max_stiffness(const std::vector<Control>& U);

}  // namespace namo::cito
