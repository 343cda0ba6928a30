#pragma once

#include <Eigen/Core>
#include <optional>

namespace namo::cito {

// minimize 1/2 x'Px + q'x  subject to  l <= Ax <= u.
// P must be symmetric positive semidefinite; +-infinity bounds are allowed.
struct QpProblem {
  Eigen::MatrixXd P;
  Eigen::VectorXd q;
  Eigen::MatrixXd A;
  Eigen::VectorXd l;
  Eigen::VectorXd u;
};

struct QpSettings {
  double rho = 0.1;
  double sigma = 1e-6;
  double alpha = 1.6;  // over-relaxation
  double eps_abs = 1e-6;
  double eps_rel = 1e-6;
  int max_iter = 10000;
  int check_every = 10;
  bool adaptive_rho = true;
  bool polish = true;
};

struct QpResult {
  Eigen::VectorXd x;
  Eigen::VectorXd y;  // constraint multipliers
  int iterations = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  bool converged = false;
  bool polished = false;
};

// Operator-splitting solver: alternates a regularized equality-constrained
// linear solve with projection of the constraint values onto [l, u], with
// over-relaxation and residual-balanced step size. A final active-set polish
// refines the ADMM point to machine precision when the guess is consistent.
// Throws SubproblemInfeasible when some l_i > u_i.
QpResult solve_qp(const QpProblem& problem, const QpSettings& settings = {},
                  const std::optional<Eigen::VectorXd>& warm_start = std::nullopt);

}  // namespace namo::cito
