#include "namo/qp.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "namo/errors.hpp"

namespace namo::cito {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kRhoMin = 1e-6;
constexpr double kRhoMax = 1e6;
constexpr double kEqualityScale = 1e3;

double inf_norm(const Eigen::VectorXd& v) { return v.size() ? v.lpNorm<Eigen::Infinity>() : 0.0; }

Eigen::VectorXd project(const Eigen::VectorXd& v, const Eigen::VectorXd& l,
                        const Eigen::VectorXd& u) {
  return v.cwiseMax(l).cwiseMin(u);
}

Eigen::VectorXd row_rho(double rho, const Eigen::VectorXd& l, const Eigen::VectorXd& u) {
  Eigen::VectorXd r(l.size());
  for (Eigen::Index i = 0; i < l.size(); ++i) {
    if (std::isinf(l[i]) && std::isinf(u[i])) {
      r[i] = kRhoMin;
    } else if (u[i] - l[i] < 1e-9) {
      r[i] = kEqualityScale * rho;
    } else {
      r[i] = rho;
    }
  }
  return r;
}

struct Residuals {
  double primal, dual, primal_scale, dual_scale;
};

Residuals residuals(const QpProblem& p, const Eigen::VectorXd& x, const Eigen::VectorXd& z,
                    const Eigen::VectorXd& y) {
  const Eigen::VectorXd ax = p.A * x;
  const Eigen::VectorXd px = p.P * x;
  const Eigen::VectorXd aty = p.A.transpose() * y;
  return {inf_norm(ax - z), inf_norm(px + p.q + aty), std::max(inf_norm(ax), inf_norm(z)),
          std::max({inf_norm(px), inf_norm(aty), inf_norm(p.q)})};
}

// Solves the KKT system of the guessed active set. Returns false when the
// guess is inconsistent (infeasible point or wrong multiplier signs).
bool polish(const QpProblem& p, const Eigen::VectorXd& z, const Eigen::VectorXd& y,
            double tol, Eigen::VectorXd& x_out, Eigen::VectorXd& y_out) {
  const Eigen::Index n = p.P.rows();
  const Eigen::Index m = p.A.rows();
  std::vector<Eigen::Index> rows;
  std::vector<double> rhs;
  std::vector<int> side;  // -1 lower, +1 upper, 0 equality
  for (Eigen::Index i = 0; i < m; ++i) {
    const bool eq = p.u[i] - p.l[i] < 1e-9;
    if (eq) {
      rows.push_back(i);
      rhs.push_back(p.l[i]);
      side.push_back(0);
    } else if (std::isfinite(p.l[i]) && z[i] - p.l[i] < -y[i]) {
      rows.push_back(i);
      rhs.push_back(p.l[i]);
      side.push_back(-1);
    } else if (std::isfinite(p.u[i]) && p.u[i] - z[i] < y[i]) {
      rows.push_back(i);
      rhs.push_back(p.u[i]);
      side.push_back(1);
    }
  }
  const Eigen::Index na = static_cast<Eigen::Index>(rows.size());
  constexpr double kDelta = 1e-9;
  Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n + na, n + na);
  kkt.topLeftCorner(n, n) = p.P;
  Eigen::VectorXd b(n + na);
  b.head(n) = -p.q;
  for (Eigen::Index j = 0; j < na; ++j) {
    kkt.block(n + j, 0, 1, n) = p.A.row(rows[j]);
    kkt.block(0, n + j, n, 1) = p.A.row(rows[j]).transpose();
    b[n + j] = rhs[j];
  }
  Eigen::MatrixXd reg = kkt;
  reg.topLeftCorner(n, n).diagonal().array() += kDelta;
  reg.bottomRightCorner(na, na).diagonal().array() -= kDelta;
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(reg);
  Eigen::VectorXd sol = lu.solve(b);
  for (int it = 0; it < 5; ++it) sol += lu.solve(b - kkt * sol);
  if (!sol.allFinite()) return false;

  Eigen::VectorXd x = sol.head(n);
  Eigen::VectorXd ys = Eigen::VectorXd::Zero(m);
  for (Eigen::Index j = 0; j < na; ++j) {
    const double mult = sol[n + j];
    if (side[j] == -1 && mult > tol) return false;
    if (side[j] == 1 && mult < -tol) return false;
    ys[rows[j]] = mult;
  }
  const Eigen::VectorXd ax = p.A * x;
  const double viol = std::max(inf_norm((p.l - ax).cwiseMax(0.0)), inf_norm((ax - p.u).cwiseMax(0.0)));
  if (viol > tol) return false;
  if (inf_norm(p.P * x + p.q + p.A.transpose() * ys) > tol * std::max(1.0, inf_norm(p.q))) {
    return false;
  }
  x_out = std::move(x);
  y_out = std::move(ys);
  return true;
}

}  // namespace

QpResult solve_qp(const QpProblem& p, const QpSettings& s,
                  const std::optional<Eigen::VectorXd>& warm_start) {
  const Eigen::Index n = p.P.rows();
  const Eigen::Index m = p.A.rows();
  if (p.P.cols() != n || p.q.size() != n || p.A.cols() != n || p.l.size() != m ||
      p.u.size() != m) {
    throw DimensionMismatch("inconsistent QP dimensions");
  }
  for (Eigen::Index i = 0; i < m; ++i) {
    if (p.l[i] > p.u[i]) throw SubproblemInfeasible("lower bound exceeds upper bound");
  }

  double rho = s.rho;
  Eigen::VectorXd R = row_rho(rho, p.l, p.u);
  const auto factor = [&](const Eigen::VectorXd& r) {
    Eigen::MatrixXd K = p.P + p.A.transpose() * r.asDiagonal() * p.A;
    K.diagonal().array() += s.sigma;
    return Eigen::LLT<Eigen::MatrixXd>(K);
  };
  Eigen::LLT<Eigen::MatrixXd> llt = factor(R);

  Eigen::VectorXd x = warm_start ? *warm_start : Eigen::VectorXd::Zero(n);
  Eigen::VectorXd z = project(p.A * x, p.l, p.u);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(m);

  QpResult result;
  int k = 0;
  for (k = 1; k <= s.max_iter; ++k) {
    const Eigen::VectorXd rhs = s.sigma * x - p.q + p.A.transpose() * (R.cwiseProduct(z) - y);
    const Eigen::VectorXd xt = llt.solve(rhs);
    const Eigen::VectorXd zt = p.A * xt;
    const Eigen::VectorXd x_next = s.alpha * xt + (1.0 - s.alpha) * x;
    const Eigen::VectorXd z_relax = s.alpha * zt + (1.0 - s.alpha) * z;
    const Eigen::VectorXd z_next = project(z_relax + y.cwiseQuotient(R), p.l, p.u);
    y += R.cwiseProduct(z_relax - z_next);
    x = x_next;
    z = z_next;

    if (k % s.check_every != 0 && k != s.max_iter) continue;
    const Residuals r = residuals(p, x, z, y);
    result.primal_residual = r.primal;
    result.dual_residual = r.dual;
    if (r.primal <= s.eps_abs + s.eps_rel * r.primal_scale &&
        r.dual <= s.eps_abs + s.eps_rel * r.dual_scale) {
      result.converged = true;
      break;
    }
    if (s.adaptive_rho) {
      const double pn = r.primal / std::max(r.primal_scale, 1e-30);
      const double dn = r.dual / std::max(r.dual_scale, 1e-30);
      const double candidate = std::clamp(rho * std::sqrt(pn / std::max(dn, 1e-30)), kRhoMin, kRhoMax);
      if (candidate > 5.0 * rho || candidate < 0.2 * rho) {
        rho = candidate;
        R = row_rho(rho, p.l, p.u);
        llt = factor(R);
      }
    }
  }
  result.iterations = std::min(k, s.max_iter);
  result.x = x;
  result.y = y;

  if (s.polish) {
    Eigen::VectorXd xp, yp;
    const double tol = std::max(10.0 * s.eps_abs, 1e-7);
    if (polish(p, z, y, tol, xp, yp)) {
      result.x = std::move(xp);
      result.y = std::move(yp);
      result.polished = true;
      result.converged = true;
      const Eigen::VectorXd ax = p.A * result.x;
      result.primal_residual =
          std::max(inf_norm((p.l - ax).cwiseMax(0.0)), inf_norm((ax - p.u).cwiseMax(0.0)));
      result.dual_residual = inf_norm(p.P * result.x + p.q + p.A.transpose() * result.y);
    }
  }
  return result;
}

}  // namespace namo::cito
