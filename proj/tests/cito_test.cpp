#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "namo/cito.hpp"
#include "namo/errors.hpp"

namespace namo::cito {
namespace {

using dynamics::Model;
using dynamics::ObjectProps;
using dynamics::Velocity2;

Model empty_model() {
  Model m;
  m.robot_radius = 0.25;
  return m;
}

Model box_model(double side = 0.4, double mass = 3.0, double mu = 0.3) {
  Model m = empty_model();
  ObjectProps box;
  box.mass = mass;
  box.inertia = mass * (side * side + side * side) / 12.0;
  box.mu_s = mu;
  box.footprint = Polygon::box(side, side);
  m.objects.push_back(box);
  return m;
}

WorldState start(const Pose2& robot, std::vector<Pose2> objects = {}) {
  WorldState s;
  s.robot = robot;
  s.object_vels.assign(objects.size(), Velocity2{});
  s.objects = std::move(objects);
  return s;
}

CitoProblem free_problem(Vec2 goal, int N = 20, double dt = 0.5) {
  return make_problem(empty_model(), start({0, 0, 0}), goal, CorridorSpec{{-5, -5}, {5, 5}}, N, dt);
}

TEST(CitoCost, FinalCostExamples) {
  WorldState x = start({0.1, 0.0, 0.0});
  EXPECT_DOUBLE_EQ(cost_final(x, {0.0, 0.0}, 2500.0), 25.0);
  x.robot = {1.0, 2.0, 2.5};
  EXPECT_DOUBLE_EQ(cost_final(x, {1.0, 2.0}, 2500.0), 0.0);
}

TEST(CitoCost, IntegratedCostExamples) {
  WorldState x = start({0, 0, 0});
  Control u;
  EXPECT_DOUBLE_EQ(cost_integrated(x, u, 1e-4, 7.0), 0.0);
  u.stiffness = {1.0, 1.0};
  EXPECT_DOUBLE_EQ(cost_integrated(x, u, 1e-4, 7.0), 14.0);
  u.stiffness.clear();
  x.robot_vel = {2.0, 0.0, 0.0};
  EXPECT_NEAR(cost_integrated(x, u, 1e-4, 7.0), 4e-4, 1e-18);
}

TEST(CitoCost, ObjectVelocitiesCount) {
  WorldState x = start({0, 0, 0}, {{1, 0, 0}});
  x.object_vels[0] = {0.0, 1.0, 2.0};
  EXPECT_NEAR(cost_integrated(x, Control{}, 1.0, 0.0), 5.0, 1e-15);
}

TEST(CitoCost, TotalIsSumOfParts) {
  const CitoProblem p = free_problem({1.0, 0.0}, 3);
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  std::vector<WorldState> X(4);
  std::vector<Control> U(3);
  for (auto& x : X) {
    x.robot = {d(rng), d(rng), d(rng)};
    x.robot_vel = {d(rng), d(rng), d(rng)};
  }
  double expect = cost_final(X[3], p.goal, p.w1);
  for (int i = 0; i < 3; ++i) expect += cost_integrated(X[i], U[i], p.w2, p.w3);
  EXPECT_EQ(total_cost(X, U, p), expect);
  EXPECT_GE(total_cost(X, U, p), 0.0);
  X.pop_back();
  EXPECT_THROW(total_cost(X, U, p), DimensionMismatch);
}

TEST(CitoProblem, CorridorBoundsShrinkByRadius) {
  const Model m = box_model();
  const CitoProblem p =
      make_problem(m, start({0, 0, 0}, {{1, 0, 0}}), {2, 0}, CorridorSpec{{-1, -1}, {3, 1}});
  EXPECT_DOUBLE_EQ(p.x_lower[0], -0.75);
  EXPECT_DOUBLE_EQ(p.x_upper[1], 0.75);
  EXPECT_NEAR(p.x_upper[4], 1.0 - std::sqrt(0.08), 1e-12);
  EXPECT_TRUE(std::isinf(p.x_upper[2]));
  EXPECT_EQ(p.u_lower.size(), 7);
  EXPECT_DOUBLE_EQ(p.u_upper[3], m.params.vscm.k_max);
  EXPECT_DOUBLE_EQ(p.u_lower[3], 0.0);
}

TEST(CitoLinearize, BaseControlBlockIsDtIdentity) {
  const Model m = box_model();
  const WorldState x = start({0, 0, 0.3}, {{3, 0, 0}});
  Control u;
  u.base = {0.4, -0.2, 0.1};
  u.stiffness.assign(m.num_pairs(), 0.0);
  const Jacobians J = linearize(x, u, 0.5, m);
  EXPECT_LT((J.B.block(0, 0, 3, 3) - 0.5 * Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(CitoLinearize, FreeObjectPositionVelocityBlockIsDt) {
  Model m = box_model(0.4, 3.0, 0.0);
  m.objects[0].mu_v = 0.0;
  const WorldState x = start({-3, 0, 0}, {{1, 0, 0}});
  Control u;
  u.stiffness.assign(m.num_pairs(), 0.0);
  const Jacobians J = linearize(x, u, 0.5, m);
  // q_o occupies rows 3..5, qdot_o occupies columns 9..11.
  EXPECT_LT((J.A.block(3, 9, 3, 3) - 0.5 * Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(CitoLinearize, JacobianVectorProductMatchesDirectionalDifference) {
  const Model m = box_model();
  std::mt19937 rng(11);
  std::normal_distribution<double> g(0.0, 1.0);
  // A sliding object far from the base, and a base pressed into a moving box.
  const std::vector<WorldState> states = [] {
    WorldState a = start({-2, 0, 0}, {{1, 0, 0.2}});
    a.object_vels[0] = {1.0, 0.3, 0.2};
    WorldState b = start({0.54, 0.02, 0}, {{1, 0, 0}});
    b.object_vels[0] = {0.8, 0.0, 0.0};
    b.robot_vel = {0.8, 0.0, 0.0};
    return std::vector<WorldState>{a, b};
  }();
  for (const WorldState& x : states) {
    Control u;
    u.base = {0.8, 0.0, 0.0};
    u.stiffness.assign(m.num_pairs(), 1.0);
    const double dt = 0.05;
    const Jacobians J = linearize(x, u, dt, m);
    const Eigen::VectorXd xv = x.to_vector();
    const Eigen::VectorXd uv = u.to_vector();
    for (int trial = 0; trial < 10; ++trial) {
      Eigen::VectorXd dx(xv.size()), du(uv.size());
      for (Eigen::Index i = 0; i < dx.size(); ++i) dx[i] = g(rng);
      for (Eigen::Index i = 0; i < du.size(); ++i) du[i] = g(rng);
      const double eps = 1e-6;
      const auto f = [&](double s) {
        return dynamics::step(WorldState::from_vector(xv + s * dx, 1), Control::from_vector(uv + s * du),
                              dt, m)
            .to_vector();
      };
      const Eigen::VectorXd fd = (f(eps) - f(-eps)) / (2.0 * eps);
      const Eigen::VectorXd jvp = J.A * dx + J.B * du;
      EXPECT_LT((fd - jvp).norm(), 1e-4 * std::max(1.0, fd.norm())) << "trial " << trial;
    }
  }
}

std::vector<Jacobians> linearize_all(const CitoProblem& p, const std::vector<WorldState>& X,
                                     const std::vector<Control>& U) {
  std::vector<Jacobians> jac;
  for (std::size_t i = 0; i < U.size(); ++i) jac.push_back(linearize(X[i], U[i], p.dt, p.model));
  return jac;
}

TEST(CitoSubproblem, ZeroRadiusKeepsControls) {
  const CitoProblem p = free_problem({1.0, 0.5}, 5);
  std::vector<Control> U = straight_line_init(p);
  const auto X = dynamics::rollout(p.x0, U, p.dt, p.model);
  const SubproblemResult r = solve_subproblem(p, X, U, linearize_all(p, X, U), 0.0);
  for (std::size_t i = 0; i < U.size(); ++i) EXPECT_EQ(r.U[i], U[i]);
  EXPECT_NEAR(r.predicted_cost, r.model_cost, 1e-12);
  EXPECT_NEAR(r.model_cost, total_cost(X, U, p), 1e-12);
}

TEST(CitoSubproblem, OneStepAnalyticMinimizer) {
  const CitoProblem p = free_problem({0.6, -0.3}, 1);
  std::vector<Control> U(1);
  const auto X = dynamics::rollout(p.x0, U, p.dt, p.model);
  const SubproblemResult r = solve_subproblem(p, X, U, linearize_all(p, X, U), 10.0);
  EXPECT_NEAR(r.U[0].base.vx, 0.6 / p.dt, 1e-6);
  EXPECT_NEAR(r.U[0].base.vy, -0.3 / p.dt, 1e-6);
}

TEST(CitoSubproblem, ThreeStepLeastSquares) {
  CitoProblem p = free_problem({0.8, 0.4}, 3);
  p.w1 = 10.0;
  p.w2 = 0.5;
  std::vector<Control> U(3);
  const auto X = dynamics::rollout(p.x0, U, p.dt, p.model);
  const SubproblemResult r = solve_subproblem(p, X, U, linearize_all(p, X, U), 10.0);
  // Per axis: minimize w2 (u0^2 + u1^2) + w1 (dt (u0 + u1 + u2) - e)^2.
  for (int axis = 0; axis < 2; ++axis) {
    const double e = axis == 0 ? 0.8 : 0.4;
    Eigen::Matrix3d H;
    H.setConstant(2.0 * p.w1 * p.dt * p.dt);
    H(0, 0) += 2.0 * p.w2;
    H(1, 1) += 2.0 * p.w2;
    const Eigen::Vector3d b = Eigen::Vector3d::Constant(2.0 * p.w1 * p.dt * e);
    const Eigen::Vector3d u = H.ldlt().solve(b);
    for (int i = 0; i < 3; ++i) {
      const double got = axis == 0 ? r.U[i].base.vx : r.U[i].base.vy;
      EXPECT_NEAR(got, u[i], 1e-6) << "axis " << axis << " step " << i;
    }
  }
}

TEST(CitoSubproblem, ResultRespectsBoundsAndTrustRegion) {
  const Model m = box_model();
  const CitoProblem p =
      make_problem(m, start({0, 0, 0}, {{0.9, 0, 0}}), {2.5, 0}, CorridorSpec{{-0.5, -0.5}, {4, 0.5}}, 6);
  std::vector<Control> U = straight_line_init(p);
  const auto X = dynamics::rollout(p.x0, U, p.dt, p.model);
  const auto jac = linearize_all(p, X, U);
  for (double radius : {0.05, 0.5, 3.0, 40.0}) {
    const SubproblemResult r = solve_subproblem(p, X, U, jac, radius);
    for (std::size_t i = 0; i < U.size(); ++i) {
      const Eigen::VectorXd a = r.U[i].to_vector();
      const Eigen::VectorXd b = U[i].to_vector();
      EXPECT_TRUE(((a - p.u_lower).array() >= 0.0).all());
      EXPECT_TRUE(((p.u_upper - a).array() >= 0.0).all());
      EXPECT_LE((a - b).lpNorm<Eigen::Infinity>(), radius + 1e-12);
    }
  }
}

TEST(Scvx, LinearSystemHasUnitRatio) {
  const CitoProblem p = free_problem({1.0, 0.5}, 10);
  std::vector<Control> U(10);
  const CitoSolution s = scvx_solve(p, U);
  ASSERT_FALSE(s.trace.empty());
  EXPECT_NEAR(s.trace.front().rho, 1.0, 1e-6);
}

TEST(Scvx, GoalAtStartConvergesImmediately) {
  const CitoProblem p = free_problem({0.0, 0.0});
  const CitoSolution s = scvx_solve(p, std::vector<Control>(20));
  EXPECT_TRUE(s.converged);
  EXPECT_LE(s.iterations, 2);
  EXPECT_LE(s.cost, 1e-6);
}

TEST(Scvx, FreeSpaceReachesGoal) {
  const CitoProblem p = free_problem({1.0, 0.0});
  const CitoSolution s = scvx_solve(p, straight_line_init(p));
  EXPECT_TRUE(s.converged);
  EXPECT_LT(distance(s.X.back().robot.position(), p.goal), 0.05);
  EXPECT_EQ(max_stiffness(s.U), 0.0);
}

TEST(Scvx, InfeasibleStartOnlyAcceptsFeasibleIterates) {
  const CitoProblem p =
      make_problem(empty_model(), start({0, 0, 0}), {0.5, 0.0}, CorridorSpec{{-1, -1}, {1, 1}}, 10, 0.5);
  Control fast;
  fast.base = {2.0, 0.0, 0.0};  // leaves the corridor after one step
  const std::vector<Control> U(10, fast);
  ASSERT_GT(bound_violation(dynamics::rollout(p.x0, U, p.dt, p.model), p), 1.0);
  ScvxSettings settings;
  settings.keep_history = true;
  const CitoSolution s = scvx_solve(p, U, settings);
  ASSERT_FALSE(s.accepted_states.empty());
  for (const auto& X : s.accepted_states) EXPECT_LE(bound_violation(X, p), 1e-6);
  EXPECT_LE(bound_violation(s.X, p), 1e-6);
  EXPECT_NEAR((s.X.back().robot.position() - Vec2{0.5, 0.0}).norm(), 0.0, 0.05);
}

TEST(Scvx, RejectsControlsOutsideBounds) {
  const CitoProblem p = free_problem({1.0, 0.0}, 2);
  std::vector<Control> U(2);
  U[1].base.vx = 5.0;
  EXPECT_THROW(scvx_solve(p, U), Error);
  EXPECT_THROW(scvx_solve(p, std::vector<Control>(3)), DimensionMismatch);
}

class PushBox : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    problem_ = new CitoProblem(make_problem(box_model(), start({0, 0, 0}, {{0.9, 0, 0}}), {2.2, 0},
                                            CorridorSpec{{-0.5, -0.5}, {4.0, 0.5}}));
    ScvxSettings settings;
    settings.keep_history = true;
    // Idle start: the optimizer has to discover the drive-through-and-push motion.
    std::vector<Control> idle(20);
    for (Control& u : idle) u.stiffness.assign(problem_->model.num_pairs(), 0.0);
    solution_ = new CitoSolution(scvx_solve(*problem_, idle, settings));
  }
  static void TearDownTestSuite() {
    delete problem_;
    delete solution_;
  }
  static CitoProblem* problem_;
  static CitoSolution* solution_;
};
CitoProblem* PushBox::problem_ = nullptr;
CitoSolution* PushBox::solution_ = nullptr;

TEST_F(PushBox, ConvergesWithVanishingStiffness) {
  const CitoSolution& s = *solution_;
  EXPECT_TRUE(s.converged);
  EXPECT_LE(s.iterations, 100);
  EXPECT_LE(s.max_terminal_stiffness, 0.01 * problem_->model.params.vscm.k_max);
  EXPECT_LE(s.final_sum_k, 0.01 * s.first_accepted_sum_k + 1e-12);
}

TEST_F(PushBox, OpenLoopExecutionReachesGoal) {
  dynamics::Model physical = problem_->model;
  physical.params.virtual_forces = false;
  const auto X = dynamics::rollout(problem_->x0, solution_->U, problem_->dt, physical);
  EXPECT_LT(distance(X.back().robot.position(), problem_->goal), 0.2);
}

TEST_F(PushBox, ReturnedStatesAreTheRollout) {
  const auto X = dynamics::rollout(problem_->x0, solution_->U, problem_->dt, problem_->model);
  ASSERT_EQ(X.size(), solution_->X.size());
  for (std::size_t i = 0; i < X.size(); ++i) EXPECT_EQ(X[i], solution_->X[i]);
}

TEST_F(PushBox, AcceptedCostsAreMonotone) {
  ASSERT_FALSE(solution_->accepted_controls.empty());
  double prev = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < solution_->accepted_controls.size(); ++i) {
    const double c = total_cost(solution_->accepted_states[i], solution_->accepted_controls[i], *problem_);
    EXPECT_LE(c, prev + 1e-9);
    prev = c;
  }
}

TEST_F(PushBox, AcceptedIteratesRespectBounds) {
  const CitoProblem& p = *problem_;
  for (std::size_t i = 0; i < solution_->accepted_controls.size(); ++i) {
    for (const Control& u : solution_->accepted_controls[i]) {
      const Eigen::VectorXd v = u.to_vector();
      EXPECT_TRUE(((v - p.u_lower).array() >= -1e-6).all());
      EXPECT_TRUE(((p.u_upper - v).array() >= -1e-6).all());
    }
    for (std::size_t j = 1; j < solution_->accepted_states[i].size(); ++j) {
      const Eigen::VectorXd x = solution_->accepted_states[i][j].to_vector();
      EXPECT_TRUE(((x - p.x_lower).array() >= -1e-6).all()) << "iterate " << i << " step " << j;
      EXPECT_TRUE(((p.x_upper - x).array() >= -1e-6).all()) << "iterate " << i << " step " << j;
    }
  }
}

}  // namespace
}  // namespace namo::cito
