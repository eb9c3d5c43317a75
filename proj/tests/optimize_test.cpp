#include <doctest.h>

#include "salp/optimize.hpp"

using namespace salp;

namespace {

struct Setup {
  ChainModel model = landsalp_model();
  LocalMetric metric = default_test_metric();
  Shape nominal = Shape::Zero(2);
  double omega = 1.0 / 6.0;
  AveragedSystem avg;

  Setup() { avg = augmented_system(model, metric, nominal, omega); }
};

Eigen::VectorXd forward_target(const Setup& s, double meters_per_cycle) {
  Eigen::VectorXd d = Eigen::VectorXd::Zero(5);
  d[0] = meters_per_cycle * s.omega;
  return d;
}

}  // namespace

TEST_CASE("cost metrics: velocity normalization and positive definiteness") {
  const Setup s;
  const CostMetric vel = build_cost(s.model, s.metric, s.nominal, CostKind::velocity);
  for (int i = 0; i < 3; ++i)
    CHECK(vel.R_u(i, i) == doctest::Approx(1.0 / (s.model.u_max[i] * s.model.u_max[i])));
  for (CostKind kind : {CostKind::velocity, CostKind::power, CostKind::force}) {
    const CostMetric c = build_cost(s.model, s.metric, s.nominal, kind);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(c.R_u);
    CHECK(es.eigenvalues().minCoeff() > 0.0);
    CHECK((c.R_u - c.R_u.transpose()).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("full cost form equals the cycle-average quadrature") {
  const Setup s;
  const CostMetric c = build_cost(s.model, s.metric, s.nominal, CostKind::power);
  const int order = 2;
  const Eigen::MatrixXd R = c.full(order);
  FourierGait g = FourierGait::zero(3, order, s.omega);
  g.u_bar << 0.03, -0.02, 0.05;
  g.A_sin << 0.06, 0.02, -0.04, 0.01, -0.03, 0.02;
  g.A_cos << -0.01, 0.05, 0.02, 0.03, 0.01, -0.02;
  const double quad_n = 100000;
  double avg = 0.0;
  const double T = g.period();
  for (int k = 0; k < quad_n; ++k) {
    const Eigen::VectorXd u = g.evaluate((k + 0.5) * T / quad_n);
    avg += u.dot(c.R_u * u);
  }
  avg /= quad_n;
  const Eigen::VectorXd th = g.theta();
  CHECK(th.dot(R * th) == doctest::Approx(avg).epsilon(1e-8));
}

TEST_CASE("averaged solve meets the target and the KKT conditions") {
  const Setup s;
  const CostMetric c = build_cost(s.model, s.metric, s.nominal, CostKind::velocity);
  const Eigen::VectorXd desired = forward_target(s, 0.03);
  const GaitPlan plan = solve_averaged(s.avg, c, desired);
  CHECK(plan.converged);
  CHECK(plan.residual < 1e-8);
  CHECK((plan.achieved_average - desired).norm() < 1e-8);
  // Predicted average from the returned gait agrees.
  const Eigen::VectorXd pred =
      average_velocity(s.model, s.metric, s.nominal, plan.gait);
  CHECK((pred - desired).norm() < 1e-8);
}

TEST_CASE("costs are monotone in the demanded displacement") {
  const Setup s;
  const CostMetric c = build_cost(s.model, s.metric, s.nominal, CostKind::velocity);
  double prev = 0.0;
  for (double scale : {0.25, 0.5, 1.0}) {
    const GaitPlan p = solve_averaged(s.avg, c, forward_target(s, 0.03 * scale));
    CHECK(p.converged);
    CHECK(p.cost_value > prev);
    prev = p.cost_value;
  }
}

TEST_CASE("opposite targets give mirrored gaits for the symmetric metric") {
  const Setup s;
  const CostMetric c = build_cost(s.model, s.metric, s.nominal, CostKind::velocity);
  const GaitPlan fwd = solve_averaged(s.avg, c, forward_target(s, 0.03));
  const GaitPlan back = solve_averaged(s.avg, c, forward_target(s, -0.03));
  CHECK(fwd.converged);
  CHECK(back.converged);
  CHECK(std::abs(fwd.cost_value - back.cost_value) < 1e-6 * std::max(1.0, fwd.cost_value));
  // Time-reversal/mirror: u_bar and A_cos flip, A_sin is preserved -- or the
  // sign-flipped gait achieves the reversed target at identical cost.
  FourierGait mirrored = fwd.gait;
  mirrored.u_bar = -mirrored.u_bar;
  mirrored.A_cos = -mirrored.A_cos;
  const Eigen::VectorXd rev =
      average_velocity(s.model, s.metric, s.nominal, mirrored);
  CHECK((rev + forward_target(s, 0.03)).norm() < 1e-8);
}

TEST_CASE("infeasible targets are rejected") {
  const Setup s;
  // Zero-amplitude system restricted to the direct columns cannot reach a
  // direction outside the augmented span; easiest certified case: demand a
  // velocity orthogonal to the full column space. With rank 5 over 5 rows the
  // span is full, so instead check the dimension guard on the constraint.
  const CostMetric c = build_cost(s.model, s.metric, s.nominal, CostKind::velocity);
  AveragedSystem crippled = s.avg;
  crippled.A_aug.rightCols(3).setZero();  // remove all bracket columns
  Eigen::VectorXd lateral = Eigen::VectorXd::Zero(5);
  lateral[1] = 0.01;  // lateral motion needs the brackets
  CHECK_THROWS_AS(solve_averaged(crippled, c, lateral), InfeasibleTarget);
}

TEST_CASE("refinement drives the simulated per-cycle displacement to the target") {
  const Setup s;
  const CostMetric c = build_cost(s.model, s.metric, s.nominal, CostKind::velocity);
  const Eigen::VectorXd desired = forward_target(s, 0.03);
  const GaitPlan p0 = solve_averaged(s.avg, c, desired);
  RefineOptions ro;
  ro.steps_per_cycle = 1200;
  const GaitPlan p = refine_full(p0, s.model, s.metric, ro);
  CHECK(p.refined);
  CHECK(p.converged);

  // Independent check: integrate one cycle and compare the displacement.
  const double T = 1.0 / s.omega;
  const int steps = 6000;
  const double dt = T / steps;
  Pose g;
  Shape r = s.nominal;
  for (int k = 0; k < steps; ++k) {
    const Eigen::VectorXd u = p.gait.evaluate((k + 0.5) * dt);
    const Eigen::VectorXd k1 = control_field(s.model, s.metric, r).A * u;
    const Shape r_half = r + 0.5 * dt * k1.tail(2);
    const Eigen::VectorXd k2 = control_field(s.model, s.metric, r_half).A * u;
    g = compose(g, exp(Twist(Eigen::Vector3d(k2.head<3>())), dt));
    r += dt * k2.tail(2);
  }
  CHECK(std::abs(g.x - 0.03) < 2e-4);
  CHECK(std::abs(g.y) < 2e-4);
  CHECK(std::abs(g.theta) < 2e-3);
  CHECK((r - s.nominal).norm() < 2e-3);
}

TEST_CASE("serial and parallel refinement agree") {
  const Setup s;
  const CostMetric c = build_cost(s.model, s.metric, s.nominal, CostKind::velocity);
  const GaitPlan p0 = solve_averaged(s.avg, c, forward_target(s, 0.02));
  RefineOptions ro;
  ro.steps_per_cycle = 600;
  ro.max_iterations = 3;
  GaitPlan a = refine_full(p0, s.model, s.metric, ro);
  ro.serial = true;
  GaitPlan b = refine_full(p0, s.model, s.metric, ro);
  CHECK((a.gait.theta() - b.gait.theta()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("shape-averaged solve respects joint limits") {
  const Setup s;
  const CostMetric c = build_cost(s.model, s.metric, s.nominal, CostKind::velocity);
  Eigen::VectorXd desired = Eigen::VectorXd::Zero(5);
  desired[2] = (M_PI / 4.0) * s.omega;  // quarter turn per cycle
  ShapeSolveOptions opts;
  opts.refine.steps_per_cycle = 600;
  const GaitPlan p = solve_shape_averaged(s.model, s.metric, c, desired, s.nominal, s.omega, opts);
  CHECK(p.converged);
  CHECK(p.limits_ok);

  // Simulate a cycle from the plan's nominal start and verify the envelope.
  const double T = 1.0 / s.omega;
  const int steps = 3000;
  const double dt = T / steps;
  Shape r = p.nominal;
  Shape mean = Shape::Zero(2);
  for (int k = 0; k < steps; ++k) {
    const Eigen::VectorXd u = p.gait.evaluate((k + 0.5) * dt);
    const Eigen::VectorXd k1 = control_field(s.model, s.metric, r).A * u;
    const Shape r_half = r + 0.5 * dt * k1.tail(2);
    const Eigen::VectorXd k2 = control_field(s.model, s.metric, r_half).A * u;
    r += dt * k2.tail(2);
    mean += r / steps;
    CHECK(s.model.shape_in_limits(r));
  }
  CHECK((mean - s.nominal).cwiseAbs().maxCoeff() < 5e-3);
}
