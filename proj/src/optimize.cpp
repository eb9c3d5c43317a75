#include "salp/optimize.hpp"

#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace salp {

Eigen::MatrixXd CostMetric::full(int order) const {
  const int n = static_cast<int>(R_u.rows());
  Eigen::MatrixXd R = Eigen::MatrixXd::Zero(n * (1 + 2 * order), n * (1 + 2 * order));
  R.topLeftCorner(n, n) = R_u;
  for (int b = 1; b <= 2 * order; ++b) R.block(b * n, b * n, n, n) = 0.5 * R_u;
  return R;
}

CostMetric build_cost(const ChainModel& model, const LocalMetric& metric, const Shape& nominal,
                      CostKind kind, CommandMode mode) {
  CostMetric cost;
  cost.kind = kind;
  switch (kind) {
    case CostKind::velocity:
      cost.R_u = model.u_max.array().square().inverse().matrix().asDiagonal();
      break;
    case CostKind::power: {
      const auto jac = aggregate_jacobians(model, nominal);
      const Eigen::VectorXd Md = metric.diagonal();
      const Eigen::MatrixXd A = control_field(model, metric, nominal, mode).A;
      Eigen::MatrixXd S = jac.J_u.transpose() * Md.asDiagonal() * jac.J_zeta * A;
      S = 0.5 * (S + S.transpose());
      // Sign conventions for the control field differ across sources; the
      // dissipated-power quadratic form is the positive branch.
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(S);
      if (eig.eigenvalues().maxCoeff() <= 0.0) {
        S = -S;
        eig.compute(S);
      }
      cost.R_u = eig.eigenvectors() * eig.eigenvalues().cwiseMax(1e-10).asDiagonal() *
                 eig.eigenvectors().transpose();
      break;
    }
    case CostKind::force: {
      const auto jac = aggregate_jacobians(model, nominal);
      const Eigen::VectorXd Md2 = metric.diagonal().array().square();
      cost.R_u = jac.J_u.transpose() * Md2.asDiagonal() * jac.J_u;
      break;
    }
  }
  return cost;
}

namespace {

// First-order amplitudes realizing the bracket demands d_{ij} through the
// oscillatory term (A_cos_i A_sin_j - A_sin_i A_cos_j) / 2; exact for three
// units, where skew matrices are cross products.
void seed_amplitudes(FourierGait& gait, const Eigen::VectorXd& demands) {
  const int n = gait.n_units();
  if (n != 3) return;
  // demands ordered (0,1), (0,2), (1,2); axis vector of the skew demand matrix.
  const Eigen::Vector3d w(-demands[2], demands[1], -demands[0]);
  const double mag = w.norm();
  if (mag < 1e-14) return;
  const Eigen::Vector3d wh = w / mag;
  Eigen::Vector3d e = std::abs(wh.x()) < 0.9 ? Eigen::Vector3d::UnitX() : Eigen::Vector3d::UnitY();
  const Eigen::Vector3d s = std::sqrt(2.0 * mag) * (e - e.dot(wh) * wh).normalized();
  const Eigen::Vector3d c = 2.0 * w.cross(s) / s.squaredNorm();
  gait.A_sin.row(0) = s.transpose();
  gait.A_cos.row(0) = c.transpose();
}

struct KktStep {
  Eigen::VectorXd delta;
  Eigen::VectorXd multipliers;
};

// Equality-constrained quadratic subproblem: min 1/2 d^T H d + g^T d
// s.t. J d = -h, via the (regularized) KKT system.
KktStep kkt_solve(const Eigen::MatrixXd& H, const Eigen::VectorXd& g, const Eigen::MatrixXd& J,
                  const Eigen::VectorXd& h) {
  const int p = static_cast<int>(H.rows());
  const int m = static_cast<int>(J.rows());
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(p + m, p + m);
  K.topLeftCorner(p, p) = H + 1e-12 * Eigen::MatrixXd::Identity(p, p);
  K.topRightCorner(p, m) = J.transpose();
  K.bottomLeftCorner(m, p) = J;
  Eigen::VectorXd rhs(p + m);
  rhs.head(p) = -g;
  rhs.tail(m) = -h;
  const Eigen::VectorXd sol = K.partialPivLu().solve(rhs);
  return {sol.head(p), sol.tail(m)};
}

}  // namespace

GaitPlan solve_averaged(const AveragedSystem& avg, const CostMetric& cost,
                        const Eigen::VectorXd& desired, const SolveOptions& opts) {
  const int n = avg.n_units;
  const Eigen::MatrixXd R = cost.full(opts.order);

  // Feasibility: desired must lie in the augmented column space.
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(avg.A_aug);
  const Eigen::VectorXd u_aug0 = cod.solve(desired);
  const double infeas = (avg.A_aug * u_aug0 - desired).norm();
  if (infeas > 1e-8 * std::max(1.0, desired.norm()))
    throw InfeasibleTarget("desired velocity outside the averaged reachable space");

  FourierGait gait = FourierGait::zero(n, opts.order, avg.omega);
  gait.u_bar = u_aug0.head(n);
  seed_amplitudes(gait, Eigen::VectorXd(2.0 * M_PI * avg.omega * u_aug0.tail(u_aug0.size() - n)));

  Eigen::VectorXd theta = gait.theta();
  double mu = 1.0;
  bool converged = false;

  auto violation = [&](const Eigen::VectorXd& th) {
    const FourierGait g = FourierGait::from_theta(th, n, avg.omega);
    return Eigen::VectorXd(avg.A_aug * augmented_input(g) - desired);
  };

  for (int it = 0; it < opts.max_iterations; ++it) {
    const FourierGait g = FourierGait::from_theta(theta, n, avg.omega);
    const Eigen::VectorXd h = avg.A_aug * augmented_input(g) - desired;
    const Eigen::MatrixXd J = avg.A_aug * augmented_input_jacobian(g);
    const Eigen::VectorXd grad = 2.0 * R * theta;

    // Multiplier estimate and first-order optimality.
    const Eigen::VectorXd lam = (J * J.transpose()).ldlt().solve(-(J * grad));
    const double kkt = (grad + J.transpose() * lam).norm();
    const double scale = std::max(1.0, grad.norm());
    if (kkt <= opts.kkt_tol * scale && h.norm() <= opts.constraint_tol) {
      converged = true;
      break;
    }

    const KktStep step = kkt_solve(2.0 * R, grad, J, h);
    mu = std::max(mu, 2.0 * step.multipliers.cwiseAbs().maxCoeff() + 1.0);
    const double merit0 = theta.dot(R * theta) + mu * h.norm();
    const double slope = grad.dot(step.delta) - mu * h.norm();

    // Full step with a second-order constraint correction (the bracket
    // constraint is quadratic in theta, so the exact-penalty merit would
    // otherwise reject full Newton steps near the solution).
    const Eigen::VectorXd h_full = violation(theta + step.delta);
    const Eigen::VectorXd correction =
        -J.transpose() * (J * J.transpose()).ldlt().solve(h_full);
    const Eigen::VectorXd cand_soc = theta + step.delta + correction;
    const double merit_soc = cand_soc.dot(R * cand_soc) + mu * violation(cand_soc).norm();
    if (merit_soc <= merit0 + 1e-4 * slope) {
      theta = cand_soc;
      continue;
    }

    double alpha = 1.0;
    while (alpha > 1e-12) {
      const Eigen::VectorXd cand = theta + alpha * step.delta;
      const double merit =
          cand.dot(R * cand) + mu * violation(cand).norm();
      if (merit <= merit0 + 1e-4 * alpha * slope) break;
      alpha *= 0.5;
    }
    theta += alpha * step.delta;
    if (alpha * step.delta.norm() < 1e-14) break;
  }

  GaitPlan plan;
  plan.gait = FourierGait::from_theta(theta, n, avg.omega);
  plan.nominal = avg.nominal;
  plan.achieved_average = avg.A_aug * augmented_input(plan.gait);
  plan.R = R;
  plan.cost_value = theta.dot(R * theta);
  plan.residual = (plan.achieved_average - desired).norm();
  plan.converged = converged || plan.residual <= opts.constraint_tol;
  return plan;
}

namespace {

struct CycleSim {
  Eigen::VectorXd displacement;  // [log g(T); r(T) - r0]
  Eigen::VectorXd mean_shape;
  Eigen::VectorXd shape_min, shape_max;  // per-joint envelope over the cycle
  bool limit_hit = false;
};

CycleSim simulate_cycle(const ChainModel& model, const LocalMetric& metric,
                        const FourierGait& gait, const Shape& r0, int steps) {
  const double T = gait.period();
  const double dt = T / steps;
  SimState state;
  state.shape = r0;
  CycleSim out;
  const int nj = model.n_joints();
  out.mean_shape = Eigen::VectorXd::Zero(nj);
  out.shape_min = r0;
  out.shape_max = r0;
  for (int s = 0; s < steps; ++s) {
    if (!step(state, model, metric, gait.evaluate((s + 0.5) * dt), dt)) {
      out.limit_hit = true;
      break;
    }
    out.mean_shape += state.shape / steps;
    out.shape_min = out.shape_min.cwiseMin(state.shape);
    out.shape_max = out.shape_max.cwiseMax(state.shape);
  }
  out.displacement.resize(3 + nj);
  out.displacement.head<3>() = log(state.pose).vec();
  out.displacement.tail(nj) = state.shape - r0;
  return out;
}

Eigen::VectorXd fd_steps(const ChainModel& model, const FourierGait& gait) {
  Eigen::VectorXd steps(gait.theta_dim());
  const int n = gait.n_units();
  for (int k = 0; k < gait.theta_dim(); ++k) steps[k] = 1e-4 * model.u_max[k % n];
  return steps;
}

}  // namespace

GaitPlan refine_full(const GaitPlan& plan, const ChainModel& model, const LocalMetric& metric,
                     const RefineOptions& opts) {
  const int n = model.n_units;
  const int nj = model.n_joints();
  const double T = plan.gait.period();
  GaitPlan out = plan;
  Eigen::VectorXd theta = plan.gait.theta();
  const Eigen::VectorXd target = T * plan.achieved_average;  // per-cycle displacement target
  const Eigen::VectorXd steps = fd_steps(model, plan.gait);
  const Eigen::MatrixXd& R = plan.R;
  const int p = static_cast<int>(theta.size());

  auto sim_disp = [&](const Eigen::VectorXd& th, bool* hit) {
    const CycleSim cs = simulate_cycle(model, metric,
                                       FourierGait::from_theta(th, n, plan.gait.omega),
                                       plan.nominal, opts.steps_per_cycle);
    if (hit) *hit = cs.limit_hit;
    return cs.displacement;
  };

  double mu = 1.0;
  bool converged = false;
  for (int it = 0; it < opts.max_iterations; ++it) {
    bool hit = false;
    const Eigen::VectorXd h = sim_disp(theta, &hit) - target;
    if (hit) {
      out.limits_ok = false;
      break;
    }
    if (h.norm() <= opts.displacement_tol) {
      converged = true;
      break;
    }

    Eigen::MatrixXd J(3 + nj, p);
    bool col_hit = false;
#pragma omp parallel for schedule(static) if (!opts.serial)
    for (int k = 0; k < p; ++k) {
      Eigen::VectorXd tp = theta, tm = theta;
      tp[k] += steps[k];
      tm[k] -= steps[k];
      bool h1 = false, h2 = false;
      const Eigen::VectorXd dp = sim_disp(tp, &h1);
      const Eigen::VectorXd dm = sim_disp(tm, &h2);
      J.col(k) = (dp - dm) / (2.0 * steps[k]);
      if (h1 || h2) col_hit = true;
    }
    if (col_hit) {
      out.limits_ok = false;
      break;
    }

    const Eigen::VectorXd grad = 2.0 * R * theta;
    const KktStep step = kkt_solve(2.0 * R, grad, J, h);
    mu = std::max(mu, 2.0 * step.multipliers.cwiseAbs().maxCoeff() + 1.0);
    const double merit0 = theta.dot(R * theta) + mu * h.norm();
    const double slope = grad.dot(step.delta) - mu * h.norm();
    double alpha = 1.0;
    Eigen::VectorXd cand = theta;
    while (alpha > 1e-8) {
      cand = theta + alpha * step.delta;
      bool chit = false;
      const double merit = cand.dot(R * cand) + mu * (sim_disp(cand, &chit) - target).norm() +
                           (chit ? 1e9 : 0.0);
      if (merit <= merit0 + 1e-4 * alpha * slope) break;
      alpha *= 0.5;
    }
    theta = cand;
  }

  out.gait = FourierGait::from_theta(theta, n, plan.gait.omega);
  bool hit = false;
  const Eigen::VectorXd h_final = sim_disp(theta, &hit) - target;
  out.residual = h_final.norm();
  out.cost_value = theta.dot(R * theta);
  out.converged = converged;
  out.refined = true;
  if (hit) out.limits_ok = false;
  return out;
}

GaitPlan solve_shape_averaged(const ChainModel& model, const LocalMetric& metric,
                              const CostMetric& cost, const Eigen::VectorXd& desired,
                              const Shape& nominal, double omega, const ShapeSolveOptions& opts) {
  const int n = model.n_units;
  const int nj = model.n_joints();
  const AveragedSystem avg = augmented_system(model, metric, nominal, omega);
  GaitPlan plan = solve_averaged(avg, cost, desired);
  const double T = plan.gait.period();
  const Eigen::VectorXd target = T * desired;

  const int p = plan.gait.theta_dim();
  Eigen::VectorXd x(p + nj);
  x.head(p) = plan.gait.theta();
  x.tail(nj) = nominal;
  Eigen::VectorXd steps(p + nj);
  steps.head(p) = fd_steps(model, plan.gait);
  steps.tail(nj).setConstant(1e-4);

  const Eigen::MatrixXd& R = plan.R;
  auto cost_of = [&](const Eigen::VectorXd& v) {
    return v.head(p).dot(R * v.head(p));
  };
  auto cost_grad = [&](const Eigen::VectorXd& v) {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(p + nj);
    g.head(p) = 2.0 * R * v.head(p);
    return g;
  };

  const Eigen::VectorXd lo = model.joint_min.array() + opts.limit_margin;
  const Eigen::VectorXd hi = model.joint_max.array() - opts.limit_margin;

  // Hinge residuals at sampled phases, from the cycle's shape envelope
  // approximated by the phase samples of a dedicated simulation.
  auto evaluate = [&](const Eigen::VectorXd& v, Eigen::VectorXd& h, Eigen::VectorXd& pen,
                      bool* hit) {
    const FourierGait g = FourierGait::from_theta(v.head(p), n, omega);
    const Shape r0 = v.tail(nj);
    const double dt = T / opts.refine.steps_per_cycle;
    SimState state;
    state.shape = r0;
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(nj);
    pen = Eigen::VectorXd::Zero(opts.limit_phases * nj * 2);
    const int stride = opts.refine.steps_per_cycle / opts.limit_phases;
    bool violated = false;
    for (int s = 0; s < opts.refine.steps_per_cycle; ++s) {
      const Eigen::VectorXd u = g.evaluate((s + 0.5) * dt);
      // Integrate without hard limit termination: penalties own feasibility.
      const Eigen::VectorXd qdot1 = control_field(model, metric, state.shape).A * u;
      const Shape r_half = state.shape + 0.5 * dt * qdot1.tail(nj);
      const Eigen::VectorXd qdot = control_field(model, metric, r_half).A * u;
      state.pose = compose(state.pose, exp(Twist(Eigen::Vector3d(qdot.head<3>())), dt));
      state.shape += dt * qdot.tail(nj);
      state.t += dt;
      mean += state.shape / opts.refine.steps_per_cycle;
      if (!model.shape_in_limits(state.shape)) violated = true;
      if ((s + 1) % stride == 0) {
        const int phase = (s + 1) / stride - 1;
        if (phase < opts.limit_phases)
          for (int j = 0; j < nj; ++j) {
            pen[2 * (phase * nj + j)] = std::max(0.0, state.shape[j] - hi[j]);
            pen[2 * (phase * nj + j) + 1] = std::max(0.0, lo[j] - state.shape[j]);
          }
      }
    }
    if (hit) *hit = violated;
    h.resize(3 + nj + nj);
    h.head<3>() = log(state.pose).vec() - target.head<3>();
    h.segment(3, nj) = (state.shape - r0) - target.tail(nj);
    h.tail(nj) = mean - nominal;
  };

  double w = opts.initial_penalty;
  bool feasible = false;
  bool converged = false;
  for (int esc = 0; esc <= opts.max_escalations; ++esc) {
    double mu = 1.0;
    converged = false;
    for (int it = 0; it < opts.refine.max_iterations; ++it) {
      Eigen::VectorXd h, pen;
      evaluate(x, h, pen, nullptr);

      const int m = static_cast<int>(h.size());
      Eigen::MatrixXd Jh(m, p + nj);
      Eigen::MatrixXd Jp(pen.size(), p + nj);
#pragma omp parallel for schedule(static) if (!opts.refine.serial)
      for (int k = 0; k < p + nj; ++k) {
        Eigen::VectorXd vp = x, vm = x;
        vp[k] += steps[k];
        vm[k] -= steps[k];
        Eigen::VectorXd hp, hm, pp, pm;
        evaluate(vp, hp, pp, nullptr);
        evaluate(vm, hm, pm, nullptr);
        Jh.col(k) = (hp - hm) / (2.0 * steps[k]);
        Jp.col(k) = (pp - pm) / (2.0 * steps[k]);
      }

      Eigen::MatrixXd H = 2.0 * w * Jp.transpose() * Jp;
      H.topLeftCorner(p, p) += 2.0 * R;
      const Eigen::VectorXd grad = cost_grad(x) + 2.0 * w * Jp.transpose() * pen;
      const KktStep step = kkt_solve(H, grad, Jh, h);
      mu = std::max(mu, 2.0 * step.multipliers.cwiseAbs().maxCoeff() + 1.0);

      auto merit = [&](const Eigen::VectorXd& v) {
        Eigen::VectorXd hv, pv;
        evaluate(v, hv, pv, nullptr);
        return cost_of(v) + w * pv.squaredNorm() + mu * hv.norm();
      };
      const double merit0 = cost_of(x) + w * pen.squaredNorm() + mu * h.norm();
      const double slope = grad.dot(step.delta) - mu * h.norm();
      double alpha = 1.0;
      Eigen::VectorXd cand = x;
      while (alpha > 1e-8) {
        cand = x + alpha * step.delta;
        if (merit(cand) <= merit0 + 1e-4 * alpha * slope) break;
        alpha *= 0.5;
      }
      x = cand;

      Eigen::VectorXd h2, pen2;
      evaluate(x, h2, pen2, nullptr);
      if (h2.norm() <= opts.refine.displacement_tol &&
          (alpha * step.delta.norm() < 1e-10 || pen2.norm() < 1e-9)) {
        converged = true;
        break;
      }
      if (alpha * step.delta.norm() < 1e-12) break;
    }

    Eigen::VectorXd h, pen;
    bool violated = false;
    evaluate(x, h, pen, &violated);
    if (!violated) {
      feasible = true;
      break;
    }
    w *= 10.0;
  }

  GaitPlan out = plan;
  out.gait = FourierGait::from_theta(x.head(p), n, omega);
  out.nominal = x.tail(nj);
  out.cost_value = cost_of(x);
  Eigen::VectorXd h, pen;
  evaluate(x, h, pen, nullptr);
  out.residual = h.norm();
  out.converged = converged;
  out.refined = true;
  out.limits_ok = feasible;
  out.achieved_average = desired + h.head(3 + nj) / T;
  return out;
}

}  // namespace salp
