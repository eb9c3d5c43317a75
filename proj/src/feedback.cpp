#include "salp/feedback.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace salp {

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> linearize(const ChainModel& model,
                                                      const LocalMetric& metric,
                                                      const AveragedSystem& avg,
                                                      const FourierGait& gait, CommandMode mode) {
  const int n = model.n_units;
  const int dim = 3 + (n - 1);  // (x, y, theta) plus joint angles
  const Eigen::VectorXd u_aug = augmented_input(gait);

  // Continuous state Jacobian: columns for the group part vanish (left
  // invariance); shape columns by central differences of A_aug(r) u_aug.
  Eigen::MatrixXd F = Eigen::MatrixXd::Zero(dim, dim);
  const double h = 1e-6;
  for (int j = 0; j < n - 1; ++j) {
    Shape rp = avg.nominal, rm = avg.nominal;
    rp[j] += h;
    rm[j] -= h;
    const Eigen::VectorXd vp = augmented_system(model, metric, rp, avg.omega, mode).A_aug * u_aug;
    const Eigen::VectorXd vm = augmented_system(model, metric, rm, avg.omega, mode).A_aug * u_aug;
    F.col(3 + j) = (vp - vm) / (2.0 * h);
  }

  const Eigen::MatrixXd G = avg.A_aug * augmented_input_jacobian(gait);

  // exp([F G; 0 0] T) gives the exact zero-order-hold discretization.
  const int p = static_cast<int>(G.cols());
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(dim + p, dim + p);
  M.topLeftCorner(dim, dim) = F;
  M.topRightCorner(dim, p) = G;
  M *= gait.period();
  const Eigen::MatrixXd E = M.exp();
  return {E.topLeftCorner(dim, dim), E.topRightCorner(dim, p)};
}

Eigen::MatrixXd lqr_gain(const Eigen::MatrixXd& A_d, const Eigen::MatrixXd& B_d,
                         const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R_in) {
  Eigen::MatrixXd P = Q;
  const int max_iter = 100000;
  for (int it = 0; it < max_iter; ++it) {
    const Eigen::MatrixXd BtP = B_d.transpose() * P;
    const Eigen::MatrixXd S = R_in + BtP * B_d;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(S);
    if (ldlt.info() != Eigen::Success)
      throw NonStabilizable("Riccati iteration: singular input-weight block");
    const Eigen::MatrixXd K = ldlt.solve(BtP * A_d);
    Eigen::MatrixXd P_next = Q + A_d.transpose() * P * (A_d - B_d * K);
    P_next = 0.5 * (P_next + P_next.transpose());
    const double delta = (P_next - P).cwiseAbs().maxCoeff();
    P = P_next;
    if (delta < 1e-12) {
      const Eigen::MatrixXd BtPf = B_d.transpose() * P;
      return (R_in + BtPf * B_d).ldlt().solve(BtPf * A_d);
    }
    if (!P.allFinite()) throw NonStabilizable("Riccati iteration diverged");
  }
  throw NonStabilizable("Riccati iteration did not converge");
}

Eigen::MatrixXd default_state_weights(int n_joints) {
  Eigen::VectorXd w(3 + n_joints);
  w.head<3>().setOnes();
  w.tail(n_joints).setConstant(50.0);
  return w.asDiagonal();
}

Eigen::MatrixXd default_input_weights(int theta_dim) {
  Eigen::VectorXd w = Eigen::VectorXd::Constant(theta_dim, 0.6);
  w.head(3).setConstant(0.01);
  return w.asDiagonal();
}

FourierGait FeedbackLaw::update(const ErrorState& error, const ChainModel& model) const {
  // Anti-windup: cap the group error fed to the gain. The robot cannot
  // out-run its wheel limits to recover a large pose lag in one cycle, and
  // the resulting oversized parameter corrections leave the linearization's
  // validity region and saturate away the shape correction with them.
  Eigen::VectorXd e = error.vec();
  const double g_norm = e.head<3>().norm();
  if (g_norm > pose_error_cap) e.head<3>() *= pose_error_cap / g_norm;
  const Eigen::VectorXd theta = theta0 - K * e;
  FourierGait g = FourierGait::from_theta(theta, n_units, omega);

  // Saturation: clamp the mean command, then back the oscillation amplitudes
  // off uniformly so |u_i(t)| <= u_max_i at 64 sample phases.
  for (int i = 0; i < n_units; ++i)
    g.u_bar[i] = std::clamp(g.u_bar[i], -model.u_max[i], model.u_max[i]);
  double scale = 1.0;
  for (int i = 0; i < n_units; ++i) {
    const double headroom = model.u_max[i] - std::abs(g.u_bar[i]);
    // Upper bound on the continuous oscillation peak: sum of per-harmonic
    // amplitudes (exact for a single harmonic).
    double peak = 0.0;
    for (int k = 0; k < g.order(); ++k)
      peak += std::hypot(g.A_sin(k, i), g.A_cos(k, i));
    if (peak <= 0.0) continue;
    scale = std::min(scale, std::max(0.0, headroom) / peak);
  }
  if (scale < 1.0) {
    g.A_sin *= scale;
    g.A_cos *= scale;
  }
  return g;
}

FeedbackLaw synthesize_feedback(const ChainModel& model, const LocalMetric& metric,
                                const AveragedSystem& avg, const FourierGait& gait,
                                const Eigen::VectorXd& desired_velocity, const Eigen::MatrixXd& Q,
                                const Eigen::MatrixXd& R_in, FeedbackMode mode,
                                CommandMode cmd_mode) {
  FeedbackLaw law;
  law.theta0 = gait.theta();
  law.period = gait.period();
  law.omega = gait.omega;
  law.n_units = model.n_units;
  law.mode = mode;
  law.nominal = avg.nominal;
  law.desired_velocity = desired_velocity;
  law.Q = Q;
  law.R_in = R_in;

  auto [A_d, B_d] = linearize(model, metric, avg, gait, cmd_mode);
  law.A_d = A_d;
  law.B_d = B_d;
  const Eigen::MatrixXd K_lqr = lqr_gain(A_d, B_d, Q, R_in);
  // Update law acts on e = desired - actual, so the stored gain flips sign
  // relative to the regulator convention Theta = Theta0 - K_lqr (x - x_des).
  law.K = -K_lqr;
  law.closed_loop_radius =
      (A_d + B_d * law.K).eigenvalues().cwiseAbs().maxCoeff();
  return law;
}

}  // namespace salp
