#pragma once

#include <Eigen/Dense>

#include "salp/averaging.hpp"
#include "salp/gait.hpp"

// Cycle-discrete LQR about a nominal shape and gait: linearization of the
// averaged dynamics, exponential-map discretization over one period, Riccati
// solve, and the per-cycle parameter update law.
namespace salp {

struct NonStabilizable : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class FeedbackMode { initial_phase, cycle_integrated };

// Configuration error in the desired-minus-actual sense: the group part is
// log(g^-1 g_desired), which is invariant under common left translations.
struct ErrorState {
  Twist delta_g;
  Eigen::VectorXd delta_r;

  Eigen::VectorXd vec() const {
    Eigen::VectorXd e(3 + delta_r.size());
    e.head<3>() = delta_g.vec();
    e.tail(delta_r.size()) = delta_r;
    return e;
  }
  static ErrorState between(const Pose& actual, const Pose& desired, const Shape& actual_r,
                            const Shape& desired_r) {
    return {log(compose(inverse(actual), desired)), desired_r - actual_r};
  }
};

// Discrete linearization (A_d, B_d) of the averaged per-cycle map. Position
// columns of the continuous state Jacobian are zero (A is independent of g);
// shape columns are central differences; the input Jacobian is analytic in
// Theta. Discretized via the matrix exponential of the stacked affine system.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> linearize(const ChainModel& model,
                                                      const LocalMetric& metric,
                                                      const AveragedSystem& avg,
                                                      const FourierGait& gait,
                                                      CommandMode mode = CommandMode::velocity);

// Discrete-time LQR gain from the Riccati fixed point, tolerance 1e-12.
// Throws NonStabilizable when the iteration fails to settle.
Eigen::MatrixXd lqr_gain(const Eigen::MatrixXd& A_d, const Eigen::MatrixXd& B_d,
                         const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R_in);

struct FeedbackLaw {
  // Update-law gain in the published sign convention Theta = Theta0 - K e
  // with e = desired - actual; equals minus the regulator gain on the
  // actual-minus-desired state error.
  Eigen::MatrixXd K;
  Eigen::VectorXd theta0;
  double period = 6.0;
  double omega = 1.0 / 6.0;
  int n_units = 3;
  FeedbackMode mode = FeedbackMode::initial_phase;
  Shape nominal;
  Eigen::VectorXd desired_velocity;  // (2+n) averaged tracking target
  Eigen::MatrixXd Q, R_in;
  double closed_loop_radius = 0.0;
  Eigen::MatrixXd A_d, B_d;
  // Norm cap on the group error fed to K (anti-windup); inactive near the
  // equilibrium so the linear closed-loop analysis is unchanged.
  double pose_error_cap = 0.02;

  // Theta for the next cycle; oscillatory amplitudes are uniformly scaled
  // down if the commanded u(t) could exceed u_max at any phase.
  FourierGait update(const ErrorState& error, const ChainModel& model) const;
};

// Default weights: position 1 m^-2, heading 1 rad^-2, joints 50 rad^-2.
// Shape drift invalidates the gait geometry, so joint errors are weighted far
// above pose errors; pose recovery then rides on the slower modes.
Eigen::MatrixXd default_state_weights(int n_joints);

// Default input weights: 0.01 on the mean commands, 0.6 on the oscillatory
// amplitudes. The drag dynamics are exactly linear in the mean command, so
// corrections routed through it track the cycle linearization at any size;
// amplitude corrections act through the bracket (bilinear) terms and are only
// trustworthy as small deviations, hence the heavier penalty.
Eigen::MatrixXd default_input_weights(int theta_dim);

FeedbackLaw synthesize_feedback(const ChainModel& model, const LocalMetric& metric,
                                const AveragedSystem& avg, const FourierGait& gait,
                                const Eigen::VectorXd& desired_velocity, const Eigen::MatrixXd& Q,
                                const Eigen::MatrixXd& R_in,
                                FeedbackMode mode = FeedbackMode::initial_phase,
                                CommandMode cmd_mode = CommandMode::velocity);

}  // namespace salp
