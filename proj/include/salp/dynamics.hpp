#pragma once

#include <Eigen/Dense>

#include "salp/chain.hpp"
#include "salp/metric.hpp"

// Viscous-drag force model and the first-order control vector field. The
// quasi-static balance J_zeta^T Mtilde (J_zeta zeta_dot + J_u u) = 0 defines
// the velocity-command dynamics; the force-command form drops the Mtilde
// factor on the command term.
namespace salp {

enum class CommandMode { velocity, force };

struct SingularDynamics : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Net wrench on unit i in its wheel frame: M_i (u_i e_x - xi_i) in velocity
// mode, u_i e_x - M_i xi_i in force mode.
Wrench unit_wrench(const LocalMetric& metric, int i, double u_i, const Twist& xi_i,
                   CommandMode mode = CommandMode::velocity);

struct ControlField {
  Eigen::MatrixXd A;  // (2+n) x n
};

// A(r) solving the quasi-static force balance; SPD factorization, never an
// explicit inverse. Throws SingularDynamics when J_zeta^T Mtilde J_zeta is
// not positive definite.
ControlField control_field(const ChainModel& model, const LocalMetric& metric, const Shape& r,
                           CommandMode mode = CommandMode::velocity);

// F_zeta = J_zeta^T Mtilde [J_zeta J_u][zeta_dot; u] (velocity mode); zero at
// zeta_dot = A u.
Eigen::VectorXd config_force(const ChainModel& model, const LocalMetric& metric, const Shape& r,
                             const Eigen::VectorXd& zeta_dot, const Eigen::VectorXd& u,
                             CommandMode mode = CommandMode::velocity);

// Stacked wheel/joint-frame force vector Mtilde [J_zeta J_u][zeta_dot; u]
// (velocity mode) whose rolling-axis components a series-elastic actuator
// would measure.
Eigen::VectorXd stacked_forces(const ChainModel& model, const LocalMetric& metric, const Shape& r,
                               const Eigen::VectorXd& zeta_dot, const Eigen::VectorXd& u,
                               CommandMode mode = CommandMode::velocity);

// Pre-validates invertibility of J_zeta^T Mtilde J_zeta on a 21x21 grid over
// the joint-limit box (first two joints; others held at zero).
void validate_metric(const ChainModel& model, const LocalMetric& metric,
                     CommandMode mode = CommandMode::velocity);

}  // namespace salp
