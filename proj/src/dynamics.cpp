#include "salp/dynamics.hpp"

namespace salp {

LocalMetric default_test_metric() {
  LocalMetric m;
  m.unit_blocks = {Eigen::Vector3d(4.0, 4.0, 0.20),
                   Eigen::Vector3d(5.0, 12.0, 0.30),
                   Eigen::Vector3d(4.0, 4.0, 0.20)};
  m.joint_coeffs = Eigen::Vector2d(0.10, 0.10);
  return m;
}

Wrench unit_wrench(const LocalMetric& metric, int i, double u_i, const Twist& xi_i,
                   CommandMode mode) {
  if (i < 0 || i >= metric.n_units()) throw std::out_of_range("unit_wrench: unit index out of range");
  const Eigen::Vector3d m = metric.unit_blocks[i];
  const Eigen::Vector3d cmd(u_i, 0.0, 0.0);
  Eigen::Vector3d f;
  if (mode == CommandMode::velocity) {
    f = m.cwiseProduct(cmd - xi_i.vec());
  } else {
    f = cmd - m.cwiseProduct(xi_i.vec());
  }
  return Wrench(f);
}

ControlField control_field(const ChainModel& model, const LocalMetric& metric, const Shape& r,
                           CommandMode mode) {
  const AggregateJacobians J = aggregate_jacobians(model, r);
  const Eigen::VectorXd d = metric.diagonal();
  const Eigen::MatrixXd MJz = d.asDiagonal() * J.J_zeta;
  Eigen::MatrixXd P = J.J_zeta.transpose() * MJz;
  P = 0.5 * (P + P.transpose());  // floating-point asymmetry breaks Cholesky
  Eigen::LLT<Eigen::MatrixXd> llt(P);
  if (llt.info() != Eigen::Success)
    throw SingularDynamics("control_field: J_zeta^T Mtilde J_zeta is not positive definite");
  Eigen::MatrixXd B;
  if (mode == CommandMode::velocity) {
    B = J.J_zeta.transpose() * (d.asDiagonal() * J.J_u);
  } else {
    B = J.J_zeta.transpose() * J.J_u;
  }
  ControlField cf;
  cf.A = -llt.solve(B);
  return cf;
}

Eigen::VectorXd stacked_forces(const ChainModel& model, const LocalMetric& metric, const Shape& r,
                               const Eigen::VectorXd& zeta_dot, const Eigen::VectorXd& u,
                               CommandMode mode) {
  const AggregateJacobians J = aggregate_jacobians(model, r);
  const Eigen::VectorXd d = metric.diagonal();
  if (mode == CommandMode::velocity) {
    return d.cwiseProduct(J.J_zeta * zeta_dot + J.J_u * u);
  }
  return J.J_u * u + d.cwiseProduct(J.J_zeta * zeta_dot);
}

Eigen::VectorXd config_force(const ChainModel& model, const LocalMetric& metric, const Shape& r,
                             const Eigen::VectorXd& zeta_dot, const Eigen::VectorXd& u,
                             CommandMode mode) {
  const AggregateJacobians J = aggregate_jacobians(model, r);
  return J.J_zeta.transpose() * stacked_forces(model, metric, r, zeta_dot, u, mode);
}

void validate_metric(const ChainModel& model, const LocalMetric& metric, CommandMode mode) {
  if (metric.n_units() != model.n_units || metric.joint_coeffs.size() != model.n_joints())
    throw std::invalid_argument("validate_metric: metric dimensions do not match model");
  if (!metric.nonnegative())
    throw std::invalid_argument("validate_metric: metric diagonal must be nonnegative");
  Shape r = Shape::Zero(model.n_joints());
  const int grid = 21;
  for (int a = 0; a < grid; ++a) {
    const double ta = double(a) / (grid - 1);
    r[0] = model.joint_min[0] + ta * (model.joint_max[0] - model.joint_min[0]);
    for (int b = 0; b < (model.n_joints() > 1 ? grid : 1); ++b) {
      if (model.n_joints() > 1) {
        const double tb = double(b) / (grid - 1);
        r[1] = model.joint_min[1] + tb * (model.joint_max[1] - model.joint_min[1]);
      }
      control_field(model, metric, r, mode);  // throws SingularDynamics on failure
    }
  }
}

}  // namespace salp
