#include "salp/chain.hpp"

#include <stdexcept>

namespace salp {

void ChainModel::validate() const {
  if (n_units < 2) throw std::invalid_argument("ChainModel: n_units must be >= 2");
  if (link_length <= 0.0) throw std::invalid_argument("ChainModel: link_length must be positive");
  if (beta.size() != n_units) throw std::invalid_argument("ChainModel: beta size mismatch");
  if (joint_min.size() != n_joints() || joint_max.size() != n_joints())
    throw std::invalid_argument("ChainModel: joint limit size mismatch");
  if (u_max.size() != n_units) throw std::invalid_argument("ChainModel: u_max size mismatch");
  for (int j = 0; j < n_joints(); ++j)
    if (!(joint_min[j] < joint_max[j]))
      throw std::invalid_argument("ChainModel: joint_min must be below joint_max");
  if ((u_max.array() <= 0.0).any()) throw std::invalid_argument("ChainModel: u_max must be positive");
}

ChainModel landsalp_model() {
  ChainModel m;
  m.n_units = 3;
  m.link_length = 0.27;
  m.beta = Eigen::Vector3d(-57.0, -130.0, -57.0) * M_PI / 180.0;
  m.joint_min = Eigen::Vector2d(-M_PI / 3.0, -M_PI / 3.0);
  m.joint_max = Eigen::Vector2d(M_PI / 3.0, M_PI / 3.0);
  // RPM -> wheel-surface speed with 83 mm wheel diameter.
  const double wheel_radius = 0.083 / 2.0;
  m.u_max = Eigen::Vector3d(32.0, 14.0, 32.0) * (2.0 * M_PI / 60.0) * wheel_radius;
  m.validate();
  return m;
}

ChainFrames chain_frames(const ChainModel& model, const Shape& r) {
  const int n = model.n_units;
  const double half = 0.5 * model.link_length;
  ChainFrames f;
  f.link.resize(n);
  f.joint_pos.resize(n - 1);

  double phi = 0.0;
  Eigen::Vector2d p(0.0, 0.0);
  f.link[0] = Pose(0.0, 0.0, 0.0);
  for (int j = 0; j < n - 1; ++j) {
    const Eigen::Vector2d q = p + Eigen::Vector2d(half * std::cos(phi), half * std::sin(phi));
    f.joint_pos[j] = q;
    phi += r[j];
    p = q + Eigen::Vector2d(half * std::cos(phi), half * std::sin(phi));
    f.link[j + 1] = Pose(p[0], p[1], phi);
  }

  Eigen::Vector2d com = Eigen::Vector2d::Zero();
  double mean_phi = 0.0;
  for (int i = 0; i < n; ++i) {
    com += f.link[i].translation();
    mean_phi += f.link[i].theta;
  }
  com /= n;
  mean_phi /= n;
  f.body = Pose(com[0], com[1], mean_phi);
  return f;
}

Pose unit_frame(const ChainModel& model, const Shape& r, int i) {
  if (i < 0 || i >= model.n_units) throw std::out_of_range("unit_frame: unit index out of range");
  const ChainFrames f = chain_frames(model, r);
  return compose(inverse(f.body), f.link[i]);
}

Eigen::MatrixXd unit_jacobian(const ChainModel& model, const Shape& r, int i) {
  if (i < 0 || i >= model.n_units) throw std::out_of_range("unit_jacobian: unit index out of range");
  const int n = model.n_units;
  const ChainFrames f = chain_frames(model, r);
  const Pose h_i = compose(inverse(f.body), f.link[i]);
  const Eigen::Matrix3d ad_hi_inv = adjoint_inverse(h_i);

  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(3, model.config_dim());
  J.leftCols<3>() = ad_hi_inv;

  // To differentiate the moving body frame, work in link-0 coordinates:
  // rotating joint j by dalpha pivots every downstream link about the joint.
  const Eigen::Matrix2d rot90 = (Eigen::Matrix2d() << 0.0, -1.0, 1.0, 0.0).finished();
  const Eigen::Matrix2d Rb_t = f.body.rotation().transpose();
  const Eigen::Matrix2d Ri_t = f.link[i].rotation().transpose();
  for (int j = 0; j < n - 1; ++j) {
    Eigen::Vector2d dcom = Eigen::Vector2d::Zero();
    for (int k = j + 1; k < n; ++k) dcom += rot90 * (f.link[k].translation() - f.joint_pos[j]);
    dcom /= n;
    const double dmean_phi = double(n - 1 - j) / n;
    const Eigen::Vector3d body_col =
        (Eigen::Vector3d() << Rb_t * dcom, dmean_phi).finished();

    Eigen::Vector3d link_col = Eigen::Vector3d::Zero();
    if (i > j) {
      const Eigen::Vector2d dp = rot90 * (f.link[i].translation() - f.joint_pos[j]);
      link_col << Ri_t * dp, 1.0;
    }
    J.col(3 + j) = link_col - ad_hi_inv * body_col;
  }
  return J;
}

AggregateJacobians aggregate_jacobians(const ChainModel& model, const Shape& r) {
  const int n = model.n_units;
  const int rows = 4 * n - 1;
  AggregateJacobians out;
  out.J_zeta = Eigen::MatrixXd::Zero(rows, model.config_dim());
  out.J_u = Eigen::MatrixXd::Zero(rows, n);
  for (int i = 0; i < n; ++i) {
    const Eigen::Matrix3d wheel_rot = adjoint_inverse(Pose(0.0, 0.0, model.beta[i]));
    out.J_zeta.middleRows<3>(3 * i) = wheel_rot * unit_jacobian(model, r, i);
    out.J_u(3 * i, i) = 1.0;  // command acts along the wheel rolling axis
  }
  out.J_zeta.bottomRightCorner(n - 1, n - 1).setIdentity();
  return out;
}

}  // namespace salp
