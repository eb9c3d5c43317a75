#pragma once

#include <Eigen/Dense>
#include <vector>

#include "salp/se2.hpp"

// Kinematics of an N-link planar chain with N-1 passive joints and one
// jet/wheel unit per link. Joints sit at link endpoints, units at link
// centers. The system body frame is placed at the center of mass with the
// mean link orientation (equal link masses, concentrated at link centers).
namespace salp {

using Shape = Eigen::VectorXd;  // one angle per joint, length n_units - 1

struct ChainModel {
  int n_units = 3;
  double link_length = 0.27;            // m
  Eigen::VectorXd beta;                 // wheel orientation per unit, rad, relative to link axis
  Eigen::VectorXd joint_min, joint_max; // rad, per joint
  Eigen::VectorXd u_max;                // command limit per unit (wheel-surface m/s)

  int n_joints() const { return n_units - 1; }
  int config_dim() const { return 2 + n_units; }  // 3 fiber + (n_units - 1) shape

  bool shape_in_limits(const Shape& r) const {
    for (int j = 0; j < n_joints(); ++j)
      if (r[j] < joint_min[j] || r[j] > joint_max[j]) return false;
    return true;
  }

  void validate() const;
};

// LandSalp geometry per its published specifications: 3 links of 0.27 m,
// wheels at (-57, -130, -57) deg, 83 mm omniwheels driven at (32, 14, 32) RPM.
ChainModel landsalp_model();

struct ConfigVelocity {
  Twist xi;                   // system body velocity
  Eigen::VectorXd alpha_dot;  // joint rates

  Eigen::VectorXd vec() const {
    Eigen::VectorXd v(3 + alpha_dot.size());
    v.head<3>() = xi.vec();
    v.tail(alpha_dot.size()) = alpha_dot;
    return v;
  }
  static ConfigVelocity from_vec(const Eigen::VectorXd& v) {
    ConfigVelocity cv;
    cv.xi = Twist(Eigen::Vector3d(v.head<3>()));
    cv.alpha_dot = v.tail(v.size() - 3);
    return cv;
  }
};

// All link/unit poses expressed in the link-0 frame, plus the body frame.
struct ChainFrames {
  std::vector<Pose> link;                 // link-center poses
  std::vector<Eigen::Vector2d> joint_pos; // joint positions
  Pose body;                              // COM + mean orientation frame
};
ChainFrames chain_frames(const ChainModel& model, const Shape& r);

// Pose of unit i (0-based) in the system body frame.
Pose unit_frame(const ChainModel& model, const Shape& r, int i);

// 3 x (2+n) Jacobian mapping configuration velocity to the body velocity of
// unit i: fiber block Ad^-1 of unit_frame, shape columns from differentiating
// the unit pose relative to the moving body frame.
Eigen::MatrixXd unit_jacobian(const ChainModel& model, const Shape& r, int i);

// Stacked Jacobians in wheel-aligned coordinates. Row order: unit 0
// (x_wheel, y_wheel, theta), ..., unit n-1, then joints 0..n-2. J_u maps the
// n commands onto each wheel's rolling axis (unit entries) with zero joint rows.
struct AggregateJacobians {
  Eigen::MatrixXd J_zeta;  // (4n-1) x (2+n)
  Eigen::MatrixXd J_u;     // (4n-1) x n
};
AggregateJacobians aggregate_jacobians(const ChainModel& model, const Shape& r);

}  // namespace salp
