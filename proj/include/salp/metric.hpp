#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <vector>

// Block-diagonal aggregate drag-coefficient matrix over units and joints.
// Unit blocks are diagonal 3x3 in wheel-aligned coordinates; joints carry a
// scalar viscous coefficient each. Entry order matches the stacked Jacobian
// rows: unit 0 (x, y, theta), ..., unit n-1, joints 0..n-2.
namespace salp {

struct LocalMetric {
  std::vector<Eigen::Vector3d> unit_blocks;  // diagonal entries per unit
  Eigen::VectorXd joint_coeffs;

  int n_units() const { return static_cast<int>(unit_blocks.size()); }
  int dim() const { return 3 * n_units() + static_cast<int>(joint_coeffs.size()); }

  Eigen::VectorXd diagonal() const {
    Eigen::VectorXd d(dim());
    for (int i = 0; i < n_units(); ++i) d.segment<3>(3 * i) = unit_blocks[i];
    d.tail(joint_coeffs.size()) = joint_coeffs;
    return d;
  }

  static LocalMetric from_diagonal(const Eigen::VectorXd& d, int n_units) {
    if (d.size() != 4 * n_units - 1)
      throw std::invalid_argument("LocalMetric: diagonal must have 4n-1 entries");
    LocalMetric m;
    m.unit_blocks.resize(n_units);
    for (int i = 0; i < n_units; ++i) m.unit_blocks[i] = d.segment<3>(3 * i);
    m.joint_coeffs = d.tail(n_units - 1);
    return m;
  }

  bool nonnegative() const { return (diagonal().array() >= 0.0).all(); }
};

// Symmetric-between-side-wheels drag values in the spirit of the identified
// LandSalp model: dominant rolling-axis drag, a heavy lateral term on the
// center wheel, light rotational and joint friction.
LocalMetric default_test_metric();

}  // namespace salp
