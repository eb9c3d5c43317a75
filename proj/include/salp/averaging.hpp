#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "salp/dynamics.hpp"
#include "salp/gait.hpp"

// Truncated-BCH averaging of periodic gaits: Lie brackets of the control
// vector fields, the augmented controllability system, and the averaged
// configuration velocity over one cycle.
namespace salp {

// Lie bracket column [A_i, A_j] evaluated at shape r. Fiber rows combine the
// se(2) algebra bracket of the fiber parts with shape-derivative cross terms;
// shape rows carry only the cross terms. Shape derivatives of A are central
// differences with step 1e-5 rad.
Eigen::VectorXd lie_bracket(const ChainModel& model, const LocalMetric& metric, const Shape& r,
                            int i, int j, CommandMode mode = CommandMode::velocity);

struct AveragedSystem {
  Eigen::MatrixXd A_aug;  // (2+n) x (n + n(n-1)/2); direct columns then pairs (i<j)
  Shape nominal;
  double omega = 1.0 / 6.0;
  int n_units = 0;

  int n_pairs() const { return n_units * (n_units - 1) / 2; }
  // Column index of bracket pair (i, j), i < j, after the n direct columns.
  int pair_column(int i, int j) const;
};

AveragedSystem augmented_system(const ChainModel& model, const LocalMetric& metric,
                                const Shape& nominal, double omega,
                                CommandMode mode = CommandMode::velocity);

// Augmented input [u_bar; u_[i,j] / (2 pi omega)] of a gait.
Eigen::VectorXd augmented_input(const FourierGait& gait);

// d(augmented input)/d(Theta), analytic; rows match augmented_input.
Eigen::MatrixXd augmented_input_jacobian(const FourierGait& gait);

// Averaged velocity zeta_dot_avg = A u_bar + sum (1/(2 pi omega)) u_[i,j] [A_i, A_j],
// all fields evaluated at the nominal shape.
Eigen::VectorXd average_velocity(const ChainModel& model, const LocalMetric& metric,
                                 const Shape& nominal, const FourierGait& gait,
                                 CommandMode mode = CommandMode::velocity);

// Shape-controlled averaging (fields map shape velocity to fiber velocity):
// net displacement twist of a closed gait curve as the surface integral of
// dA + [A_0, A_1] over the enclosed region, by triangulated quadrature.
// The field callback returns a 3x2 matrix at a 2-D shape point.
using ShapeField = std::function<Eigen::Matrix<double, 3, 2>(const Eigen::Vector2d&)>;
Twist shape_controlled_average(const ShapeField& field, const std::vector<Eigen::Vector2d>& curve,
                               int subdivisions = 64);

}  // namespace salp
