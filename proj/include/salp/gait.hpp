#pragma once

#include <Eigen/Dense>

// Fourier-series gait: u(t) = u_bar + sum_k A_sin[k] sin(2k pi w t)
//                                   + A_cos[k] cos(2k pi w t).
// Parameter flattening Theta = [u_bar, A_sin1, A_cos1, ...] in unit-major
// blocks, matching the planner's decision vector.
namespace salp {

struct FourierGait {
  Eigen::VectorXd u_bar;  // n_units
  Eigen::MatrixXd A_sin;  // order x n_units
  Eigen::MatrixXd A_cos;  // order x n_units
  double omega = 1.0 / 6.0;  // base frequency, Hz

  int n_units() const { return static_cast<int>(u_bar.size()); }
  int order() const { return static_cast<int>(A_sin.rows()); }
  double period() const { return 1.0 / omega; }

  static FourierGait zero(int n_units, int order, double omega);

  Eigen::VectorXd evaluate(double t) const;
  // Oscillatory part only (evaluate(t) minus u_bar).
  Eigen::VectorXd oscillation(double t) const;

  // Lie-bracket excitation coefficient u_[i,j] for a unit pair, i < j:
  // sum_k (1/k)(u_bar_j As_ki - u_bar_i As_kj - As_ki Ac_kj / 2 + Ac_ki As_kj / 2).
  double bracket_coeff(int i, int j) const;

  int theta_dim() const { return n_units() * (1 + 2 * order()); }
  Eigen::VectorXd theta() const;
  static FourierGait from_theta(const Eigen::VectorXd& theta, int n_units, double omega);
};

// d bracket_coeff(i,j) / d theta, used for analytic constraint gradients.
Eigen::VectorXd bracket_coeff_gradient(const FourierGait& g, int i, int j);

}  // namespace salp
