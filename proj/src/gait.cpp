#include "salp/gait.hpp"

#include <cmath>
#include <stdexcept>

namespace salp {

FourierGait FourierGait::zero(int n_units, int order, double omega) {
  FourierGait g;
  g.u_bar = Eigen::VectorXd::Zero(n_units);
  g.A_sin = Eigen::MatrixXd::Zero(order, n_units);
  g.A_cos = Eigen::MatrixXd::Zero(order, n_units);
  g.omega = omega;
  return g;
}

Eigen::VectorXd FourierGait::evaluate(double t) const { return u_bar + oscillation(t); }

Eigen::VectorXd FourierGait::oscillation(double t) const {
  Eigen::VectorXd u = Eigen::VectorXd::Zero(n_units());
  for (int k = 1; k <= order(); ++k) {
    const double ph = 2.0 * k * M_PI * omega * t;
    u += A_sin.row(k - 1).transpose() * std::sin(ph) + A_cos.row(k - 1).transpose() * std::cos(ph);
  }
  return u;
}

double FourierGait::bracket_coeff(int i, int j) const {
  double c = 0.0;
  for (int k = 1; k <= order(); ++k) {
    const double as_i = A_sin(k - 1, i), as_j = A_sin(k - 1, j);
    const double ac_i = A_cos(k - 1, i), ac_j = A_cos(k - 1, j);
    c += (u_bar[j] * as_i - u_bar[i] * as_j - 0.5 * as_i * ac_j + 0.5 * ac_i * as_j) / k;
  }
  return c;
}

Eigen::VectorXd FourierGait::theta() const {
  const int n = n_units();
  Eigen::VectorXd th(theta_dim());
  th.head(n) = u_bar;
  for (int k = 0; k < order(); ++k) {
    th.segment(n * (1 + 2 * k), n) = A_sin.row(k);
    th.segment(n * (2 + 2 * k), n) = A_cos.row(k);
  }
  return th;
}

FourierGait FourierGait::from_theta(const Eigen::VectorXd& theta, int n_units, double omega) {
  if (theta.size() % n_units != 0 || (theta.size() / n_units) % 2 == 0)
    throw std::invalid_argument("FourierGait: theta must hold n*(1+2*order) entries");
  const int order = static_cast<int>((theta.size() / n_units - 1) / 2);
  FourierGait g = zero(n_units, order, omega);
  g.u_bar = theta.head(n_units);
  for (int k = 0; k < order; ++k) {
    g.A_sin.row(k) = theta.segment(n_units * (1 + 2 * k), n_units);
    g.A_cos.row(k) = theta.segment(n_units * (2 + 2 * k), n_units);
  }
  return g;
}

Eigen::VectorXd bracket_coeff_gradient(const FourierGait& g, int i, int j) {
  const int n = g.n_units();
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(g.theta_dim());
  for (int k = 1; k <= g.order(); ++k) {
    const double as_i = g.A_sin(k - 1, i), as_j = g.A_sin(k - 1, j);
    const double ac_i = g.A_cos(k - 1, i), ac_j = g.A_cos(k - 1, j);
    const int sin_off = n * (2 * k - 1), cos_off = n * 2 * k;
    grad[j] += as_i / k;
    grad[i] += -as_j / k;
    grad[sin_off + i] += (g.u_bar[j] - 0.5 * ac_j) / k;
    grad[sin_off + j] += (-g.u_bar[i] + 0.5 * ac_i) / k;
    grad[cos_off + i] += 0.5 * as_j / k;
    grad[cos_off + j] += -0.5 * as_i / k;
  }
  return grad;
}

}  // namespace salp
