#include "salp/averaging.hpp"

#include <stdexcept>

namespace salp {

namespace {
constexpr double kShapeStep = 1e-5;

// d A / d r_k by central differences.
std::vector<Eigen::MatrixXd> field_shape_derivatives(const ChainModel& model,
                                                     const LocalMetric& metric, const Shape& r,
                                                     CommandMode mode) {
  std::vector<Eigen::MatrixXd> dA(model.n_joints());
  for (int k = 0; k < model.n_joints(); ++k) {
    Shape rp = r, rm = r;
    rp[k] += kShapeStep;
    rm[k] -= kShapeStep;
    dA[k] = (control_field(model, metric, rp, mode).A - control_field(model, metric, rm, mode).A) /
            (2.0 * kShapeStep);
  }
  return dA;
}
}  // namespace

Eigen::VectorXd lie_bracket(const ChainModel& model, const LocalMetric& metric, const Shape& r,
                            int i, int j, CommandMode mode) {
  const int n = model.n_units;
  if (i < 0 || i >= n || j < 0 || j >= n) throw std::out_of_range("lie_bracket: bad unit index");
  if (i == j) return Eigen::VectorXd::Zero(model.config_dim());

  const Eigen::MatrixXd A = control_field(model, metric, r, mode).A;
  const auto dA = field_shape_derivatives(model, metric, r, mode);

  const Twist xi_i{Eigen::Vector3d(A.col(i).head<3>())};
  const Twist xi_j{Eigen::Vector3d(A.col(j).head<3>())};
  const Eigen::VectorXd si = A.col(i).tail(model.n_joints());
  const Eigen::VectorXd sj = A.col(j).tail(model.n_joints());

  Eigen::VectorXd out = Eigen::VectorXd::Zero(model.config_dim());
  out.head<3>() = algebra_bracket(xi_i, xi_j).vec();
  for (int k = 0; k < model.n_joints(); ++k) {
    out.head<3>() += dA[k].col(j).head<3>() * si[k] - dA[k].col(i).head<3>() * sj[k];
    out.tail(model.n_joints()) +=
        dA[k].col(j).tail(model.n_joints()) * si[k] - dA[k].col(i).tail(model.n_joints()) * sj[k];
  }
  return out;
}

int AveragedSystem::pair_column(int i, int j) const {
  if (i >= j) throw std::invalid_argument("pair_column: requires i < j");
  int idx = 0;
  for (int a = 0; a < n_units; ++a)
    for (int b = a + 1; b < n_units; ++b, ++idx)
      if (a == i && b == j) return n_units + idx;
  throw std::out_of_range("pair_column: bad pair");
}

AveragedSystem augmented_system(const ChainModel& model, const LocalMetric& metric,
                                const Shape& nominal, double omega, CommandMode mode) {
  AveragedSystem sys;
  sys.nominal = nominal;
  sys.omega = omega;
  sys.n_units = model.n_units;
  const int n = model.n_units;
  sys.A_aug.resize(model.config_dim(), n + sys.n_pairs());
  sys.A_aug.leftCols(n) = control_field(model, metric, nominal, mode).A;
  int col = n;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      sys.A_aug.col(col++) = lie_bracket(model, metric, nominal, i, j, mode);
  return sys;
}

Eigen::VectorXd augmented_input(const FourierGait& gait) {
  const int n = gait.n_units();
  Eigen::VectorXd u(n + n * (n - 1) / 2);
  u.head(n) = gait.u_bar;
  int idx = n;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      u[idx++] = gait.bracket_coeff(i, j) / (2.0 * M_PI * gait.omega);
  return u;
}

Eigen::MatrixXd augmented_input_jacobian(const FourierGait& gait) {
  const int n = gait.n_units();
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n + n * (n - 1) / 2, gait.theta_dim());
  for (int i = 0; i < n; ++i) J(i, i) = 1.0;
  int row = n;
  const double scale = 1.0 / (2.0 * M_PI * gait.omega);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      J.row(row++) = scale * bracket_coeff_gradient(gait, i, j).transpose();
  return J;
}

Eigen::VectorXd average_velocity(const ChainModel& model, const LocalMetric& metric,
                                 const Shape& nominal, const FourierGait& gait, CommandMode mode) {
  const AveragedSystem sys = augmented_system(model, metric, nominal, gait.omega, mode);
  return sys.A_aug * augmented_input(gait);
}

namespace {
bool segments_intersect(const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                        const Eigen::Vector2d& c, const Eigen::Vector2d& d) {
  auto cross = [](const Eigen::Vector2d& u, const Eigen::Vector2d& v) {
    return u.x() * v.y() - u.y() * v.x();
  };
  const double d1 = cross(b - a, c - a), d2 = cross(b - a, d - a);
  const double d3 = cross(d - c, a - c), d4 = cross(d - c, b - c);
  return d1 * d2 < 0.0 && d3 * d4 < 0.0;
}

Eigen::Vector3d curvature_integrand(const ShapeField& field, const Eigen::Vector2d& p) {
  constexpr double h = 1e-6;
  const Eigen::Matrix<double, 3, 2> A = field(p);
  const Eigen::Matrix<double, 3, 2> Ax1 =
      (field(p + Eigen::Vector2d(h, 0)) - field(p - Eigen::Vector2d(h, 0))) / (2.0 * h);
  const Eigen::Matrix<double, 3, 2> Ax2 =
      (field(p + Eigen::Vector2d(0, h)) - field(p - Eigen::Vector2d(0, h))) / (2.0 * h);
  const Eigen::Vector3d curl = Ax1.col(1) - Ax2.col(0);
  const Twist a1{Eigen::Vector3d(A.col(0))}, a2{Eigen::Vector3d(A.col(1))};
  return curl + algebra_bracket(a1, a2).vec();
}
}  // namespace

Twist shape_controlled_average(const ShapeField& field, const std::vector<Eigen::Vector2d>& curve,
                               int subdivisions) {
  const size_t m = curve.size();
  if (m < 3) throw std::invalid_argument("shape_controlled_average: need a closed curve");
  for (size_t a = 0; a < m; ++a)
    for (size_t b = a + 2; b < m; ++b) {
      if (a == 0 && b == m - 1) continue;  // adjacent through the wrap
      if (segments_intersect(curve[a], curve[(a + 1) % m], curve[b], curve[(b + 1) % m]))
        throw std::invalid_argument("shape_controlled_average: self-intersecting gait curve");
    }

  Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
  for (const auto& p : curve) centroid += p;
  centroid /= double(m);

  // Signed fan triangulation from the centroid, each triangle refined into
  // subdivisions^2 congruent cells with centroid-rule quadrature.
  Eigen::Vector3d total = Eigen::Vector3d::Zero();
  const int s = std::max(subdivisions, 1);
  for (size_t e = 0; e < m; ++e) {
    const Eigen::Vector2d v0 = centroid, v1 = curve[e], v2 = curve[(e + 1) % m];
    const Eigen::Vector2d e1 = (v1 - v0) / s, e2 = (v2 - v0) / s;
    const double cell_area = 0.5 * (e1.x() * e2.y() - e1.y() * e2.x());
    for (int a = 0; a < s; ++a) {
      for (int b = 0; b < s - a; ++b) {
        const Eigen::Vector2d base = v0 + double(a) * e1 + double(b) * e2;
        // Upright cell.
        total += cell_area * curvature_integrand(field, base + (e1 + e2) / 3.0);
        // Inverted cell (absent on the hypotenuse row).
        if (b < s - a - 1)
          total += cell_area * curvature_integrand(field, base + (2.0 / 3.0) * (e1 + e2));
      }
    }
  }
  return Twist(total);
}

}  // namespace salp
