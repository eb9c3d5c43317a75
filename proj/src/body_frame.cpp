#include "salp/body_frame.hpp"

#include <cmath>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace salp {

Eigen::Vector3d FrameField::at(const Eigen::Vector2d& r) const {
  const double fx = (nx > 1) ? (r.x() - lo.x()) / (hi.x() - lo.x()) * (nx - 1) : 0.0;
  const double fy = (ny > 1) ? (r.y() - lo.y()) / (hi.y() - lo.y()) * (ny - 1) : 0.0;
  const double cx = std::clamp(fx, 0.0, static_cast<double>(nx - 1));
  const double cy = std::clamp(fy, 0.0, static_cast<double>(ny - 1));
  const int ix = std::min(static_cast<int>(cx), nx - 2 >= 0 ? nx - 2 : 0);
  const int iy = std::min(static_cast<int>(cy), ny - 2 >= 0 ? ny - 2 : 0);
  const double tx = nx > 1 ? cx - ix : 0.0;
  const double ty = ny > 1 ? cy - iy : 0.0;
  auto node = [&](int i, int j) { return offsets[j * nx + std::min(i, nx - 1)]; };
  const Eigen::Vector3d a = node(ix, iy), b = node(ix + (nx > 1 ? 1 : 0), iy);
  const int jy = iy + (ny > 1 ? 1 : 0);
  const Eigen::Vector3d c = node(ix, jy), d = node(ix + (nx > 1 ? 1 : 0), jy);
  return (1 - ty) * ((1 - tx) * a + tx * b) + ty * ((1 - tx) * c + tx * d);
}

namespace {

Eigen::VectorXd fiber_residuals(const ChainModel& model, const LocalMetric& metric, const Shape& r,
                                const Eigen::Vector3d& offset) {
  const Eigen::MatrixXd A = control_field(model, metric, r).A;
  const Eigen::Matrix3d T = adjoint_inverse(Pose(offset[0], offset[1], offset[2]));
  const Eigen::MatrixXd F = T * A.topRows<3>();
  return Eigen::Map<const Eigen::VectorXd>(F.data(), F.size());
}

}  // namespace

double frame_objective(const ChainModel& model, const LocalMetric& metric, const Shape& r,
                       const Eigen::Vector3d& offset) {
  return fiber_residuals(model, metric, r, offset).squaredNorm();
}

Eigen::Vector3d optimize_frame_at(const ChainModel& model, const LocalMetric& metric,
                                  const Shape& r) {
  Eigen::Vector3d h = Eigen::Vector3d::Zero();
  const double fd = 1e-7;
  for (int it = 0; it < 100; ++it) {
    const Eigen::VectorXd res = fiber_residuals(model, metric, r, h);
    Eigen::MatrixXd J(res.size(), 3);
    for (int k = 0; k < 3; ++k) {
      Eigen::Vector3d hp = h, hm = h;
      hp[k] += fd;
      hm[k] -= fd;
      J.col(k) = (fiber_residuals(model, metric, r, hp) - fiber_residuals(model, metric, r, hm)) /
                 (2.0 * fd);
    }
    const Eigen::Vector3d g = J.transpose() * res;
    if (g.norm() < 1e-12) break;
    Eigen::Matrix3d H = J.transpose() * J;
    H.diagonal().array() += 1e-12;
    const Eigen::Vector3d delta = -H.ldlt().solve(g);

    double alpha = 1.0;
    const double f0 = res.squaredNorm();
    while (alpha > 1e-12 &&
           frame_objective(model, metric, r, h + alpha * delta) > f0 + 1e-4 * alpha * g.dot(delta))
      alpha *= 0.5;
    h += alpha * delta;
    if (alpha * delta.norm() < 1e-14) break;
  }
  return h;
}

FrameField optimize_body_frame(const ChainModel& model, const LocalMetric& metric,
                               const Eigen::Vector2d& lo, const Eigen::Vector2d& hi, int nx,
                               int ny, bool serial) {
  if (model.n_joints() != 2)
    throw std::invalid_argument("optimize_body_frame: requires a two-joint shape space");
  if (nx < 1 || ny < 1 || (lo.array() > hi.array()).any())
    throw std::invalid_argument("optimize_body_frame: empty region");

  FrameField field;
  field.lo = lo;
  field.hi = hi;
  field.nx = nx;
  field.ny = ny;
  field.offsets.assign(static_cast<size_t>(nx) * ny, Eigen::Vector3d::Zero());

  double obj0 = 0.0, obj1 = 0.0;
#pragma omp parallel for collapse(2) schedule(static) reduction(+ : obj0, obj1) if (!serial)
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      Shape r(2);
      r << (nx > 1 ? lo.x() + (hi.x() - lo.x()) * i / (nx - 1) : lo.x()),
          (ny > 1 ? lo.y() + (hi.y() - lo.y()) * j / (ny - 1) : lo.y());
      const Eigen::Vector3d h = optimize_frame_at(model, metric, r);
      field.offsets[static_cast<size_t>(j) * nx + i] = h;
      obj0 += frame_objective(model, metric, r, Eigen::Vector3d::Zero());
      obj1 += frame_objective(model, metric, r, h);
    }
  field.objective_default = obj0;
  field.objective_optimized = obj1;
  return field;
}

}  // namespace salp
