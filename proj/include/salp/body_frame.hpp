#pragma once

#include <Eigen/Dense>
#include <vector>

#include "salp/dynamics.hpp"

// Optimized body-frame placement: per-shape offsets h(r) from the default
// COM/mean-orientation frame that minimize the Frobenius norm of the fiber
// rows of the control vector field over a shape region (grid-discretized).
namespace salp {

struct FrameField {
  Eigen::Vector2d lo, hi;  // shape box over the first two joints
  int nx = 0, ny = 0;
  std::vector<Eigen::Vector3d> offsets;  // (x, y, theta) per grid node, row-major in y
  double objective_default = 0.0;   // integrated |A_fiber|_F^2 with identity offsets
  double objective_optimized = 0.0;

  // Bilinear interpolation of the offset coordinates, clamped to the box.
  Eigen::Vector3d at(const Eigen::Vector2d& r) const;
  double reduction_ratio() const {
    return objective_default > 0.0 ? objective_optimized / objective_default : 1.0;
  }
};

// Gauss-Newton over (x, y, theta) at each grid node; nodes are independent
// and evaluated in parallel. Requires a two-joint shape space.
FrameField optimize_body_frame(const ChainModel& model, const LocalMetric& metric,
                               const Eigen::Vector2d& lo, const Eigen::Vector2d& hi, int nx,
                               int ny, bool serial = false);

// Objective at a single shape for a given frame offset: squared Frobenius
// norm of Ad_h^-1 applied to the fiber rows of A.
double frame_objective(const ChainModel& model, const LocalMetric& metric, const Shape& r,
                       const Eigen::Vector3d& offset);

// Unconstrained minimizer at one shape (the single-point-region case).
Eigen::Vector3d optimize_frame_at(const ChainModel& model, const LocalMetric& metric,
                                  const Shape& r);

}  // namespace salp
