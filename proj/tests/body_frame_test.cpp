#include <doctest.h>

#include "salp/body_frame.hpp"

using namespace salp;

TEST_CASE("single-shape frame optimization beats a dense offset search") {
  const ChainModel model = landsalp_model();
  const LocalMetric metric = default_test_metric();
  Shape r(2);
  r << 0.4, -0.25;

  const Eigen::Vector3d h = optimize_frame_at(model, metric, r);
  const double opt = frame_objective(model, metric, r, h);
  const double base = frame_objective(model, metric, r, Eigen::Vector3d::Zero());
  CHECK(opt <= base + 1e-15);

  // Coarse-to-fine grid search oracle over (x, y, theta).
  Eigen::Vector3d best = Eigen::Vector3d::Zero();
  double best_val = base;
  double span = 0.2;
  for (int level = 0; level < 4; ++level) {
    const Eigen::Vector3d center = best;
    for (int a = -5; a <= 5; ++a)
      for (int b = -5; b <= 5; ++b)
        for (int c = -5; c <= 5; ++c) {
          const Eigen::Vector3d cand =
              center + Eigen::Vector3d(a, b, c) * (span / 5.0);
          const double v = frame_objective(model, metric, r, cand);
          if (v < best_val) {
            best_val = v;
            best = cand;
          }
        }
    span /= 5.0;
  }
  CHECK(opt <= best_val + 1e-8);
  // Gradient vanishes at the reported optimum.
  const double eps = 1e-6;
  for (int k = 0; k < 3; ++k) {
    Eigen::Vector3d hp = h, hm = h;
    hp[k] += eps;
    hm[k] -= eps;
    const double g = (frame_objective(model, metric, r, hp) -
                      frame_objective(model, metric, r, hm)) /
                     (2 * eps);
    CHECK(std::abs(g) < 1e-5);
  }
}

TEST_CASE("region-optimized frame field reduces the fiber objective") {
  const ChainModel model = landsalp_model();
  const LocalMetric metric = default_test_metric();
  const Eigen::Vector2d lo(-0.5, -0.5), hi(0.5, 0.5);
  const FrameField field = optimize_body_frame(model, metric, lo, hi, 7, 7);
  CHECK(field.objective_optimized < field.objective_default);
  CHECK(field.reduction_ratio() < 1.0);
  REQUIRE(field.offsets.size() == 49);

  // Interpolation hits nodes exactly and clamps outside the box.
  const Eigen::Vector3d at_node = field.at(lo);
  CHECK((at_node - field.offsets.front()).norm() < 1e-14);
  const Eigen::Vector3d clamped = field.at(Eigen::Vector2d(-5.0, -5.0));
  CHECK((clamped - field.offsets.front()).norm() < 1e-14);
  // Center value interpolates its cell corners.
  const Eigen::Vector3d mid = field.at(Eigen::Vector2d::Zero());
  CHECK(mid.allFinite());
}

TEST_CASE("serial and parallel frame fields agree") {
  const ChainModel model = landsalp_model();
  const LocalMetric metric = default_test_metric();
  const Eigen::Vector2d lo(-0.3, -0.3), hi(0.3, 0.3);
  const FrameField a = optimize_body_frame(model, metric, lo, hi, 5, 5, false);
  const FrameField b = optimize_body_frame(model, metric, lo, hi, 5, 5, true);
  for (size_t k = 0; k < a.offsets.size(); ++k)
    CHECK((a.offsets[k] - b.offsets[k]).norm() == 0.0);
  CHECK(a.objective_optimized == b.objective_optimized);
}
