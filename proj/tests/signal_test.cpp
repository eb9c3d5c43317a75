#include <doctest.h>

#include <random>

#include "salp/signal.hpp"

using namespace salp;

TEST_CASE("scalar resampling is exact on linear signals") {
  const int n = 101;
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = 0.3 + 2.0 * (i / 50.0);
  const Eigen::VectorXd out = resample_scalar(v, 50.0, 200.0);
  CHECK(out.size() == 401);
  for (int j = 0; j < out.size(); ++j)
    CHECK(out[j] == doctest::Approx(0.3 + 2.0 * (j / 200.0)).epsilon(1e-12));
  CHECK_THROWS_AS(resample_scalar(v, -1.0, 200.0), std::invalid_argument);
  CHECK_THROWS_AS(resample_scalar(Eigen::VectorXd::Zero(1), 50.0, 200.0), std::invalid_argument);
}

TEST_CASE("pose resampling is exact on constant-twist trajectories") {
  const Twist xi(0.2, -0.1, 0.8);
  std::vector<Pose> poses;
  for (int k = 0; k <= 60; ++k) poses.push_back(exp(xi, k / 30.0));
  const auto out = resample_poses(poses, 30.0, 100.0);
  CHECK(out.size() == 201);
  for (size_t j = 0; j < out.size(); ++j) {
    const Pose ref = exp(xi, j / 100.0);
    CHECK((out[j].matrix() - ref.matrix()).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("run resampling keeps streams aligned") {
  TrajectoryRun run;
  run.rate = 100.0;
  const int n = 201;
  run.shapes.resize(n, 2);
  run.commands.resize(n, 3);
  run.forces.resize(n, 3);
  for (int k = 0; k < n; ++k) {
    const double t = k / run.rate;
    run.poses.push_back(exp(Twist(0.1, 0.0, 0.3), t));
    run.shapes.row(k) << 0.2 * t, -0.1 * t;
    run.commands.row(k) << t, 2 * t, 3 * t;
    run.forces.row(k) << -t, 0.5 * t, 0.0;
  }
  const TrajectoryRun out = resample_run(run, 40.0);
  CHECK(out.rate == 40.0);
  CHECK(out.samples() == 81);
  CHECK(out.shapes.rows() == 81);
  const double t = 80 / 40.0;
  CHECK(out.shapes(80, 0) == doctest::Approx(0.2 * t));
  CHECK(out.commands(80, 2) == doctest::Approx(3 * t));
}

TEST_CASE("lowpass: unit DC gain, attenuation above cutoff, zero phase") {
  const double rate = 200.0, cutoff = 5.0;
  const int n = 4000;
  // Constant passes exactly.
  CHECK((lowpass(Eigen::VectorXd::Constant(n, 2.5), cutoff, rate).array() - 2.5)
            .abs()
            .maxCoeff() < 1e-9);

  // Low-frequency sine survives, high-frequency sine is crushed, and the
  // forward-backward pass leaves no phase shift at the low frequency.
  Eigen::VectorXd lo(n), hi(n);
  for (int k = 0; k < n; ++k) {
    lo[k] = std::sin(2 * M_PI * 0.5 * k / rate);
    hi[k] = std::sin(2 * M_PI * 50.0 * k / rate);
  }
  const Eigen::VectorXd lo_f = lowpass(lo, cutoff, rate);
  const Eigen::VectorXd hi_f = lowpass(hi, cutoff, rate);
  const int a = n / 4, b = 3 * n / 4;
  CHECK((lo_f.segment(a, b - a) - lo.segment(a, b - a)).cwiseAbs().maxCoeff() < 0.01);
  CHECK(hi_f.segment(a, b - a).cwiseAbs().maxCoeff() < 1e-4);

  CHECK_THROWS_AS(lowpass(lo, 0.0, rate), std::invalid_argument);
  CHECK_THROWS_AS(lowpass(lo, 150.0, rate), std::invalid_argument);
}

TEST_CASE("lowpass_run unwraps theta before filtering") {
  TrajectoryRun run;
  run.rate = 200.0;
  const int n = 2000;
  run.shapes.resize(n, 2);
  run.commands.resize(n, 3);
  run.forces.resize(n, 3);
  run.shapes.setZero();
  run.commands.setZero();
  run.forces.setZero();
  // Steady rotation crosses the +-pi branch many times.
  for (int k = 0; k < n; ++k) run.poses.push_back(Pose(0, 0, 1.5 * k / run.rate));
  const TrajectoryRun f = lowpass_run(run, 10.0);
  for (int k = n / 4; k < 3 * n / 4; ++k)
    CHECK(wrap_angle(f.poses[k].theta - run.poses[k].theta) == doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("differentiate recovers constant twists and joint rates exactly") {
  TrajectoryRun run;
  run.rate = 200.0;
  const Twist xi(0.05, -0.02, 0.4);
  const Eigen::Vector2d rate(0.3, -0.7);
  const int n = 400;
  run.shapes.resize(n, 2);
  run.commands = Eigen::MatrixXd::Zero(n, 3);
  run.forces = Eigen::MatrixXd::Zero(n, 3);
  for (int k = 0; k < n; ++k) {
    run.poses.push_back(exp(xi, k / run.rate));
    run.shapes.row(k) = rate.transpose() * (k / run.rate);
  }
  const VelocityStreams v = differentiate(run);
  REQUIRE(v.xi.rows() == n);
  REQUIRE(v.alpha_dot.rows() == n);
  for (int k = 0; k < n; ++k) {
    CHECK((v.xi.row(k).transpose() - xi.vec()).norm() < 1e-10);
    CHECK((v.alpha_dot.row(k).transpose() - rate).norm() < 1e-10);
  }
}

TEST_CASE("differentiate is second-order accurate on smooth trajectories") {
  // Sinusoidal body velocity at 1/6 Hz sampled at 200 Hz: midpoint group
  // differencing should track the true twist to ~1e-6.
  TrajectoryRun run;
  run.rate = 200.0;
  const int n = 1200;
  run.shapes = Eigen::MatrixXd::Zero(n, 2);
  run.commands = Eigen::MatrixXd::Zero(n, 3);
  run.forces = Eigen::MatrixXd::Zero(n, 3);
  Pose g;
  const double w = 2 * M_PI / 6.0;
  auto twist_at = [&](double t) {
    return Twist(0.05 * std::sin(w * t), 0.02 * std::cos(w * t), 0.3 * std::sin(w * t));
  };
  const double dt = 1.0 / run.rate;
  const int sub = 50;
  for (int k = 0; k < n; ++k) {
    run.poses.push_back(g);
    for (int s = 0; s < sub; ++s) {
      const double t = k * dt + (s + 0.5) * dt / sub;
      g = compose(g, exp(twist_at(t), dt / sub));
    }
  }
  const VelocityStreams v = differentiate(run);
  double max_err = 0.0;
  for (int k = 1; k + 1 < n; ++k) {
    const Eigen::Vector3d err = v.xi.row(k).transpose() - twist_at(k * dt).vec();
    max_err = std::max(max_err, err.norm());
  }
  CHECK(max_err < 2e-6);
}
