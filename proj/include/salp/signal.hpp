#pragma once

#include <Eigen/Dense>
#include <vector>

#include "salp/chain.hpp"
#include "salp/se2.hpp"

// Trajectory-data ingestion: resampling heterogeneous-rate streams to a
// common rate, zero-phase low-pass filtering, and Lie-group differentiation
// into velocity streams.
namespace salp {

struct TrajectoryRun {
  double rate = 200.0;          // Hz, uniform
  std::vector<Pose> poses;      // one per sample
  Eigen::MatrixXd shapes;       // samples x n_joints
  Eigen::MatrixXd commands;     // samples x n_units
  Eigen::MatrixXd forces;       // samples x n_units (rolling-axis readings)

  int samples() const { return static_cast<int>(poses.size()); }
  double dt() const { return 1.0 / rate; }
};

struct TrajectoryDataset {
  double rate = 200.0;
  std::vector<TrajectoryRun> runs;
  int total_samples() const {
    int n = 0;
    for (const auto& r : runs) n += r.samples();
    return n;
  }
};

// Linear interpolation onto the uniform time grid of to_rate, spanning the
// original duration.
Eigen::VectorXd resample_scalar(const Eigen::VectorXd& values, double from_rate, double to_rate);

// Geodesic (log/exp) interpolation between consecutive poses.
std::vector<Pose> resample_poses(const std::vector<Pose>& poses, double from_rate, double to_rate);

TrajectoryRun resample_run(const TrajectoryRun& run, double to_rate);

// Zero-phase second-order Butterworth low-pass (forward-backward passes with
// odd-reflected edge padding of three filter time constants). DC gain is
// exactly 1.
Eigen::VectorXd lowpass(const Eigen::VectorXd& stream, double cutoff, double rate);

// Filters shapes, commands, forces, and pose coordinates (theta unwrapped
// before filtering).
TrajectoryRun lowpass_run(const TrajectoryRun& run, double cutoff);

struct VelocityStreams {
  Eigen::MatrixXd xi;         // samples x 3, system body velocity
  Eigen::MatrixXd alpha_dot;  // samples x n_joints
};

// Lie-group differentiation of poses and central differencing of shapes;
// interval-midpoint estimates interpolated back to the sample times.
VelocityStreams differentiate(const TrajectoryRun& run);

}  // namespace salp
