#pragma once

#include <cstdint>
#include <optional>

#include "salp/averaging.hpp"
#include "salp/dynamics.hpp"
#include "salp/gait.hpp"
#include "salp/signal.hpp"

// Full first-order simulation of zeta_dot = A(r) u(t) on SE(2) x shape with
// exponential pose updates and a midpoint (2nd-order) shape rule. Joint-limit
// violations terminate the run with a flag; there are no contact forces.
namespace salp {

struct SimState {
  Pose pose;
  Shape shape;
  double t = 0.0;
};

struct Disturbance {
  enum class Kind { constant_twist, force_noise, shape_impulse };
  Kind kind = Kind::constant_twist;
  Eigen::Vector3d twist = Eigen::Vector3d::Zero();  // constant body-twist addend
  double noise_sigma = 0.0;                         // per-step twist noise scale
  Eigen::VectorXd impulse;                          // joint-angle jump
  double impulse_time = 0.0;
  std::uint64_t seed = 0;
};

struct StepOptions {
  CommandMode mode = CommandMode::velocity;
  Eigen::Vector3d extra_twist = Eigen::Vector3d::Zero();
};

// One integration step; throws JointLimitViolation-free: returns false and
// leaves the state at the pre-step value when the shape would leave limits.
bool step(SimState& state, const ChainModel& model, const LocalMetric& metric,
          const Eigen::VectorXd& u, double dt, const StepOptions& opts = {});

struct FeedbackLaw;  // defined in feedback.hpp

struct RunOptions {
  int steps_per_cycle = 2000;  // rounded up to a multiple of samples per cycle
  double output_rate = 200.0;  // Hz
  CommandMode mode = CommandMode::velocity;
  // Desired per-cycle configuration velocity for feedback tracking; defaults
  // to the gait's averaged prediction when unset.
  std::optional<Eigen::VectorXd> desired_velocity;
};

struct GaitRunRecord {
  TrajectoryRun run;                     // sampled trajectory at output_rate
  std::vector<SimState> cycle_states;    // state at each cycle boundary (incl. start)
  std::vector<Eigen::VectorXd> cycle_thetas;  // gait parameters used per cycle
  bool limit_violation = false;
  double violation_time = 0.0;
};

GaitRunRecord run_gait(const SimState& initial, const ChainModel& model, const LocalMetric& metric,
                       const FourierGait& gait, int cycles, const FeedbackLaw* law = nullptr,
                       const Disturbance* disturbance = nullptr, const RunOptions& opts = {});

struct DatasetOptions {
  double rate = 200.0;          // Hz
  double run_duration = 22.5;   // s per run; 8 runs give about 3 minutes
  double omega = 1.0 / 6.0;     // Hz command sine
  double amplitude_scale = 0.8; // fraction of u_max
  double pose_noise_sigma = 0.0;
  double force_noise_rel = 0.0; // multiplicative
  int steps_per_sample = 5;
};

// The 8-pattern excitation protocol: one run per sign combination of the
// three wheels, sinusoidal commands at a common frequency, forces recorded on
// each wheel rolling axis.
TrajectoryDataset generate_identification_dataset(const ChainModel& model,
                                                  const LocalMetric& metric_true,
                                                  std::uint64_t seed,
                                                  const DatasetOptions& opts = {});

}  // namespace salp
