#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "salp/feedback.hpp"
#include "salp/metric.hpp"
#include "salp/optimize.hpp"

// Key-tree experiment configuration: dotted-path keys with units spelled out
// in the key names (link_length_m, beta_deg, ...). Unknown keys are rejected;
// loading always produces a fully-resolved echo.
namespace salp {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Ordered flat key -> value store parsed from "path.to.key = value" lines;
// '#' starts a comment, blank lines ignored.
struct KeyTree {
  std::vector<std::pair<std::string, std::string>> entries;

  static KeyTree parse(const std::string& text);
  static KeyTree load(const std::string& path);
  std::string serialize() const;

  bool has(const std::string& key) const;
  const std::string& get(const std::string& key) const;  // throws ConfigError
  void set(const std::string& key, const std::string& value);

  double get_double(const std::string& key) const;
  std::vector<double> get_list(const std::string& key) const;
};

struct ExperimentConfig {
  ChainModel chain;
  bool metric_identify = false;
  LocalMetric metric;

  std::string gait_source = "optimize";  // optimize | file
  std::string gait_file;
  double omega_hz = 1.0 / 6.0;
  int order = 1;
  Eigen::VectorXd desired;  // vx, vy (m/s), omega (rad/s), joint rates (rad/s)
  std::string cost = "velocity";
  Shape nominal;
  bool shape_averaged = false;
  bool refine = true;

  std::string feedback_mode = "off";  // off | initial | integrated
  Eigen::VectorXd q_diag;

  int cycles = 10;
  int steps_per_cycle = 2400;
  double output_rate_hz = 200.0;
  std::uint64_t seed = 0;
  std::string disturbance = "none";  // none | constant_twist | force_noise | shape_impulse
  Eigen::Vector3d disturbance_twist = Eigen::Vector3d::Zero();
  double disturbance_noise = 0.0;
  Eigen::VectorXd disturbance_impulse;
  double impulse_time_s = 0.0;
  double lowpass_hz = 0.0;  // 0 disables filtering

  double dataset_rate_hz = 200.0;
  double dataset_duration_s = 22.5;
  double dataset_amplitude = 0.8;
  double dataset_force_noise_rel = 0.0;
  double dataset_pose_noise_m = 0.0;
  int dataset_steps_per_sample = 5;

  std::string lambda = "auto";
  bool linear_power = false;
  bool rescale = true;

  std::string out_dir = "out";

  // Fully-resolved echo, every key explicit.
  KeyTree resolved() const;
};

ExperimentConfig default_config();
ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config(const std::string& text);

// Structured artifact files (key-tree format).
KeyTree metric_to_tree(const LocalMetric& metric);
LocalMetric metric_from_tree(const KeyTree& tree);

KeyTree plan_to_tree(const GaitPlan& plan);
GaitPlan plan_from_tree(const KeyTree& tree);

KeyTree law_to_tree(const FeedbackLaw& law);
FeedbackLaw law_from_tree(const KeyTree& tree);

}  // namespace salp
