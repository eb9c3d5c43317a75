#include "salp/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "salp/csvio.hpp"

namespace salp {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string join(const Eigen::VectorXd& v) {
  std::string out;
  for (int i = 0; i < v.size(); ++i) out += (i ? ", " : "") + format_g17(v[i]);
  return out;
}

Eigen::VectorXd to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<long>(v.size()));
}

}  // namespace

KeyTree KeyTree::parse(const std::string& text) {
  KeyTree tree;
  std::istringstream in(text);
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    tree.set(key, value);
  }
  return tree;
}

KeyTree KeyTree::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

std::string KeyTree::serialize() const {
  std::string out;
  for (const auto& [k, v] : entries) out += k + " = " + v + "\n";
  return out;
}

bool KeyTree::has(const std::string& key) const {
  return std::any_of(entries.begin(), entries.end(),
                     [&](const auto& e) { return e.first == key; });
}

const std::string& KeyTree::get(const std::string& key) const {
  for (const auto& e : entries)
    if (e.first == key) return e.second;
  throw ConfigError("missing key: " + key);
}

void KeyTree::set(const std::string& key, const std::string& value) {
  for (auto& e : entries)
    if (e.first == key) {
      e.second = value;
      return;
    }
  entries.emplace_back(key, value);
}

double KeyTree::get_double(const std::string& key) const {
  const std::string& v = get(key);
  try {
    size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("key " + key + ": not a number: '" + v + "'");
  }
}

std::vector<double> KeyTree::get_list(const std::string& key) const {
  const std::string& v = get(key);
  std::vector<double> out;
  std::istringstream in(v);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    tok = trim(tok);
    try {
      size_t used = 0;
      out.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw ConfigError("key " + key + ": not a number: '" + tok + "'");
    }
  }
  return out;
}

ExperimentConfig default_config() {
  ExperimentConfig cfg;
  cfg.chain = landsalp_model();
  cfg.metric = default_test_metric();
  cfg.desired = Eigen::VectorXd::Zero(2 + cfg.chain.n_units);
  cfg.nominal = Shape::Zero(cfg.chain.n_joints());
  cfg.q_diag = default_state_weights(cfg.chain.n_joints()).diagonal();
  cfg.disturbance_impulse = Eigen::VectorXd::Zero(cfg.chain.n_joints());
  return cfg;
}

namespace {

const double kDeg = M_PI / 180.0;

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "chain.n_units", "chain.link_length_m", "chain.beta_deg", "chain.joint_min_deg",
      "chain.joint_max_deg", "chain.u_max_mps",
      "metric.source", "metric.unit_1", "metric.unit_2", "metric.unit_3", "metric.joints",
      "gait.source", "gait.file", "gait.omega_hz", "gait.order",
      "gait.desired_velocity_mps", "gait.desired_omega_radps", "gait.desired_shape_radps",
      "gait.cost", "gait.nominal_shape_rad", "gait.shape_averaged", "gait.refine",
      "feedback.mode", "feedback.q_diag",
      "sim.cycles", "sim.steps_per_cycle", "sim.output_rate_hz", "sim.seed",
      "sim.disturbance.kind", "sim.disturbance.twist", "sim.disturbance.noise_sigma",
      "sim.disturbance.impulse_rad", "sim.disturbance.impulse_time_s", "sim.lowpass_hz",
      "dataset.rate_hz", "dataset.duration_s", "dataset.amplitude_scale",
      "dataset.force_noise_rel", "dataset.pose_noise_m", "dataset.steps_per_sample",
      "identify.lambda", "identify.linear_power", "identify.rescale",
      "outputs.dir",
  };
  return keys;
}

bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("key " + key + ": expected boolean, got '" + v + "'");
}

Eigen::VectorXd sized_list(const KeyTree& t, const std::string& key, int n) {
  const Eigen::VectorXd v = to_vector(t.get_list(key));
  if (v.size() != n)
    throw ConfigError("key " + key + ": expected " + std::to_string(n) + " values, got " +
                      std::to_string(v.size()));
  return v;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  const KeyTree t = KeyTree::parse(text);
  for (const auto& [k, v] : t.entries)
    if (!known_keys().count(k)) throw ConfigError("unknown key: " + k);

  ExperimentConfig cfg = default_config();
  if (t.has("chain.n_units")) cfg.chain.n_units = static_cast<int>(t.get_double("chain.n_units"));
  const int n = cfg.chain.n_units;
  const int nj = n - 1;
  if (t.has("chain.n_units")) {
    // Re-default per-unit vectors when the chain size changed.
    if (n != 3) {
      cfg.chain.beta = Eigen::VectorXd::Zero(n);
      cfg.chain.u_max = Eigen::VectorXd::Constant(n, 0.1);
      cfg.chain.joint_min = Eigen::VectorXd::Constant(nj, -M_PI / 3);
      cfg.chain.joint_max = Eigen::VectorXd::Constant(nj, M_PI / 3);
      cfg.metric.unit_blocks.assign(n, cfg.metric.unit_blocks.front());
      cfg.metric.joint_coeffs = Eigen::VectorXd::Constant(nj, cfg.metric.joint_coeffs[0]);
      cfg.desired = Eigen::VectorXd::Zero(2 + n);
      cfg.nominal = Shape::Zero(nj);
      cfg.q_diag = default_state_weights(nj).diagonal();
      cfg.disturbance_impulse = Eigen::VectorXd::Zero(nj);
    }
  }
  if (t.has("chain.link_length_m")) cfg.chain.link_length = t.get_double("chain.link_length_m");
  if (t.has("chain.beta_deg")) cfg.chain.beta = kDeg * sized_list(t, "chain.beta_deg", n);
  if (t.has("chain.joint_min_deg"))
    cfg.chain.joint_min = kDeg * sized_list(t, "chain.joint_min_deg", nj);
  if (t.has("chain.joint_max_deg"))
    cfg.chain.joint_max = kDeg * sized_list(t, "chain.joint_max_deg", nj);
  if (t.has("chain.u_max_mps")) cfg.chain.u_max = sized_list(t, "chain.u_max_mps", n);
  cfg.chain.validate();

  if (t.has("metric.source")) {
    const std::string& s = t.get("metric.source");
    if (s == "identify") cfg.metric_identify = true;
    else if (s != "values") throw ConfigError("metric.source: expected values|identify");
  }
  for (int i = 0; i < n && i < 3; ++i) {
    const std::string key = "metric.unit_" + std::to_string(i + 1);
    if (t.has(key)) cfg.metric.unit_blocks[i] = Eigen::Vector3d(sized_list(t, key, 3));
  }
  if (t.has("metric.joints")) cfg.metric.joint_coeffs = sized_list(t, "metric.joints", nj);
  if (!cfg.metric.nonnegative()) throw ConfigError("metric entries must be nonnegative");

  if (t.has("gait.source")) {
    cfg.gait_source = t.get("gait.source");
    if (cfg.gait_source != "optimize" && cfg.gait_source != "file")
      throw ConfigError("gait.source: expected optimize|file");
  }
  if (t.has("gait.file")) cfg.gait_file = t.get("gait.file");
  if (t.has("gait.omega_hz")) cfg.omega_hz = t.get_double("gait.omega_hz");
  if (cfg.omega_hz <= 0) throw ConfigError("gait.omega_hz must be positive");
  if (t.has("gait.order")) cfg.order = static_cast<int>(t.get_double("gait.order"));
  if (cfg.order < 1) throw ConfigError("gait.order must be >= 1");
  if (t.has("gait.desired_velocity_mps"))
    cfg.desired.head<2>() = sized_list(t, "gait.desired_velocity_mps", 2);
  if (t.has("gait.desired_omega_radps")) cfg.desired[2] = t.get_double("gait.desired_omega_radps");
  if (t.has("gait.desired_shape_radps"))
    cfg.desired.tail(nj) = sized_list(t, "gait.desired_shape_radps", nj);
  if (t.has("gait.cost")) {
    cfg.cost = t.get("gait.cost");
    if (cfg.cost != "velocity" && cfg.cost != "power" && cfg.cost != "force")
      throw ConfigError("gait.cost: expected velocity|power|force");
  }
  if (t.has("gait.nominal_shape_rad")) cfg.nominal = sized_list(t, "gait.nominal_shape_rad", nj);
  if (t.has("gait.shape_averaged"))
    cfg.shape_averaged = parse_bool(t.get("gait.shape_averaged"), "gait.shape_averaged");
  if (t.has("gait.refine")) cfg.refine = parse_bool(t.get("gait.refine"), "gait.refine");

  if (t.has("feedback.mode")) {
    cfg.feedback_mode = t.get("feedback.mode");
    if (cfg.feedback_mode != "off" && cfg.feedback_mode != "initial" &&
        cfg.feedback_mode != "integrated")
      throw ConfigError("feedback.mode: expected off|initial|integrated");
  }
  if (t.has("feedback.q_diag")) cfg.q_diag = sized_list(t, "feedback.q_diag", 3 + nj);

  if (t.has("sim.cycles")) cfg.cycles = static_cast<int>(t.get_double("sim.cycles"));
  if (t.has("sim.steps_per_cycle"))
    cfg.steps_per_cycle = static_cast<int>(t.get_double("sim.steps_per_cycle"));
  if (t.has("sim.output_rate_hz")) cfg.output_rate_hz = t.get_double("sim.output_rate_hz");
  if (t.has("sim.seed")) cfg.seed = static_cast<std::uint64_t>(t.get_double("sim.seed"));
  if (t.has("sim.disturbance.kind")) {
    cfg.disturbance = t.get("sim.disturbance.kind");
    if (cfg.disturbance != "none" && cfg.disturbance != "constant_twist" &&
        cfg.disturbance != "force_noise" && cfg.disturbance != "shape_impulse")
      throw ConfigError("sim.disturbance.kind: unknown kind");
  }
  if (t.has("sim.disturbance.twist"))
    cfg.disturbance_twist = Eigen::Vector3d(sized_list(t, "sim.disturbance.twist", 3));
  if (t.has("sim.disturbance.noise_sigma"))
    cfg.disturbance_noise = t.get_double("sim.disturbance.noise_sigma");
  if (t.has("sim.disturbance.impulse_rad"))
    cfg.disturbance_impulse = sized_list(t, "sim.disturbance.impulse_rad", nj);
  if (t.has("sim.disturbance.impulse_time_s"))
    cfg.impulse_time_s = t.get_double("sim.disturbance.impulse_time_s");
  if (t.has("sim.lowpass_hz")) cfg.lowpass_hz = t.get_double("sim.lowpass_hz");

  if (t.has("dataset.rate_hz")) cfg.dataset_rate_hz = t.get_double("dataset.rate_hz");
  if (t.has("dataset.duration_s")) cfg.dataset_duration_s = t.get_double("dataset.duration_s");
  if (t.has("dataset.amplitude_scale"))
    cfg.dataset_amplitude = t.get_double("dataset.amplitude_scale");
  if (t.has("dataset.force_noise_rel"))
    cfg.dataset_force_noise_rel = t.get_double("dataset.force_noise_rel");
  if (t.has("dataset.pose_noise_m")) cfg.dataset_pose_noise_m = t.get_double("dataset.pose_noise_m");
  if (t.has("dataset.steps_per_sample"))
    cfg.dataset_steps_per_sample = static_cast<int>(t.get_double("dataset.steps_per_sample"));

  if (t.has("identify.lambda")) cfg.lambda = t.get("identify.lambda");
  if (cfg.lambda != "auto") {
    try {
      (void)std::stod(cfg.lambda);
    } catch (const std::exception&) {
      throw ConfigError("identify.lambda: expected auto or a number");
    }
  }
  if (t.has("identify.linear_power"))
    cfg.linear_power = parse_bool(t.get("identify.linear_power"), "identify.linear_power");
  if (t.has("identify.rescale")) cfg.rescale = parse_bool(t.get("identify.rescale"), "identify.rescale");
  if (t.has("outputs.dir")) cfg.out_dir = t.get("outputs.dir");
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

KeyTree ExperimentConfig::resolved() const {
  KeyTree t;
  t.set("chain.n_units", std::to_string(chain.n_units));
  t.set("chain.link_length_m", format_g17(chain.link_length));
  t.set("chain.beta_deg", join(chain.beta / kDeg));
  t.set("chain.joint_min_deg", join(chain.joint_min / kDeg));
  t.set("chain.joint_max_deg", join(chain.joint_max / kDeg));
  t.set("chain.u_max_mps", join(chain.u_max));
  t.set("metric.source", metric_identify ? "identify" : "values");
  for (int i = 0; i < metric.n_units(); ++i)
    t.set("metric.unit_" + std::to_string(i + 1), join(metric.unit_blocks[i]));
  t.set("metric.joints", join(metric.joint_coeffs));
  t.set("gait.source", gait_source);
  t.set("gait.file", gait_file);
  t.set("gait.omega_hz", format_g17(omega_hz));
  t.set("gait.order", std::to_string(order));
  t.set("gait.desired_velocity_mps", join(desired.head<2>()));
  t.set("gait.desired_omega_radps", format_g17(desired[2]));
  t.set("gait.desired_shape_radps", join(desired.tail(chain.n_joints())));
  t.set("gait.cost", cost);
  t.set("gait.nominal_shape_rad", join(nominal));
  t.set("gait.shape_averaged", shape_averaged ? "true" : "false");
  t.set("gait.refine", refine ? "true" : "false");
  t.set("feedback.mode", feedback_mode);
  t.set("feedback.q_diag", join(q_diag));
  t.set("sim.cycles", std::to_string(cycles));
  t.set("sim.steps_per_cycle", std::to_string(steps_per_cycle));
  t.set("sim.output_rate_hz", format_g17(output_rate_hz));
  t.set("sim.seed", std::to_string(seed));
  t.set("sim.disturbance.kind", disturbance);
  t.set("sim.disturbance.twist", join(disturbance_twist));
  t.set("sim.disturbance.noise_sigma", format_g17(disturbance_noise));
  t.set("sim.disturbance.impulse_rad", join(disturbance_impulse));
  t.set("sim.disturbance.impulse_time_s", format_g17(impulse_time_s));
  t.set("sim.lowpass_hz", format_g17(lowpass_hz));
  t.set("dataset.rate_hz", format_g17(dataset_rate_hz));
  t.set("dataset.duration_s", format_g17(dataset_duration_s));
  t.set("dataset.amplitude_scale", format_g17(dataset_amplitude));
  t.set("dataset.force_noise_rel", format_g17(dataset_force_noise_rel));
  t.set("dataset.pose_noise_m", format_g17(dataset_pose_noise_m));
  t.set("dataset.steps_per_sample", std::to_string(dataset_steps_per_sample));
  t.set("identify.lambda", lambda);
  t.set("identify.linear_power", linear_power ? "true" : "false");
  t.set("identify.rescale", rescale ? "true" : "false");
  t.set("outputs.dir", out_dir);
  return t;
}

KeyTree metric_to_tree(const LocalMetric& metric) {
  KeyTree t;
  t.set("metric.n_units", std::to_string(metric.n_units()));
  for (int i = 0; i < metric.n_units(); ++i)
    t.set("metric.unit_" + std::to_string(i + 1), join(metric.unit_blocks[i]));
  t.set("metric.joints", join(metric.joint_coeffs));
  return t;
}

LocalMetric metric_from_tree(const KeyTree& tree) {
  const int n = static_cast<int>(tree.get_double("metric.n_units"));
  LocalMetric m;
  m.unit_blocks.resize(n);
  for (int i = 0; i < n; ++i)
    m.unit_blocks[i] = Eigen::Vector3d(to_vector(tree.get_list("metric.unit_" + std::to_string(i + 1))));
  m.joint_coeffs = to_vector(tree.get_list("metric.joints"));
  return m;
}

KeyTree plan_to_tree(const GaitPlan& plan) {
  KeyTree t;
  t.set("gait.n_units", std::to_string(plan.gait.n_units()));
  t.set("gait.order", std::to_string(plan.gait.order()));
  t.set("gait.omega_hz", format_g17(plan.gait.omega));
  t.set("gait.u_bar", join(plan.gait.u_bar));
  for (int k = 0; k < plan.gait.order(); ++k) {
    t.set("gait.sin_" + std::to_string(k + 1), join(plan.gait.A_sin.row(k).transpose()));
    t.set("gait.cos_" + std::to_string(k + 1), join(plan.gait.A_cos.row(k).transpose()));
  }
  t.set("plan.nominal_rad", join(plan.nominal));
  t.set("plan.achieved_average", join(plan.achieved_average));
  t.set("plan.cost_value", format_g17(plan.cost_value));
  t.set("plan.residual", format_g17(plan.residual));
  t.set("plan.converged", plan.converged ? "true" : "false");
  t.set("plan.refined", plan.refined ? "true" : "false");
  t.set("plan.limits_ok", plan.limits_ok ? "true" : "false");
  const Eigen::Map<const Eigen::VectorXd> rvec(plan.R.data(), plan.R.size());
  t.set("plan.cost_matrix", join(rvec));
  return t;
}

GaitPlan plan_from_tree(const KeyTree& tree) {
  GaitPlan plan;
  const int n = static_cast<int>(tree.get_double("gait.n_units"));
  const int order = static_cast<int>(tree.get_double("gait.order"));
  plan.gait = FourierGait::zero(n, order, tree.get_double("gait.omega_hz"));
  plan.gait.u_bar = to_vector(tree.get_list("gait.u_bar"));
  for (int k = 0; k < order; ++k) {
    plan.gait.A_sin.row(k) = to_vector(tree.get_list("gait.sin_" + std::to_string(k + 1))).transpose();
    plan.gait.A_cos.row(k) = to_vector(tree.get_list("gait.cos_" + std::to_string(k + 1))).transpose();
  }
  plan.nominal = to_vector(tree.get_list("plan.nominal_rad"));
  plan.achieved_average = to_vector(tree.get_list("plan.achieved_average"));
  plan.cost_value = tree.get_double("plan.cost_value");
  plan.residual = tree.get_double("plan.residual");
  plan.converged = tree.get("plan.converged") == "true";
  plan.refined = tree.get("plan.refined") == "true";
  plan.limits_ok = tree.get("plan.limits_ok") == "true";
  const Eigen::VectorXd rvec = to_vector(tree.get_list("plan.cost_matrix"));
  const int dim = plan.gait.theta_dim();
  plan.R = Eigen::Map<const Eigen::MatrixXd>(rvec.data(), dim, dim);
  return plan;
}

KeyTree law_to_tree(const FeedbackLaw& law) {
  KeyTree t;
  t.set("law.n_units", std::to_string(law.n_units));
  t.set("law.period_s", format_g17(law.period));
  t.set("law.omega_hz", format_g17(law.omega));
  t.set("law.mode", law.mode == FeedbackMode::initial_phase ? "initial" : "integrated");
  t.set("law.theta0", join(law.theta0));
  t.set("law.nominal_rad", join(law.nominal));
  t.set("law.desired_velocity", join(law.desired_velocity));
  t.set("law.closed_loop_radius", format_g17(law.closed_loop_radius));
  const Eigen::Map<const Eigen::VectorXd> kvec(law.K.data(), law.K.size());
  t.set("law.K", join(kvec));
  t.set("law.K_rows", std::to_string(law.K.rows()));
  const Eigen::Map<const Eigen::VectorXd> qvec(law.Q.data(), law.Q.size());
  t.set("law.Q", join(qvec));
  const Eigen::Map<const Eigen::VectorXd> rvec(law.R_in.data(), law.R_in.size());
  t.set("law.R_in", join(rvec));
  return t;
}

FeedbackLaw law_from_tree(const KeyTree& tree) {
  FeedbackLaw law;
  law.n_units = static_cast<int>(tree.get_double("law.n_units"));
  law.period = tree.get_double("law.period_s");
  law.omega = tree.get_double("law.omega_hz");
  law.mode = tree.get("law.mode") == "integrated" ? FeedbackMode::cycle_integrated
                                                  : FeedbackMode::initial_phase;
  law.theta0 = to_vector(tree.get_list("law.theta0"));
  law.nominal = to_vector(tree.get_list("law.nominal_rad"));
  law.desired_velocity = to_vector(tree.get_list("law.desired_velocity"));
  law.closed_loop_radius = tree.get_double("law.closed_loop_radius");
  const int rows = static_cast<int>(tree.get_double("law.K_rows"));
  const Eigen::VectorXd kvec = to_vector(tree.get_list("law.K"));
  law.K = Eigen::Map<const Eigen::MatrixXd>(kvec.data(), rows, kvec.size() / rows);
  const Eigen::VectorXd qvec = to_vector(tree.get_list("law.Q"));
  const int qdim = static_cast<int>(std::lround(std::sqrt(double(qvec.size()))));
  law.Q = Eigen::Map<const Eigen::MatrixXd>(qvec.data(), qdim, qdim);
  const Eigen::VectorXd rv = to_vector(tree.get_list("law.R_in"));
  const int rdim = static_cast<int>(std::lround(std::sqrt(double(rv.size()))));
  law.R_in = Eigen::Map<const Eigen::MatrixXd>(rv.data(), rdim, rdim);
  return law;
}

}  // namespace salp
