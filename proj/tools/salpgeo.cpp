#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "salp/body_frame.hpp"
#include "salp/config.hpp"
#include "salp/csvio.hpp"
#include "salp/identify.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace fs = std::filesystem;
using namespace salp;

namespace {

// Exit codes: 0 ok, 1 parse/config, 2 infeasible target, 3 joint-limit
// violation, 4 solver failure.
enum ExitCode { kOk = 0, kParse = 1, kInfeasible = 2, kLimits = 3, kSolver = 4 };

struct Cli {
  std::string config_path;
  std::string out_dir;
  std::string data;
  std::string plan_path;
  std::string lambda;
  std::string cost;
  std::string feedback;
  std::string sweep_kind = "directions";
  long long seed = -1;
};

ExperimentConfig load(const Cli& cli) {
  ExperimentConfig cfg = cli.config_path.empty() ? default_config() : load_config(cli.config_path);
  if (!cli.out_dir.empty()) cfg.out_dir = cli.out_dir;
  if (cli.seed >= 0) cfg.seed = static_cast<std::uint64_t>(cli.seed);
  if (!cli.lambda.empty()) cfg.lambda = cli.lambda;
  if (!cli.cost.empty()) cfg.cost = cli.cost;
  if (!cli.feedback.empty()) cfg.feedback_mode = cli.feedback;
  if (cfg.cost != "velocity" && cfg.cost != "power" && cfg.cost != "force")
    throw ConfigError("--cost: expected velocity|power|force");
  if (cfg.feedback_mode != "off" && cfg.feedback_mode != "initial" &&
      cfg.feedback_mode != "integrated")
    throw ConfigError("--feedback: expected off|initial|integrated");
  return cfg;
}

void write_tree(const fs::path& path, const KeyTree& tree) {
  atomic_write(path.string(), tree.serialize());
}

fs::path prepare_out(const ExperimentConfig& cfg) {
  fs::path dir(cfg.out_dir);
  fs::create_directories(dir);
  write_tree(dir / "resolved_config.txt", cfg.resolved());
  return dir;
}

CostKind cost_kind(const std::string& s) {
  if (s == "power") return CostKind::power;
  if (s == "force") return CostKind::force;
  return CostKind::velocity;
}

TrajectoryDataset load_dataset(const std::string& data, double fallback_rate) {
  TrajectoryDataset ds;
  std::vector<fs::path> files;
  if (fs::is_directory(data)) {
    for (const auto& e : fs::directory_iterator(data))
      if (e.path().extension() == ".csv") files.push_back(e.path());
    std::sort(files.begin(), files.end());
  } else {
    files.emplace_back(data);
  }
  if (files.empty()) throw std::runtime_error("no .csv runs found in " + data);
  for (const auto& f : files) ds.runs.push_back(read_trajectory_csv(f.string()));
  ds.rate = ds.runs.front().rate;
  (void)fallback_rate;
  return ds;
}

int cmd_dataset(const Cli& cli) {
  const ExperimentConfig cfg = load(cli);
  const fs::path dir = prepare_out(cfg);
  DatasetOptions opts;
  opts.rate = cfg.dataset_rate_hz;
  opts.run_duration = cfg.dataset_duration_s;
  opts.omega = cfg.omega_hz;
  opts.amplitude_scale = cfg.dataset_amplitude;
  opts.pose_noise_sigma = cfg.dataset_pose_noise_m;
  opts.force_noise_rel = cfg.dataset_force_noise_rel;
  opts.steps_per_sample = cfg.dataset_steps_per_sample;
  const TrajectoryDataset ds = generate_identification_dataset(cfg.chain, cfg.metric, cfg.seed, opts);
  for (size_t k = 0; k < ds.runs.size(); ++k)
    write_trajectory_csv((dir / ("run_" + std::to_string(k + 1) + ".csv")).string(), ds.runs[k]);
  std::cout << "wrote " << ds.runs.size() << " runs to " << dir << "\n";
  return kOk;
}

int cmd_identify(const Cli& cli) {
  const ExperimentConfig cfg = load(cli);
  if (cli.data.empty()) throw ConfigError("identify: --data is required");
  const fs::path dir = prepare_out(cfg);

  TrajectoryDataset ds = load_dataset(cli.data, cfg.dataset_rate_hz);
  for (auto& run : ds.runs) {
    if (run.rate != cfg.dataset_rate_hz) run = resample_run(run, cfg.dataset_rate_hz);
    if (cfg.lowpass_hz > 0) run = lowpass_run(run, cfg.lowpass_hz);
  }

  RegressionSystem sys = build_regression(ds, cfg.chain, CommandMode::velocity);
  sys.linear_power = cfg.linear_power;
  sys.lambda = cfg.lambda == "auto" ? default_lambda(sys) : std::stod(cfg.lambda);
  if (cfg.rescale) sys = rescale_objective(sys);

  const IdentificationResult res = identify(sys);
  write_tree(dir / "metric.txt", metric_to_tree(res.metric));

  std::vector<std::vector<double>> rows;
  const Eigen::VectorXd m = res.metric.diagonal();
  for (int j = 0; j < sys.n_coeffs(); ++j)
    rows.push_back({static_cast<double>(j), m[j], res.residual_gradients[j],
                    res.condition_report.column_norms[j]});
  write_csv((dir / "residual_gradients.csv").string(),
            {"coefficient", "value", "gradient", "column_norm"}, rows);

  KeyTree rep;
  rep.set("identify.lambda", format_g17(sys.lambda));
  rep.set("identify.residual_rms", format_g17(res.residual_rms));
  rep.set("identify.kkt_residual", format_g17(res.kkt_residual));
  rep.set("identify.converged", res.converged ? "true" : "false");
  rep.set("identify.rank_deficient", res.condition_report.rank_deficient ? "true" : "false");
  for (size_t k = 0; k < res.condition_report.warnings.size(); ++k)
    rep.set("identify.warning_" + std::to_string(k + 1), res.condition_report.warnings[k]);
  write_tree(dir / "condition_report.txt", rep);
  for (const auto& w : res.condition_report.warnings) std::cerr << "warning: " << w << "\n";
  if (!res.converged) return kSolver;
  std::cout << "metric written to " << (dir / "metric.txt") << "\n";
  return kOk;
}

GaitPlan make_plan(const ExperimentConfig& cfg) {
  const AveragedSystem avg =
      augmented_system(cfg.chain, cfg.metric, cfg.nominal, cfg.omega_hz);
  const CostMetric cost = build_cost(cfg.chain, cfg.metric, cfg.nominal, cost_kind(cfg.cost));
  SolveOptions sopts;
  sopts.order = cfg.order;
  if (cfg.shape_averaged) {
    ShapeSolveOptions so;
    so.refine.steps_per_cycle = cfg.steps_per_cycle;
    return solve_shape_averaged(cfg.chain, cfg.metric, cost, cfg.desired, cfg.nominal,
                                cfg.omega_hz, so);
  }
  GaitPlan plan = solve_averaged(avg, cost, cfg.desired, sopts);
  if (cfg.refine) {
    RefineOptions ropts;
    ropts.steps_per_cycle = cfg.steps_per_cycle;
    plan = refine_full(plan, cfg.chain, cfg.metric, ropts);
  }
  return plan;
}

FeedbackLaw make_law(const ExperimentConfig& cfg, const GaitPlan& plan) {
  const AveragedSystem avg =
      augmented_system(cfg.chain, cfg.metric, plan.nominal, cfg.omega_hz);
  const FeedbackMode mode = cfg.feedback_mode == "integrated" ? FeedbackMode::cycle_integrated
                                                              : FeedbackMode::initial_phase;
  return synthesize_feedback(cfg.chain, cfg.metric, avg, plan.gait, cfg.desired,
                             Eigen::MatrixXd(cfg.q_diag.asDiagonal()),
                             default_input_weights(plan.gait.theta_dim()), mode);
}

void dump_fields(const ExperimentConfig& cfg, const fs::path& dir) {
  const int grid = 21;
  const Eigen::VectorXd lo = cfg.chain.joint_min, hi = cfg.chain.joint_max;
  std::vector<std::vector<double>> arows, brows;
  for (int a = 0; a < grid; ++a)
    for (int b = 0; b < grid; ++b) {
      Shape r = cfg.nominal;
      r[0] = lo[0] + (hi[0] - lo[0]) * a / (grid - 1);
      if (r.size() > 1) r[1] = lo[1] + (hi[1] - lo[1]) * b / (grid - 1);
      const Eigen::MatrixXd A = control_field(cfg.chain, cfg.metric, r).A;
      std::vector<double> row = {r[0], r.size() > 1 ? r[1] : 0.0};
      for (int j = 0; j < A.cols(); ++j)
        for (int i = 0; i < A.rows(); ++i) row.push_back(A(i, j));
      arows.push_back(row);

      std::vector<double> brow = {r[0], r.size() > 1 ? r[1] : 0.0};
      for (int i = 0; i < cfg.chain.n_units; ++i)
        for (int j = i + 1; j < cfg.chain.n_units; ++j) {
          const Eigen::VectorXd lb = lie_bracket(cfg.chain, cfg.metric, r, i, j);
          for (int k = 0; k < lb.size(); ++k) brow.push_back(lb[k]);
        }
      brows.push_back(brow);
    }
  std::vector<std::string> ah = {"alpha_1", "alpha_2"};
  const int cdim = cfg.chain.config_dim();
  for (int j = 0; j < cfg.chain.n_units; ++j)
    for (int i = 0; i < cdim; ++i)
      ah.push_back("A_" + std::to_string(i + 1) + "_" + std::to_string(j + 1));
  write_csv((dir / "field_A.csv").string(), ah, arows);
  std::vector<std::string> bh = {"alpha_1", "alpha_2"};
  for (int i = 0; i < cfg.chain.n_units; ++i)
    for (int j = i + 1; j < cfg.chain.n_units; ++j)
      for (int k = 0; k < cdim; ++k)
        bh.push_back("B" + std::to_string(i + 1) + std::to_string(j + 1) + "_" +
                     std::to_string(k + 1));
  write_csv((dir / "field_bracket.csv").string(), bh, brows);
}

void dump_loci(const GaitPlan& plan, const fs::path& dir) {
  std::vector<std::vector<double>> rows;
  const int phases = 64;
  for (int k = 0; k <= phases; ++k) {
    const double t = plan.gait.period() * k / phases;
    const Eigen::VectorXd u = plan.gait.evaluate(t);
    std::vector<double> row = {t};
    for (int i = 0; i < u.size(); ++i) row.push_back(u[i]);
    rows.push_back(row);
  }
  std::vector<std::string> h = {"t"};
  for (int i = 0; i < plan.gait.n_units(); ++i) h.push_back("u_" + std::to_string(i + 1));
  write_csv((dir / "gait_loci.csv").string(), h, rows);
}

int cmd_plan(const Cli& cli) {
  const ExperimentConfig cfg = load(cli);
  const fs::path dir = prepare_out(cfg);
  const GaitPlan plan = make_plan(cfg);
  const FeedbackLaw law = make_law(cfg, plan);
  write_tree(dir / "plan.txt", plan_to_tree(plan));
  write_tree(dir / "law.txt", law_to_tree(law));
  dump_fields(cfg, dir);
  dump_loci(plan, dir);
  if (!plan.limits_ok) return kLimits;
  if (!plan.converged) return kSolver;
  std::cout << "plan written to " << (dir / "plan.txt") << "\n";
  return kOk;
}

int cmd_simulate(const Cli& cli) {
  const ExperimentConfig cfg = load(cli);
  const fs::path dir = prepare_out(cfg);
  GaitPlan plan;
  if (!cli.plan_path.empty()) plan = plan_from_tree(KeyTree::load(cli.plan_path));
  else plan = make_plan(cfg);

  FeedbackLaw law;
  const bool use_fb = cfg.feedback_mode != "off";
  if (use_fb) law = make_law(cfg, plan);

  Disturbance dist;
  const bool use_dist = cfg.disturbance != "none";
  if (cfg.disturbance == "constant_twist") {
    dist.kind = Disturbance::Kind::constant_twist;
    dist.twist = cfg.disturbance_twist;
  } else if (cfg.disturbance == "force_noise") {
    dist.kind = Disturbance::Kind::force_noise;
    dist.noise_sigma = cfg.disturbance_noise;
  } else if (cfg.disturbance == "shape_impulse") {
    dist.kind = Disturbance::Kind::shape_impulse;
    dist.impulse = cfg.disturbance_impulse;
    dist.impulse_time = cfg.impulse_time_s;
  }
  dist.seed = cfg.seed;

  RunOptions ropts;
  ropts.steps_per_cycle = cfg.steps_per_cycle;
  ropts.output_rate = cfg.output_rate_hz;
  ropts.desired_velocity = cfg.desired;

  SimState init;
  init.shape = plan.nominal;
  const GaitRunRecord rec =
      run_gait(init, cfg.chain, cfg.metric, plan.gait, cfg.cycles, use_fb ? &law : nullptr,
               use_dist ? &dist : nullptr, ropts);

  write_trajectory_csv((dir / "trajectory.csv").string(), rec.run);

  std::vector<std::vector<double>> crows;
  for (size_t c = 0; c + 1 < rec.cycle_states.size(); ++c) {
    const Pose rel = compose(inverse(rec.cycle_states[c].pose), rec.cycle_states[c + 1].pose);
    crows.push_back({static_cast<double>(c + 1), rel.x, rel.y, rel.theta,
                     rec.cycle_states[c + 1].pose.x, rec.cycle_states[c + 1].pose.y,
                     rec.cycle_states[c + 1].pose.theta});
  }
  write_csv((dir / "cycles.csv").string(),
            {"cycle", "dx", "dy", "dtheta", "x", "y", "theta"}, crows);

  KeyTree sum;
  const SimState& last = rec.cycle_states.back();
  const double T = plan.gait.period();
  const int done = static_cast<int>(rec.cycle_states.size()) - 1;
  sum.set("summary.cycles_completed", std::to_string(done));
  sum.set("summary.final_x_m", format_g17(last.pose.x));
  sum.set("summary.final_y_m", format_g17(last.pose.y));
  sum.set("summary.final_theta_rad", format_g17(last.pose.theta));
  if (done > 0) {
    sum.set("summary.mean_dx_per_cycle_m", format_g17(last.pose.x / done));
    sum.set("summary.mean_dy_per_cycle_m", format_g17(last.pose.y / done));
  }
  Eigen::VectorXd ex_lo = rec.run.shapes.colwise().minCoeff().transpose();
  Eigen::VectorXd ex_hi = rec.run.shapes.colwise().maxCoeff().transpose();
  for (int j = 0; j < cfg.chain.n_joints(); ++j) {
    sum.set("summary.shape_min_rad_" + std::to_string(j + 1), format_g17(ex_lo[j]));
    sum.set("summary.shape_max_rad_" + std::to_string(j + 1), format_g17(ex_hi[j]));
  }
  const Eigen::VectorXd avg_pred = plan.achieved_average;
  for (int k = 0; k < avg_pred.size(); ++k)
    sum.set("summary.averaged_velocity_" + std::to_string(k + 1), format_g17(avg_pred[k]));
  if (done > 0) {
    const Twist sim_avg = log(last.pose) * (1.0 / (done * T));
    sum.set("summary.simulated_velocity_1", format_g17(sim_avg.vx));
    sum.set("summary.simulated_velocity_2", format_g17(sim_avg.vy));
    sum.set("summary.simulated_velocity_3", format_g17(sim_avg.omega));
  }
  sum.set("summary.limit_violation", rec.limit_violation ? "true" : "false");
  if (rec.limit_violation)
    sum.set("summary.violation_time_s", format_g17(rec.violation_time));
  write_tree(dir / "summary.txt", sum);
  std::cout << "trajectory written to " << (dir / "trajectory.csv") << "\n";
  return rec.limit_violation ? kLimits : kOk;
}

int cmd_sweep(const Cli& cli) {
  ExperimentConfig cfg = load(cli);
  const fs::path dir = prepare_out(cfg);
  const double T = 1.0 / cfg.omega_hz;
  int rc = kOk;
  if (cli.sweep_kind == "directions") {
    struct Dir {
      const char* name;
      double vx, vy, om;
    };
    // Per-cycle displacements in line with the reported experiments:
    // 3 cm forward/backward, 6 cm lateral, 45 degrees of turning.
    const std::vector<Dir> dirs = {{"forward", 0.03 / T, 0, 0},
                                   {"backward", -0.03 / T, 0, 0},
                                   {"left", 0, 0.06 / T, 0},
                                   {"right", 0, -0.06 / T, 0},
                                   {"turn", 0, 0, M_PI / 4 / T}};
    std::vector<GaitPlan> plans(dirs.size());
    std::vector<std::string> errors(dirs.size());
#pragma omp parallel for schedule(dynamic)
    for (size_t k = 0; k < dirs.size(); ++k) {
      try {
        ExperimentConfig c = cfg;
        c.desired.setZero();
        c.desired[0] = dirs[k].vx;
        c.desired[1] = dirs[k].vy;
        c.desired[2] = dirs[k].om;
        plans[k] = make_plan(c);
      } catch (const std::exception& e) {
        errors[k] = e.what();
      }
    }
    for (size_t k = 0; k < dirs.size(); ++k) {
      if (!errors[k].empty()) {
        std::cerr << dirs[k].name << ": " << errors[k] << "\n";
        rc = kSolver;
        continue;
      }
      write_tree(dir / ("plan_" + std::string(dirs[k].name) + ".txt"), plan_to_tree(plans[k]));
    }
  } else if (cli.sweep_kind == "cost") {
    for (const char* kind : {"velocity", "power", "force"}) {
      ExperimentConfig c = cfg;
      c.cost = kind;
      write_tree(dir / ("plan_" + std::string(kind) + ".txt"), plan_to_tree(make_plan(c)));
    }
  } else if (cli.sweep_kind == "lambda") {
    if (cli.data.empty()) throw ConfigError("sweep lambda: --data is required");
    TrajectoryDataset ds = load_dataset(cli.data, cfg.dataset_rate_hz);
    RegressionSystem sys = build_regression(ds, cfg.chain);
    const double l0 = default_lambda(sys);
    int idx = 0;
    for (double lam : {0.0, l0, 10.0 * l0}) {
      sys.lambda = lam;
      const IdentificationResult res = identify(sys);
      KeyTree rep = metric_to_tree(res.metric);
      rep.set("identify.lambda", format_g17(lam));
      rep.set("identify.regularizer", format_g17(sys.regularizer(res.metric.diagonal())));
      rep.set("identify.residual_rms", format_g17(res.residual_rms));
      write_tree(dir / ("metric_lambda_" + std::to_string(idx++) + ".txt"), rep);
    }
  } else {
    throw ConfigError("sweep: unknown kind " + cli.sweep_kind);
  }
  std::cout << "sweep outputs in " << dir << "\n";
  return rc;
}

}  // namespace

int main(int argc, char** argv) {
#ifdef _OPENMP
  if (const char* threads = std::getenv("SALPGEO_THREADS")) {
    const int t = std::atoi(threads);
    if (t > 0) omp_set_num_threads(t);
  }
#endif

  CLI::App app{"Geometric gait identification, planning, and simulation for multi-jet chains"};
  app.require_subcommand(1);
  Cli cli;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", cli.config_path, "experiment config file");
    cmd->add_option("--out", cli.out_dir, "output directory");
    cmd->add_option("--seed", cli.seed, "RNG seed override");
    cmd->add_option("--lambda", cli.lambda, "regularization strength or 'auto'");
    cmd->add_option("--cost", cli.cost, "cost kind: velocity|power|force");
    cmd->add_option("--feedback", cli.feedback, "feedback mode: off|initial|integrated");
  };

  CLI::App* c_dataset = app.add_subcommand("dataset", "generate an identification dataset");
  add_common(c_dataset);
  CLI::App* c_identify = app.add_subcommand("identify", "fit the drag metric from trajectories");
  add_common(c_identify);
  c_identify->add_option("--data", cli.data, "dataset directory or run csv")->required();
  CLI::App* c_plan = app.add_subcommand("plan", "synthesize a gait and feedback law");
  add_common(c_plan);
  CLI::App* c_sim = app.add_subcommand("simulate", "run a gait in the full simulator");
  add_common(c_sim);
  c_sim->add_option("--plan", cli.plan_path, "gait plan file (defaults to planning from config)");
  CLI::App* c_sweep = app.add_subcommand("sweep", "batch runs over directions, costs, or lambda");
  add_common(c_sweep);
  c_sweep->add_option("--kind", cli.sweep_kind, "directions|cost|lambda");
  c_sweep->add_option("--data", cli.data, "dataset for lambda sweeps");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) ? kParse : kOk;
  }

  try {
    if (c_dataset->parsed()) return cmd_dataset(cli);
    if (c_identify->parsed()) return cmd_identify(cli);
    if (c_plan->parsed()) return cmd_plan(cli);
    if (c_sim->parsed()) return cmd_simulate(cli);
    if (c_sweep->parsed()) return cmd_sweep(cli);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kParse;
  } catch (const InfeasibleTarget& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return kInfeasible;
  } catch (const NonStabilizable& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return kSolver;
  } catch (const SingularDynamics& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return kSolver;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kParse;
  }
  return kOk;
}
