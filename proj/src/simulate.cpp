#include "salp/simulate.hpp"

#include <cmath>
#include <random>

#include "salp/feedback.hpp"

namespace salp {

namespace {

Eigen::VectorXd config_velocity(const ChainModel& model, const LocalMetric& metric, const Shape& r,
                                const Eigen::VectorXd& u, const StepOptions& opts) {
  Eigen::VectorXd qdot = control_field(model, metric, r, opts.mode).A * u;
  qdot.head<3>() += opts.extra_twist;
  return qdot;
}

}  // namespace

bool step(SimState& state, const ChainModel& model, const LocalMetric& metric,
          const Eigen::VectorXd& u, double dt, const StepOptions& opts) {
  const int nj = model.n_joints();
  const Eigen::VectorXd qdot1 = config_velocity(model, metric, state.shape, u, opts);
  const Shape r_half = state.shape + 0.5 * dt * qdot1.tail(nj);
  const Eigen::VectorXd qdot = config_velocity(model, metric, r_half, u, opts);

  const Shape r_next = state.shape + dt * qdot.tail(nj);
  if (!model.shape_in_limits(r_next)) return false;

  state.pose = compose(state.pose, exp(Twist(Eigen::Vector3d(qdot.head<3>())), dt));
  state.shape = r_next;
  state.t += dt;
  return true;
}

GaitRunRecord run_gait(const SimState& initial, const ChainModel& model, const LocalMetric& metric,
                       const FourierGait& gait, int cycles, const FeedbackLaw* law,
                       const Disturbance* disturbance, const RunOptions& opts) {
  const int nj = model.n_joints();
  const double period = gait.period();
  const int samples_per_cycle = static_cast<int>(std::lround(opts.output_rate * period));
  int substeps = (opts.steps_per_cycle + samples_per_cycle - 1) / samples_per_cycle;
  substeps = std::max(substeps, 1);
  const int steps_per_cycle = substeps * samples_per_cycle;
  const double dt = period / steps_per_cycle;

  GaitRunRecord rec;
  const int total_samples = cycles * samples_per_cycle + 1;
  rec.run.rate = opts.output_rate;
  rec.run.poses.reserve(total_samples);
  rec.run.shapes.resize(total_samples, nj);
  rec.run.commands.resize(total_samples, model.n_units);
  rec.run.forces.resize(total_samples, model.n_units);

  std::mt19937_64 rng(disturbance ? disturbance->seed : 0);
  std::normal_distribution<double> normal(0.0, 1.0);

  SimState state = initial;
  rec.cycle_states.push_back(state);

  // The desired trajectory is the one-parameter flow of the target averaged
  // velocity from the initial state.
  Eigen::VectorXd desired = Eigen::VectorXd::Zero(2 + model.n_units);
  Shape nominal = initial.shape;
  if (law) {
    nominal = law->nominal;
    desired = opts.desired_velocity ? *opts.desired_velocity : law->desired_velocity;
  }
  const Twist xi_des{desired[0], desired[1], desired[2]};
  const Eigen::VectorXd rdot_des = desired.tail(nj);

  auto desired_pose = [&](double t) { return compose(initial.pose, exp(xi_des, t)); };
  auto desired_shape = [&](double t) { return Shape(nominal + rdot_des * t); };

  auto record_sample = [&](int idx, const FourierGait& g, double t_local) {
    StepOptions so;
    so.mode = opts.mode;
    if (disturbance && disturbance->kind == Disturbance::Kind::constant_twist)
      so.extra_twist = disturbance->twist;
    const Eigen::VectorXd u = g.evaluate(t_local);
    const Eigen::VectorXd qdot = config_velocity(model, metric, state.shape, u, so);
    const Eigen::VectorXd f = stacked_forces(model, metric, state.shape, qdot, u, opts.mode);
    rec.run.poses.push_back(state.pose);
    rec.run.shapes.row(idx) = state.shape.transpose();
    rec.run.commands.row(idx) = u.transpose();
    for (int i = 0; i < model.n_units; ++i) rec.run.forces(idx, i) = f[3 * i];
  };

  record_sample(0, law ? FourierGait::from_theta(law->theta0, law->n_units, law->omega) : gait,
                0.0);
  int sample_idx = 1;

  // Integrated-mode error accumulator over the previous cycle.
  Eigen::VectorXd err_accum = Eigen::VectorXd::Zero(3 + nj);
  bool have_accum = false;

  bool done = false;
  for (int c = 0; c < cycles && !done; ++c) {
    FourierGait g_cycle = gait;
    if (law) {
      ErrorState e;
      if (law->mode == FeedbackMode::cycle_integrated && have_accum) {
        e.delta_g = Twist(Eigen::Vector3d(err_accum.head<3>()));
        e.delta_r = err_accum.tail(nj);
      } else {
        e = ErrorState::between(state.pose, desired_pose(state.t), state.shape,
                                desired_shape(state.t));
      }
      g_cycle = law->update(e, model);
    }
    rec.cycle_thetas.push_back(g_cycle.theta());
    err_accum.setZero();

    for (int s = 0; s < steps_per_cycle; ++s) {
      const double t_local = (s + 0.5) * dt;  // midpoint command for 2nd order
      StepOptions so;
      so.mode = opts.mode;
      if (disturbance) {
        switch (disturbance->kind) {
          case Disturbance::Kind::constant_twist:
            so.extra_twist = disturbance->twist;
            break;
          case Disturbance::Kind::force_noise:
            if (disturbance->noise_sigma > 0.0)
              so.extra_twist = disturbance->noise_sigma *
                               Eigen::Vector3d(normal(rng), normal(rng), normal(rng));
            break;
          case Disturbance::Kind::shape_impulse:
            if (state.t <= disturbance->impulse_time && disturbance->impulse_time < state.t + dt) {
              Shape bumped = state.shape + disturbance->impulse;
              if (!model.shape_in_limits(bumped)) {
                rec.limit_violation = true;
                rec.violation_time = state.t;
                done = true;
              } else {
                state.shape = bumped;
              }
            }
            break;
        }
      }
      if (done) break;

      if (law && law->mode == FeedbackMode::cycle_integrated) {
        const ErrorState e = ErrorState::between(state.pose, desired_pose(state.t), state.shape,
                                                 desired_shape(state.t));
        err_accum += e.vec() * (dt / period);
      }

      if (!step(state, model, metric, g_cycle.evaluate(t_local), dt, so)) {
        rec.limit_violation = true;
        rec.violation_time = state.t;
        done = true;
        break;
      }
      if ((s + 1) % substeps == 0) record_sample(sample_idx++, g_cycle, (s + 1.0) * dt);
    }
    if (!done) {
      rec.cycle_states.push_back(state);
      have_accum = true;
    }
  }

  if (sample_idx < total_samples) {
    rec.run.shapes.conservativeResize(sample_idx, Eigen::NoChange);
    rec.run.commands.conservativeResize(sample_idx, Eigen::NoChange);
    rec.run.forces.conservativeResize(sample_idx, Eigen::NoChange);
  }
  return rec;
}

TrajectoryDataset generate_identification_dataset(const ChainModel& model,
                                                  const LocalMetric& metric_true,
                                                  std::uint64_t seed, const DatasetOptions& opts) {
  TrajectoryDataset ds;
  ds.rate = opts.rate;
  const int n = model.n_units;
  const int nj = model.n_joints();
  const int samples = static_cast<int>(std::lround(opts.run_duration * opts.rate)) + 1;
  const double dt = 1.0 / (opts.rate * opts.steps_per_sample);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  for (int pattern = 0; pattern < (1 << n); ++pattern) {
    Eigen::VectorXd sign(n);
    for (int i = 0; i < n; ++i) sign[i] = (pattern >> i) & 1 ? -1.0 : 1.0;

    auto command = [&](double t) {
      const double phase = std::sin(2.0 * M_PI * opts.omega * t);
      return Eigen::VectorXd(opts.amplitude_scale * phase * sign.cwiseProduct(model.u_max));
    };

    TrajectoryRun run;
    run.rate = opts.rate;
    run.poses.reserve(samples);
    run.shapes.resize(samples, nj);
    run.commands.resize(samples, n);
    run.forces.resize(samples, n);

    SimState state;
    state.shape = Shape::Zero(nj);
    StepOptions so;

    auto record = [&](int idx) {
      const Eigen::VectorXd u = command(state.t);
      const Eigen::VectorXd qdot = config_velocity(model, metric_true, state.shape, u, so);
      const Eigen::VectorXd f = stacked_forces(model, metric_true, state.shape, qdot, u);
      Pose p = state.pose;
      if (opts.pose_noise_sigma > 0.0)
        p = Pose(p.x + opts.pose_noise_sigma * normal(rng),
                 p.y + opts.pose_noise_sigma * normal(rng),
                 p.theta + opts.pose_noise_sigma * normal(rng));
      run.poses.push_back(p);
      run.shapes.row(idx) = state.shape.transpose();
      run.commands.row(idx) = u.transpose();
      for (int i = 0; i < n; ++i) {
        double fi = f[3 * i];
        if (opts.force_noise_rel > 0.0) fi *= 1.0 + opts.force_noise_rel * normal(rng);
        run.forces(idx, i) = fi;
      }
    };

    record(0);
    for (int idx = 1; idx < samples; ++idx) {
      for (int s = 0; s < opts.steps_per_sample; ++s)
        step(state, model, metric_true, command(state.t + 0.5 * dt), dt, so);
      record(idx);
    }
    ds.runs.push_back(std::move(run));
  }
  return ds;
}

}  // namespace salp
