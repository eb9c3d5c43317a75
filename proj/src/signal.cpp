#include "salp/signal.hpp"

#include <cmath>
#include <stdexcept>

namespace salp {

namespace {
// Sample index pairs and blend weight for linear/geodesic interpolation.
struct Lerp {
  int lo, hi;
  double s;
};

std::vector<Lerp> resample_grid(int n_from, double from_rate, double to_rate) {
  if (n_from < 2) throw std::invalid_argument("resample: need at least 2 samples");
  const double duration = (n_from - 1) / from_rate;
  const int n_to = static_cast<int>(std::floor(duration * to_rate)) + 1;
  std::vector<Lerp> grid(n_to);
  for (int j = 0; j < n_to; ++j) {
    const double t = j / to_rate;
    double idx = t * from_rate;
    int lo = static_cast<int>(std::floor(idx));
    if (lo >= n_from - 1) lo = n_from - 2;
    grid[j] = {lo, lo + 1, idx - lo};
  }
  return grid;
}
}  // namespace

Eigen::VectorXd resample_scalar(const Eigen::VectorXd& values, double from_rate, double to_rate) {
  if (from_rate <= 0.0 || to_rate <= 0.0) throw std::invalid_argument("resample: rates must be positive");
  const auto grid = resample_grid(static_cast<int>(values.size()), from_rate, to_rate);
  Eigen::VectorXd out(grid.size());
  for (size_t j = 0; j < grid.size(); ++j)
    out[j] = (1.0 - grid[j].s) * values[grid[j].lo] + grid[j].s * values[grid[j].hi];
  return out;
}

std::vector<Pose> resample_poses(const std::vector<Pose>& poses, double from_rate, double to_rate) {
  if (from_rate <= 0.0 || to_rate <= 0.0) throw std::invalid_argument("resample: rates must be positive");
  const auto grid = resample_grid(static_cast<int>(poses.size()), from_rate, to_rate);
  std::vector<Pose> out(grid.size());
  for (size_t j = 0; j < grid.size(); ++j)
    out[j] = interpolate(poses[grid[j].lo], poses[grid[j].hi], grid[j].s);
  return out;
}

TrajectoryRun resample_run(const TrajectoryRun& run, double to_rate) {
  TrajectoryRun out;
  out.rate = to_rate;
  out.poses = resample_poses(run.poses, run.rate, to_rate);
  const int n_to = static_cast<int>(out.poses.size());
  auto cols = [&](const Eigen::MatrixXd& m) {
    Eigen::MatrixXd r(n_to, m.cols());
    for (int c = 0; c < m.cols(); ++c) r.col(c) = resample_scalar(m.col(c), run.rate, to_rate);
    return r;
  };
  out.shapes = cols(run.shapes);
  out.commands = cols(run.commands);
  out.forces = cols(run.forces);
  return out;
}

Eigen::VectorXd lowpass(const Eigen::VectorXd& stream, double cutoff, double rate) {
  if (!(cutoff > 0.0 && cutoff < rate / 2.0))
    throw std::invalid_argument("lowpass: cutoff must lie in (0, rate/2)");
  const int n = static_cast<int>(stream.size());
  if (n < 2) return stream;

  // Bilinear-transform Butterworth biquad, DC gain renormalized to exactly 1.
  const double K = std::tan(M_PI * cutoff / rate);
  const double norm = 1.0 + std::sqrt(2.0) * K + K * K;
  double b0 = K * K / norm, b1 = 2.0 * b0, b2 = b0;
  const double a1 = 2.0 * (K * K - 1.0) / norm;
  const double a2 = (1.0 - std::sqrt(2.0) * K + K * K) / norm;
  const double dc = (b0 + b1 + b2) / (1.0 + a1 + a2);
  b0 /= dc;
  b1 /= dc;
  b2 /= dc;

  const int pad = std::min(n - 1, static_cast<int>(std::ceil(3.0 * rate / (2.0 * M_PI * cutoff))));
  Eigen::VectorXd ext(n + 2 * pad);
  for (int i = 0; i < pad; ++i) ext[i] = 2.0 * stream[0] - stream[pad - i];
  ext.segment(pad, n) = stream;
  for (int i = 0; i < pad; ++i) ext[pad + n + i] = 2.0 * stream[n - 1] - stream[n - 2 - i];

  auto filt = [&](Eigen::VectorXd x) {
    // Steady-state initial conditions for the first sample (filtfilt-style),
    // so constants pass through exactly.
    double z1 = (1.0 - b0) * x[0];
    double z2 = (b2 - a2) * x[0];
    for (int i = 0; i < x.size(); ++i) {
      const double in = x[i];
      const double out = b0 * in + z1;
      z1 = b1 * in - a1 * out + z2;
      z2 = b2 * in - a2 * out;
      x[i] = out;
    }
    return x;
  };
  Eigen::VectorXd y = filt(ext);
  y.reverseInPlace();
  y = filt(y);
  y.reverseInPlace();
  return y.segment(pad, n);
}

TrajectoryRun lowpass_run(const TrajectoryRun& run, double cutoff) {
  TrajectoryRun out = run;
  auto cols = [&](Eigen::MatrixXd& m) {
    for (int c = 0; c < m.cols(); ++c) m.col(c) = lowpass(m.col(c), cutoff, run.rate);
  };
  cols(out.shapes);
  cols(out.commands);
  cols(out.forces);

  const int n = run.samples();
  Eigen::VectorXd px(n), py(n), pth(n);
  double unwrapped = run.poses.empty() ? 0.0 : run.poses[0].theta;
  for (int i = 0; i < n; ++i) {
    px[i] = run.poses[i].x;
    py[i] = run.poses[i].y;
    if (i > 0) unwrapped += wrap_angle(run.poses[i].theta - run.poses[i - 1].theta);
    pth[i] = unwrapped;
  }
  px = lowpass(px, cutoff, run.rate);
  py = lowpass(py, cutoff, run.rate);
  pth = lowpass(pth, cutoff, run.rate);
  for (int i = 0; i < n; ++i) out.poses[i] = Pose(px[i], py[i], pth[i]);
  return out;
}

VelocityStreams differentiate(const TrajectoryRun& run) {
  const int n = run.samples();
  if (n < 2) throw std::invalid_argument("differentiate: need at least 2 samples");
  const double dt = run.dt();
  const int nj = static_cast<int>(run.shapes.cols());

  const std::vector<Twist> mid_xi = group_diff(run.poses, dt);
  Eigen::MatrixXd mid_alpha(n - 1, nj);
  for (int i = 0; i + 1 < n; ++i)
    mid_alpha.row(i) = (run.shapes.row(i + 1) - run.shapes.row(i)) / dt;

  // Midpoint estimates back to sample times: adjacent-midpoint average in the
  // interior, linear extrapolation at the ends.
  VelocityStreams out;
  out.xi.resize(n, 3);
  out.alpha_dot.resize(n, nj);
  auto blend = [n](auto at, auto set) {
    for (int i = 0; i < n; ++i) {
      if (i == 0)
        set(0, n > 2 ? 1.5 * at(0) - 0.5 * at(1) : at(0));
      else if (i == n - 1)
        set(n - 1, n > 2 ? 1.5 * at(n - 2) - 0.5 * at(n - 3) : at(n - 2));
      else
        set(i, 0.5 * (at(i - 1) + at(i)));
    }
  };
  blend([&](int i) { return mid_xi[i].vec(); },
        [&](int i, const Eigen::Vector3d& v) { out.xi.row(i) = v; });
  blend([&](int i) -> Eigen::VectorXd { return mid_alpha.row(i); },
        [&](int i, const Eigen::VectorXd& v) { out.alpha_dot.row(i) = v; });

  // Richardson extrapolation in the interior: combine the one-step and
  // two-step central group differences to cancel the O(dt^2) term.
  for (int i = 2; i + 2 < n; ++i) {
    const Eigen::Vector3d v1 =
        log(compose(inverse(run.poses[i - 1]), run.poses[i + 1])).vec() / (2.0 * dt);
    const Eigen::Vector3d v2 =
        log(compose(inverse(run.poses[i - 2]), run.poses[i + 2])).vec() / (4.0 * dt);
    out.xi.row(i) = (4.0 * v1 - v2) / 3.0;
    out.alpha_dot.row(i) = (8.0 * (run.shapes.row(i + 1) - run.shapes.row(i - 1)) -
                            (run.shapes.row(i + 2) - run.shapes.row(i - 2))) /
                           (12.0 * dt);
  }
  return out;
}

}  // namespace salp
