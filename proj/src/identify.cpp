#include "salp/identify.hpp"

#include <cmath>

#include "salp/nnls.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace salp {

double RegressionSystem::regularizer(const Eigen::VectorXd& m) const {
  const Eigen::VectorXd p = power_rows * m;
  return linear_power ? p.sum() : p.squaredNorm();
}

namespace {

struct SampleRows {
  Eigen::MatrixXd force;       // n x d
  Eigen::VectorXd force_rhs;   // n
  Eigen::MatrixXd config;      // (2+n) x d
  Eigen::RowVectorXd power;    // 1 x d
};

SampleRows assemble_sample(const ChainModel& model, const Shape& r,
                           const Eigen::VectorXd& zeta_dot, const Eigen::VectorXd& u,
                           const Eigen::VectorXd& f_meas, CommandMode mode) {
  const int n = model.n_units;
  const int d = 4 * n - 1;
  const auto jac = aggregate_jacobians(model, r);
  const Eigen::VectorXd w = jac.J_zeta * zeta_dot + jac.J_u * u;

  SampleRows rows;
  rows.force = Eigen::MatrixXd::Zero(n, d);
  rows.force_rhs = f_meas;
  // The force reading of unit i only senses its rolling-axis channel; in
  // force mode the command enters the reading directly, not through the drag
  // coefficient, so it moves to the right-hand side.
  for (int i = 0; i < n; ++i) {
    if (mode == CommandMode::velocity) {
      rows.force(i, 3 * i) = w[3 * i];
    } else {
      rows.force(i, 3 * i) = (jac.J_zeta * zeta_dot)[3 * i];
      rows.force_rhs[i] -= u[i];
    }
  }
  rows.config = jac.J_zeta.transpose() * w.asDiagonal();
  rows.power = zeta_dot.transpose() * rows.config;
  return rows;
}

}  // namespace

RegressionSystem build_regression(const TrajectoryDataset& dataset, const ChainModel& model,
                                  CommandMode mode, double lambda, bool serial) {
  const int n = model.n_units;
  const int d = 4 * n - 1;
  const int cfg = 2 + n;
  const int total = dataset.total_samples();

  RegressionSystem sys;
  sys.n_units = n;
  sys.lambda = lambda;
  sys.J_F_u.resize(total * n, d);
  sys.targets.resize(total * n);
  sys.J_F_zeta.resize(total * cfg, d);
  sys.power_rows.resize(total, d);

  int base = 0;
  for (const auto& run : dataset.runs) {
    if (run.shapes.cols() != model.n_joints() || run.commands.cols() != n ||
        run.forces.cols() != n)
      throw std::invalid_argument("build_regression: run dimensions do not match the model");
    const VelocityStreams vel = differentiate(run);
    const int S = run.samples();

#pragma omp parallel for schedule(static) if (!serial)
    for (int s = 0; s < S; ++s) {
      Eigen::VectorXd zeta_dot(cfg);
      zeta_dot.head<3>() = vel.xi.row(s).transpose();
      zeta_dot.tail(model.n_joints()) = vel.alpha_dot.row(s).transpose();
      const SampleRows rows =
          assemble_sample(model, run.shapes.row(s).transpose(), zeta_dot,
                          run.commands.row(s).transpose(), run.forces.row(s).transpose(), mode);
      const int g = base + s;
      sys.J_F_u.middleRows(g * n, n) = rows.force;
      sys.targets.segment(g * n, n) = rows.force_rhs;
      sys.J_F_zeta.middleRows(g * cfg, cfg) = rows.config;
      sys.power_rows.row(g) = rows.power;
    }
    base += S;
  }
  return sys;
}

namespace {

// Normal-equation pieces 1/2 m^T Q m + c^T m for the regularized objective.
void build_qp(const RegressionSystem& sys, Eigen::MatrixXd& Q, Eigen::VectorXd& c) {
  Q = 2.0 * (sys.J_F_u.transpose() * sys.J_F_u + sys.J_F_zeta.transpose() * sys.J_F_zeta);
  c = -2.0 * (sys.J_F_u.transpose() * sys.targets);
  if (sys.lambda != 0.0) {
    if (sys.linear_power)
      c += sys.lambda * sys.power_rows.colwise().sum().transpose();
    else
      Q += 2.0 * sys.lambda * (sys.power_rows.transpose() * sys.power_rows);
  }
}

Eigen::VectorXd solve_metric(const RegressionSystem& sys, double* kkt, bool* converged) {
  Eigen::MatrixXd Q;
  Eigen::VectorXd c;
  build_qp(sys, Q, c);
  const NnlsResult r = nnls_qp(Q, c);
  if (kkt) *kkt = r.kkt_residual;
  if (converged) *converged = r.converged;
  return r.x;
}

}  // namespace

double default_lambda(const RegressionSystem& system) {
  RegressionSystem unreg = system;
  unreg.lambda = 0.0;
  const Eigen::VectorXd m0 = solve_metric(unreg, nullptr, nullptr);
  const double fit = system.data_fit(m0);
  RegressionSystem probe = system;
  probe.lambda = 1.0;
  const double reg = std::abs(probe.regularizer(m0));
  const double fro_ratio =
      system.J_F_u.squaredNorm() / std::max(system.power_rows.squaredNorm(), 1e-300);
  const double floor = 1e-10 * system.targets.squaredNorm();
  if (reg <= 0.0 || fit <= floor) return 0.01 * fro_ratio;
  return 0.01 * fit / reg;
}

IdentificationResult identify(const RegressionSystem& system) {
  IdentificationResult res;
  const Eigen::VectorXd m = solve_metric(system, &res.kkt_residual, &res.converged);
  res.metric = LocalMetric::from_diagonal(m, system.n_units);
  res.residual_rms =
      std::sqrt(system.force_fit(m) / std::max<int>(1, static_cast<int>(system.targets.size())));
  res.residual_gradients = residual_gradients(system, res);

  ConditionReport& rep = res.condition_report;
  const int d = system.n_coeffs();
  rep.column_norms.resize(d);
  for (int j = 0; j < d; ++j)
    rep.column_norms[j] = std::sqrt(system.J_F_u.col(j).squaredNorm() +
                                    system.J_F_zeta.col(j).squaredNorm());
  const double max_norm = rep.column_norms.maxCoeff();
  for (int j = 0; j < d; ++j)
    if (rep.column_norms[j] < rep.weak_threshold * max_norm) rep.weak_columns.push_back(j);
  if (!rep.weak_columns.empty()) {
    rep.rank_deficient = true;
    for (int j : rep.weak_columns) {
      const int unit = j / 3;
      const char* axes[] = {"rolling", "lateral", "rotational"};
      rep.warnings.push_back(
          j < 3 * system.n_units
              ? "weakly observable: unit " + std::to_string(unit) + " " + axes[j % 3] + " drag"
              : "weakly observable: joint " + std::to_string(j - 3 * system.n_units) + " drag");
    }
  }
  return res;
}

Eigen::VectorXd residual_gradients(const RegressionSystem& system,
                                   const IdentificationResult& result) {
  Eigen::MatrixXd Q;
  Eigen::VectorXd c;
  build_qp(system, Q, c);
  return Q * result.metric.diagonal() + c;
}

RegressionSystem rescale_objective(const RegressionSystem& system) {
  RegressionSystem unreg = system;
  unreg.lambda = 0.0;
  const Eigen::VectorXd m0 = solve_metric(unreg, nullptr, nullptr);

  const int n = system.n_units;
  const int S = system.n_samples();
  const Eigen::VectorXd res = system.J_F_u * m0 - system.targets;

  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(n, n);
  for (int s = 0; s < S; ++s) {
    const Eigen::VectorXd e = res.segment(s * n, n);
    C += e * e.transpose();
  }
  C /= std::max(1, S);

  // Inverse square root with an eigenvalue floor; a (near-)singular
  // covariance degrades gracefully to uniform weighting of its null space.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(C);
  const double floor = std::max(1e-12 * eig.eigenvalues().maxCoeff(), 1e-300);
  Eigen::VectorXd inv_sqrt = eig.eigenvalues().cwiseMax(floor).cwiseSqrt().cwiseInverse();
  // Normalize to unit geometric mean: whitening should equalize the force
  // channels relative to each other without rescaling the force fit against
  // the quasi-static balance rows.
  inv_sqrt /= std::exp(inv_sqrt.array().log().mean());
  const Eigen::MatrixXd W =
      eig.eigenvectors() * inv_sqrt.asDiagonal() * eig.eigenvectors().transpose();

  RegressionSystem out = system;
  for (int s = 0; s < S; ++s) {
    out.J_F_u.middleRows(s * n, n) = W * system.J_F_u.middleRows(s * n, n);
    out.targets.segment(s * n, n) = W * system.targets.segment(s * n, n);
  }
  return out;
}

}  // namespace salp
