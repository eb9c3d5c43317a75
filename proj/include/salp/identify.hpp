#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "salp/dynamics.hpp"
#include "salp/metric.hpp"
#include "salp/signal.hpp"

// Drag-metric identification: per-sample regression rows linear in the
// diagonal metric entries, a nonnegative least-squares solve with a net-power
// regularizer, and observability diagnostics.
namespace salp {

struct RegressionSystem {
  // Sample-major force rows, n_units per sample: row (s*n + i) predicts the
  // rolling-axis force reading of unit i.
  Eigen::MatrixXd J_F_u;
  Eigen::VectorXd targets;
  // Configuration-force operator rows, (2+n) per sample; F_config = J_F_zeta m.
  // Quasi-static balance makes these zero-target rows of the data fit, which
  // is what renders the non-sensed drag channels observable at lambda = 0.
  Eigen::MatrixXd J_F_zeta;
  // One net-power row per sample: power = power_rows.row(s) * m.
  Eigen::MatrixXd power_rows;
  double lambda = 0.0;
  bool linear_power = false;  // published linear form; squared is the default
  int n_units = 0;

  int n_samples() const { return static_cast<int>(power_rows.rows()); }
  int n_coeffs() const { return static_cast<int>(power_rows.cols()); }

  double force_fit(const Eigen::VectorXd& m) const { return (J_F_u * m - targets).squaredNorm(); }
  double data_fit(const Eigen::VectorXd& m) const {
    return force_fit(m) + (J_F_zeta * m).squaredNorm();
  }
  double regularizer(const Eigen::VectorXd& m) const;
  double objective(const Eigen::VectorXd& m) const { return data_fit(m) + lambda * regularizer(m); }
};

struct ConditionReport {
  Eigen::VectorXd column_norms;    // of [J_F_u; power_rows], per coefficient
  std::vector<int> weak_columns;   // below weak_threshold * max norm
  double weak_threshold = 1e-3;
  bool rank_deficient = false;
  std::vector<std::string> warnings;
};

struct IdentificationResult {
  LocalMetric metric;
  double residual_rms = 0.0;           // force-fit residual per reading
  Eigen::VectorXd residual_gradients;  // objective gradient per coefficient
  ConditionReport condition_report;
  double kkt_residual = 0.0;
  bool converged = false;
};

// Assembles rows from a differentiated dataset; sample loop is OpenMP
// parallel. `serial` forces the reference single-threaded path.
RegressionSystem build_regression(const TrajectoryDataset& dataset, const ChainModel& model,
                                  CommandMode mode = CommandMode::velocity, double lambda = 0.0,
                                  bool serial = false);

// Regularizer weight making lambda * P equal 1% of the data fit at the
// unregularized solution; falls back to a Frobenius-norm ratio when the
// unregularized fit is (numerically) exact.
double default_lambda(const RegressionSystem& system);

IdentificationResult identify(const RegressionSystem& system);

// Gradient of the full objective at the solution (KKT certificate values).
Eigen::VectorXd residual_gradients(const RegressionSystem& system,
                                   const IdentificationResult& result);

// Whitens the force rows by the inverse square root of the empirical
// per-sample residual covariance at the unregularized solution.
RegressionSystem rescale_objective(const RegressionSystem& system);

}  // namespace salp
