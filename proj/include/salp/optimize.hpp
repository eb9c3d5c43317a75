#pragma once

#include <Eigen/Dense>

#include "salp/averaging.hpp"
#include "salp/simulate.hpp"

// Gait synthesis: minimum-cost Fourier gaits achieving a desired average
// configuration velocity. Averaged-system solve with an analytic-gradient
// SQP, full-simulation refinement with finite-difference Jacobians, and the
// average-shape-constrained variant with joint-limit penalties.
namespace salp {

struct InfeasibleTarget : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class CostKind { velocity, power, force };

struct CostMetric {
  CostKind kind = CostKind::velocity;
  Eigen::MatrixXd R_u;  // n x n instantaneous cometric

  // Block form diag(R_u, R_u/2, R_u/2, ...) over Theta of the given order;
  // Theta^T R Theta equals the cycle average of u^T R_u u.
  Eigen::MatrixXd full(int order) const;
};

CostMetric build_cost(const ChainModel& model, const LocalMetric& metric, const Shape& nominal,
                      CostKind kind, CommandMode mode = CommandMode::velocity);

struct GaitPlan {
  FourierGait gait;
  Shape nominal;
  Eigen::VectorXd achieved_average;  // averaged-model prediction at the solution
  Eigen::MatrixXd R;                 // full cost form used
  double cost_value = 0.0;
  double residual = 0.0;  // constraint violation norm
  bool converged = false;
  bool refined = false;
  bool limits_ok = true;
};

struct SolveOptions {
  int order = 1;
  int max_iterations = 200;
  double kkt_tol = 1e-8;
  double constraint_tol = 1e-10;
};

// min Theta^T R Theta  s.t.  A_aug u_aug(Theta) = desired. Warm start from a
// least-norm augmented-input solve plus a first-order amplitude construction,
// then equality-constrained Gauss-Newton with Armijo backtracking. Throws
// InfeasibleTarget when desired is outside the augmented column space.
GaitPlan solve_averaged(const AveragedSystem& avg, const CostMetric& cost,
                        const Eigen::VectorXd& desired, const SolveOptions& opts = {});

struct RefineOptions {
  int steps_per_cycle = 2400;
  int max_iterations = 60;
  double displacement_tol = 1e-6;  // per-cycle, after scaling by the period
  bool serial = false;             // single-threaded finite differences
};

// Gauss-Newton on the full-simulation per-cycle displacement constraint,
// finite-difference Jacobian over Theta (step 1e-4 u_max per unit).
GaitPlan refine_full(const GaitPlan& plan, const ChainModel& model, const LocalMetric& metric,
                     const RefineOptions& opts = {});

struct ShapeSolveOptions {
  RefineOptions refine;
  int limit_phases = 32;
  double limit_margin = 0.0;       // rad shaved off the joint box
  double mean_shape_tol = 1e-3;    // rad
  int max_escalations = 6;
  double initial_penalty = 1e2;
};

// Appendix-style variant: adds the initial shape r0 as a decision variable,
// constrains the cycle-mean simulated shape to the nominal, and enforces
// joint limits at sampled phases by escalating penalties with a dense
// post-verification. limits_ok = false flags an infeasible box.
GaitPlan solve_shape_averaged(const ChainModel& model, const LocalMetric& metric,
                              const CostMetric& cost, const Eigen::VectorXd& desired,
                              const Shape& nominal, double omega,
                              const ShapeSolveOptions& opts = {});

}  // namespace salp
