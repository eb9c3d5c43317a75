#pragma once

#include <Eigen/Dense>

// Active-set solver for nonnegatively constrained quadratic programs,
// min 1/2 x^T Q x + c^T x  s.t.  x >= 0, in the Lawson-Hanson style. Least
// squares ||A x - b||^2 is the Q = A^T A, c = -A^T b special case; the
// general form also accepts linear regularization terms.
namespace salp {

struct NnlsResult {
  Eigen::VectorXd x;
  int iterations = 0;
  double kkt_residual = 0.0;  // max gradient violation over active/passive sets
  bool converged = false;
};

NnlsResult nnls_qp(const Eigen::MatrixXd& Q, const Eigen::VectorXd& c, double tol = 1e-8,
                   int max_iter = 0);

NnlsResult nnls(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, double tol = 1e-8);

}  // namespace salp
