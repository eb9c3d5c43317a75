#include "salp/nnls.hpp"

#include <limits>
#include <stdexcept>
#include <vector>

namespace salp {

namespace {

// Solve the equality-constrained subproblem on the passive set.
Eigen::VectorXd passive_solve(const Eigen::MatrixXd& Q, const Eigen::VectorXd& c,
                              const std::vector<int>& passive) {
  const int k = static_cast<int>(passive.size());
  Eigen::MatrixXd Qp(k, k);
  Eigen::VectorXd cp(k);
  for (int a = 0; a < k; ++a) {
    cp[a] = c[passive[a]];
    for (int b = 0; b < k; ++b) Qp(a, b) = Q(passive[a], passive[b]);
  }
  return Qp.ldlt().solve(-cp);
}

}  // namespace

NnlsResult nnls_qp(const Eigen::MatrixXd& Q, const Eigen::VectorXd& c, double tol, int max_iter) {
  const int n = static_cast<int>(c.size());
  if (Q.rows() != n || Q.cols() != n) throw std::invalid_argument("nnls_qp: dimension mismatch");
  if (max_iter <= 0) max_iter = 50 * std::max(n, 10);

  const double scale = std::max(1.0, c.cwiseAbs().maxCoeff());
  const double eps = tol * scale;

  NnlsResult res;
  res.x = Eigen::VectorXd::Zero(n);
  std::vector<bool> in_passive(n, false);
  std::vector<int> passive;

  for (int outer = 0; outer < max_iter; ++outer) {
    ++res.iterations;
    const Eigen::VectorXd grad = Q * res.x + c;

    // Most negative gradient among clamped variables decides entry.
    int enter = -1;
    double worst = -eps;
    for (int i = 0; i < n; ++i)
      if (!in_passive[i] && grad[i] < worst) {
        worst = grad[i];
        enter = i;
      }
    if (enter < 0) {
      double kkt = 0.0;
      for (int i = 0; i < n; ++i)
        kkt = std::max(kkt, in_passive[i] ? std::abs(grad[i]) : std::max(0.0, -grad[i]));
      res.kkt_residual = kkt / scale;
      res.converged = kkt <= eps * 10.0;
      return res;
    }

    in_passive[enter] = true;
    passive.push_back(enter);

    // Inner loop: restore feasibility of the unconstrained passive solution.
    while (true) {
      const Eigen::VectorXd z = passive_solve(Q, c, passive);
      double alpha = 1.0;
      int blocker = -1;
      for (int a = 0; a < static_cast<int>(passive.size()); ++a) {
        if (z[a] > 0.0) continue;
        const double xi = res.x[passive[a]];
        const double denom = xi - z[a];
        const double step = denom > 0.0 ? xi / denom : 0.0;
        if (step < alpha) {
          alpha = step;
          blocker = a;
        }
      }
      if (blocker < 0) {
        for (int a = 0; a < static_cast<int>(passive.size()); ++a) res.x[passive[a]] = z[a];
        break;
      }
      for (int a = 0; a < static_cast<int>(passive.size()); ++a) {
        const int i = passive[a];
        res.x[i] += alpha * (z[a] - res.x[i]);
      }
      // Drop every variable pinned at zero (at least the blocker).
      std::vector<int> kept;
      for (int a = 0; a < static_cast<int>(passive.size()); ++a) {
        const int i = passive[a];
        if (a == blocker || res.x[i] <= 0.0) {
          res.x[i] = 0.0;
          in_passive[i] = false;
        } else {
          kept.push_back(i);
        }
      }
      passive = std::move(kept);
      if (passive.empty()) break;
    }
  }

  const Eigen::VectorXd grad = Q * res.x + c;
  double kkt = 0.0;
  for (int i = 0; i < n; ++i)
    kkt = std::max(kkt, in_passive[i] ? std::abs(grad[i]) : std::max(0.0, -grad[i]));
  res.kkt_residual = kkt / scale;
  res.converged = false;
  return res;
}

NnlsResult nnls(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, double tol) {
  return nnls_qp(A.transpose() * A, -(A.transpose() * b), tol);
}

}  // namespace salp
