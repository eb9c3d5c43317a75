#include <chrono>
#include <iostream>

#include "salp/body_frame.hpp"
#include "salp/identify.hpp"
#include "salp/optimize.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace salp;
using clk = std::chrono::steady_clock;

namespace {

double time_ms(const std::function<void()>& fn, int reps = 3) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = clk::now();
    fn();
    const auto t1 = clk::now();
    best = std::min(best, std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  return best;
}

void report(const char* name, double serial_ms, double parallel_ms) {
  std::cout << name << ": serial " << serial_ms << " ms, parallel " << parallel_ms
            << " ms, speedup " << serial_ms / parallel_ms << "x\n";
}

}  // namespace

int main() {
#ifdef _OPENMP
  std::cout << "OpenMP threads: " << omp_get_max_threads() << "\n";
#else
  std::cout << "built without OpenMP; parallel paths run serially\n";
#endif

  const ChainModel model = landsalp_model();
  const LocalMetric metric = default_test_metric();

  DatasetOptions dopts;
  dopts.run_duration = 10.0;
  const TrajectoryDataset ds = generate_identification_dataset(model, metric, 1, dopts);

  RegressionSystem check_s = build_regression(ds, model, CommandMode::velocity, 0.0, true);
  RegressionSystem check_p = build_regression(ds, model, CommandMode::velocity, 0.0, false);
  std::cout << "regression parity: max |diff| = "
            << (check_s.J_F_u - check_p.J_F_u).cwiseAbs().maxCoeff() << "\n";

  report("build_regression",
         time_ms([&] { (void)build_regression(ds, model, CommandMode::velocity, 0.0, true); }),
         time_ms([&] { (void)build_regression(ds, model, CommandMode::velocity, 0.0, false); }));

  report("optimize_body_frame (21x21)",
         time_ms([&] {
           (void)optimize_body_frame(model, metric, {-0.8, -0.8}, {0.8, 0.8}, 21, 21, true);
         }),
         time_ms([&] {
           (void)optimize_body_frame(model, metric, {-0.8, -0.8}, {0.8, 0.8}, 21, 21, false);
         }));

  const AveragedSystem avg = augmented_system(model, metric, Shape::Zero(2), 1.0 / 6.0);
  const CostMetric cost = build_cost(model, metric, Shape::Zero(2), CostKind::velocity);
  Eigen::VectorXd desired = Eigen::VectorXd::Zero(5);
  desired[0] = 0.005;
  const GaitPlan plan = solve_averaged(avg, cost, desired);
  RefineOptions rs, rp;
  rs.serial = true;
  report("refine_full",
         time_ms([&] { (void)refine_full(plan, model, metric, rs); }, 1),
         time_ms([&] { (void)refine_full(plan, model, metric, rp); }, 1));
  return 0;
}
