// Timing comparison of the parallel and serial estimator paths on a batch of
// representative quotient workloads. The two paths must agree bit for bit;
// this tool reports the speedup alongside that check.
#include <chrono>
#include <cstdio>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "epicalc/composite.hpp"
#include "epicalc/instances.hpp"
#include "epicalc/oracle.hpp"
#include "epicalc/psd_cone.hpp"
#include "epicalc/testgen.hpp"

using namespace epicalc;

namespace {

struct Workload {
  const char* name;
  Evaluatable h;
  Vec x, w;
};

double run_batch(const std::vector<Workload>& batch, const Schedule& sched, ExecPolicy policy,
                 std::vector<double>* sink) {
  auto t0 = std::chrono::steady_clock::now();
  for (const auto& wl : batch) {
    auto est = estimate_subderivative(wl.h, wl.x, wl.w, sched, policy);
    sink->push_back(est.value.is_finite() ? est.value.value() : -1.0);
    auto est2 = estimate_second_subderivative(wl.h, wl.x, Vec(wl.x.size(), 0.0), wl.w, sched, policy);
    sink->push_back(est2.level_minima.back());
  }
  auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count();
}

}  // namespace

int main() {
  Rng rng(7);
  std::vector<Workload> batch;

  for (int rep = 0; rep < 6; ++rep) {
    auto gp = testgen::random_group_penalty(rng, 8);
    Vec x = testgen::random_instance_point(rng, gp);
    Vec w = rng.gaussian_vec(gp.gs.total_dim());
    batch.push_back({"group_penalty", make_f_evaluatable(gp.cf), x, w});
  }
  for (int rep = 0; rep < 4; ++rep) {
    auto cfg = testgen::random_psd_config(rng, 4);
    batch.push_back({"psd_indicator", make_psd_indicator_evaluatable(4),
                     sym_to_vec(cfg.xbar), sym_to_vec(cfg.w)});
  }

  Schedule sched;
  sched.levels = 12;
  sched.samples_per_level = 512;

  std::vector<double> serial_vals, parallel_vals;
  double t_serial = run_batch(batch, sched, ExecPolicy::Serial, &serial_vals);
  double t_parallel = run_batch(batch, sched, ExecPolicy::Parallel, &parallel_vals);

  bool identical = serial_vals == parallel_vals;
#ifdef _OPENMP
  int threads = omp_get_max_threads();
#else
  int threads = 1;
#endif
  std::printf("workloads: %zu estimator calls over %zu functions\n", serial_vals.size(),
              batch.size());
  std::printf("serial:   %8.1f ms\n", t_serial);
  std::printf("parallel: %8.1f ms  (%d threads)\n", t_parallel, threads);
  std::printf("speedup:  %8.2fx\n", t_serial / t_parallel);
  std::printf("bit-identical results: %s\n", identical ? "yes" : "NO");
  return identical ? 0 : 1;
}
