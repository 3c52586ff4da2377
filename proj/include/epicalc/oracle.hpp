#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "epicalc/extreal.hpp"
#include "epicalc/linalg.hpp"

namespace epicalc {

// Geometric refinement schedule for the difference-quotient estimators. At
// level k the step is tau0 * ratio^k and the sampling ball around the queried
// direction has radius radius_factor * tau_k; the queried direction itself is
// always evaluated, so a level's minimum never exceeds the centered quotient.
struct Schedule {
  double tau0 = 1e-2;
  double ratio = 0.5;
  int levels = 14;
  int samples_per_level = 64;
  double radius_factor = 1.0;
  std::uint64_t seed = 42;

  void validate() const;
  double tau(int k) const;
};

struct OracleEstimate {
  // Final-level minimum. +inf when the divergence flag is set; not meaningful
  // when trend_negative is set (the quotients are running off to -inf).
  ExtReal value{0.0};
  bool divergence_flag = false;  // the last 3 levels produced no finite sample
  bool trend_negative = false;   // minima fell below -1/tau at the last 3 levels
  std::vector<double> level_minima;
  // Log-log slope of |m_k - m_last| against tau over the 4 levels before the
  // last; NaN when not enough usable points.
  double trend_slope = 0.0;
};

// Serial evaluation is the reference implementation; the parallel path must
// produce bit-identical estimates (samples are drawn up front and the min is
// reduced in a fixed order).
enum class ExecPolicy { Parallel, Serial };

using Evaluatable = std::function<ExtReal(const Vec&)>;

// First-order quotients [h(x + tau w') - h(x)] / tau, minimized over the
// shrinking neighborhood of w. h(x) must be finite.
OracleEstimate estimate_subderivative(const Evaluatable& h, const Vec& x, const Vec& w,
                                      const Schedule& sched = Schedule{},
                                      ExecPolicy policy = ExecPolicy::Parallel);

// Second-order quotients [h(x + tau w') - h(x) - tau <v, w'>] / (tau^2 / 2).
OracleEstimate estimate_second_subderivative(const Evaluatable& h, const Vec& x, const Vec& v,
                                             const Vec& w, const Schedule& sched = Schedule{},
                                             ExecPolicy policy = ExecPolicy::Parallel);

// Parabolic quotients [h(x + tau w + tau^2 z'/2) - h(x) - tau dhxw] / (tau^2/2),
// minimized over the shrinking neighborhood of z. dhxw is the (finite) value
// of the first-order term, typically supplied from a closed form.
OracleEstimate estimate_parabolic_subderivative(const Evaluatable& h, const Vec& x, const Vec& w,
                                                const ExtReal& dhxw, const Vec& z,
                                                const Schedule& sched = Schedule{},
                                                ExecPolicy policy = ExecPolicy::Parallel);

// Deterministic RNG used by all samplers (splitmix64 core; gaussians via
// Box-Muller so streams are identical across platforms).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next_u64();
  double next_unit();      // [0, 1)
  double next_gaussian();  // standard normal
  Vec gaussian_vec(int dim);
  // Uniform draw from the closed ball of the given radius around center.
  Vec ball_point(const Vec& center, double radius);

 private:
  std::uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace epicalc
