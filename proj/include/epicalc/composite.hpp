#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "epicalc/extreal.hpp"
#include "epicalc/inner_map.hpp"
#include "epicalc/pwtd.hpp"

namespace epicalc {

// Composite f = theta o inner with the constraint qualification and the
// regularity route recorded as explicit assertions. Shipped instance builders
// set both flags; user-assembled compositions must opt in.
struct CompositeFunction {
  PwtdFunction theta;
  InnerMap inner;
  bool msqc_asserted = false;
  // Whether the second-subderivative closed form is certified for this
  // instance family (set by builders; otherwise supply assert_regularity).
  bool regularity_established = false;
  // Instance rule producing the certificate multiplier from (x, v); used when
  // the semiderivative is not linear at x and the exact polyhedral multiplier
  // set is out of reach.
  std::function<Vec(const Vec&, const Vec&)> multiplier_candidate;
  // Closed-form minimizer candidates fed to the regularity sampler.
  std::function<std::vector<Vec>(const Vec&, const Vec&, const Vec&)> minimizer_hints;
};

struct MultiplierSet {
  Vec x, v;
  // Exact polyhedral multiplier set; available when the semiderivative is
  // linear at x (Jacobian route).
  std::optional<Polyhedron> poly;
  Vec candidate;  // certificate multiplier
};

struct SamplerConfig {
  int n_samples = 64;
  std::uint64_t seed = 42;
  std::vector<double> magnitudes = {0.1, 1.0, 10.0, 100.0};
  double pass_tol = 1e-3 + 1e-6;  // |lhs - rhs| acceptance for the verdict
};

struct RegularityReport {
  Vec w;
  Vec xi_bar;
  ExtReal lhs{0.0};    // sampled inf over z of the support bracket
  ExtReal rhs{0.0};    // curvature term for the certificate multiplier
  ExtReal upper{0.0};  // upper estimate of the second subderivative
  ExtReal lower{0.0};  // lower estimate over multiplier candidates
  bool pass = false;
};

ExtReal f_eval(const CompositeFunction& cf, const Vec& x, const PwtdTol& tol = PwtdTol{});

// Chain rule: d f(x)(w) = d theta(F(x))(dF(x)(w)).
ExtReal f_subderivative(const CompositeFunction& cf, const Vec& x, const Vec& w,
                        const PwtdTol& tol = PwtdTol{});

// dF(x)(w) lands in a tangent cone of some active domain piece of theta.
bool domain_tangent_contains(const CompositeFunction& cf, const Vec& x, const Vec& w,
                             const PwtdTol& tol = PwtdTol{});

// F''(x;w,z) lands in a second-order tangent set of an active domain piece.
bool domain_second_tangent_contains(const CompositeFunction& cf, const Vec& x, const Vec& w,
                                    const Vec& z, const PwtdTol& tol = PwtdTol{});

// w with d f(x)(w) = <v, w>.
bool critical_cone_contains(const CompositeFunction& cf, const Vec& x, const Vec& v, const Vec& w,
                            const PwtdTol& tol = PwtdTol{});

// d^2 f(x)(w|z) = d^2 theta(F(x))(dF(x)(w) | F''(x;w,z)); never -inf.
ExtReal f_parabolic_subderivative(const CompositeFunction& cf, const Vec& x, const Vec& w,
                                  const Vec& z, const PwtdTol& tol = PwtdTol{});

// Certificate multiplier plus, on the Jacobian route, the exact polyhedral
// multiplier set {xi in subdiff theta(F(x)) : grad F(x) xi = v}.
MultiplierSet multiplier_set(const CompositeFunction& cf, const Vec& x, const Vec& v,
                             const PwtdTol& tol = PwtdTol{});

// Sampled membership check for a candidate multiplier: xi must lie in the
// outer subdifferential at F(x) and dominate v through the semiderivative,
// <xi, dF(x)(w')> >= <v, w'>, on seeded random directions. A full check is
// only possible on the Jacobian route; elsewhere this is the best available
// falsification test.
bool multiplier_candidate_valid(const CompositeFunction& cf, const Vec& x, const Vec& v,
                                const Vec& xi, int n_samples = 64, std::uint64_t seed = 42,
                                double tol = 1e-9);

// d^2 f(x|v)(w): +inf off the critical cone, otherwise the closed form
// d^2 theta(F(x))(dF(x)(w)) + d^2(xi_bar F)(x)(w). Refuses to answer when no
// regularity route is established and none is asserted.
ExtReal f_second_subderivative(const CompositeFunction& cf, const Vec& x, const Vec& v,
                               const Vec& w, bool assert_regularity = false,
                               const PwtdTol& tol = PwtdTol{});

// Evaluates both sides of the regularity identity at (x, v, w): the sampled
// infimum of sup_{u in A} <u, F''(x;w,z)> - <v,z> against the certificate
// curvature term, together with the upper/lower estimates of d^2 f(x|v)(w).
RegularityReport check_parabolic_regularity(const CompositeFunction& cf, const Vec& x,
                                            const Vec& v, const Vec& w,
                                            const SamplerConfig& cfg = SamplerConfig{},
                                            const PwtdTol& tol = PwtdTol{});

// Plain evaluator x |-> f(x) for driving the difference-quotient estimators.
// The membership tolerance matters for indicator-type composites and has a
// narrow workable window. Second-order quotients divide the slack by tau^2/2,
// so anything loose admits marginally infeasible samples with spurious
// values; but probes near a cone vertex evaluate at scale tau, where the
// last-ulp wobble of a genuinely-on-the-boundary point is ~1e-21, so an
// exactly-zero tolerance would evict the centered sample at random. The
// default sits between those scales.
std::function<ExtReal(const Vec&)> make_f_evaluatable(const CompositeFunction& cf,
                                                      double eps_act = 1e-19);

struct DualityGap {
  double primal_estimate = 0.0;
  ExtReal dual_value{0.0};
};

// Saddle value estimate for inf_z sup_{u in Omega} { <u, B z + c> - <vbar, z> }
// against its dual max { <u, c> : B^T u = vbar, u in Omega }. Omega must be
// bounded. The contract primal_estimate >= dual_value - tol is what tests pin.
DualityGap weak_duality_gap(const Mat& b, const Vec& c, const Vec& vbar, const Polyhedron& omega,
                            const SamplerConfig& cfg = SamplerConfig{});

}  // namespace epicalc
