#pragma once

#include <vector>

#include "epicalc/instances.hpp"
#include "epicalc/oracle.hpp"

// Seeded configuration generators backing the self-test battery and the
// verification suites. Everything here is deterministic given the Rng state.
namespace epicalc::testgen {

// Scalar penalty family descriptor, kept alongside generated instances so the
// verification code can re-derive values independently of the library path.
struct PenaltyParams {
  bool scad = true;
  double lambda = 1.0;
  double shape = 3.0;  // a for the quadratic-shoulder family, b for the other
};

// Random group penalty (SCAD or MCP scalar factor) with a random partition of
// [0, n), n <= max_n, and q drawn from the given set. Quotient-agreement
// sweeps pass {2, 3}: for q < 2 the q-norm Hessian is singular along the
// component axes, which puts generic points outside the curvature scale the
// fixed refinement schedule can certify.
GroupPenalty random_group_penalty(Rng& rng, int max_n = 8, PenaltyParams* params_out = nullptr,
                                  std::initializer_list<double> qs = {1.5, 2.0, 3.0});

// Independent high-precision evaluation of the group penalty (long double
// accumulation, penalty branches recoded from the closed forms). Used as the
// function handed to the quotient estimators so their noise floor sits well
// below the agreement tolerances.
std::function<ExtReal(const Vec&)> precise_group_eval(const GroupStructure& gs,
                                                      const PenaltyParams& params);

// Same, for the separable penalty sum over coordinates.
std::function<ExtReal(const Vec&)> precise_separable_eval(int m, const PenaltyParams& params);

// Point mixing zero blocks and blocks placed across the penalty regimes
// (inner linear piece, knots, concave shoulder, flat tail). min_norm_factor
// floors the active block norms (in units of lambda), bounding the local
// curvature for quotient comparisons.
Vec random_instance_point(Rng& rng, const GroupPenalty& gp, double min_norm_factor = 0.4);

struct CriticalTriple {
  Vec x, v, w;
};

// (x, v, w) with v a certified subgradient and w in the critical cone at
// (x, v); zero groups either freeze w or align the dual data with it.
CriticalTriple random_critical_triple(Rng& rng, const GroupPenalty& gp);

// Critical triple engineered for quotient comparisons: one focus group is
// placed on a curved penalty piece and probed radially or transversally so
// the closed second-order value has magnitude >= 0.25, while every other
// group sits in an exactly-cancelling state (zero-frozen or flat tail).
// Second-order quotients carry an eps*|f|/tau^2 rounding floor at the finest
// refinement level, so only such draws are resolvable at percent accuracy.
CriticalTriple resolvable_triple(Rng& rng, const GroupPenalty& gp, const PenaltyParams& params);

struct QconeConfig {
  CompositeFunction cf;
  int n = 3;
  double q = 2.0;
  enum class Case { Interior, OriginZeroDir, OriginRay, Boundary } which = Case::Interior;
  Vec x, v, w;
};

// Random q-order cone configuration with v in the normal cone and w critical.
// `allow_curved_boundary` admits boundary points with nonzero multiplier
// (whose oracle needs a curvature-sized sampling radius).
QconeConfig random_qcone_config(Rng& rng, bool allow_curved_boundary);

struct PsdConfig {
  int n = 3;
  Mat xbar, vbar, w;  // corank-1 critical configuration
};

PsdConfig random_psd_config(Rng& rng, int n);

// Small random polyhedron anchored at a feasible point, with a chosen number
// of rows active there. Normals are unit vectors; offsets keep y0 feasible.
struct AnchoredPolyhedron {
  Polyhedron poly;
  Vec anchor;
};
AnchoredPolyhedron random_polyhedron(Rng& rng, int dim, int rows, int active_rows);

// Direction whose active-row inner products are bounded away from the
// decision threshold, so numeric distance probes are unambiguous.
Vec random_clear_direction(Rng& rng, const Polyhedron& poly, const Vec& anchor);

// Separable penalty over R^m with a valid subgradient at y, plus a direction
// aligned with the critical cone on a random subset of coordinates.
struct PwtdQuery {
  PwtdFunction psi;
  PenaltyParams params;
  double lambda = 0.0;
  Vec y, v, w;
};
PwtdQuery random_pwtd_query(Rng& rng, int max_m = 4);

// Random bounded polytope (box plus extra cuts) with matching LP data for the
// duality-gap checks; vbar is drawn feasible half of the time.
struct LpConfig {
  Mat b;
  Vec c, vbar;
  Polyhedron omega;
};
LpConfig random_lp_config(Rng& rng);

}  // namespace epicalc::testgen
