#pragma once

#include <vector>

#include "epicalc/composite.hpp"
#include "epicalc/psd_cone.hpp"

namespace epicalc {

// Folded-concave scalar penalty parameters. Knots at lambda and a*lambda.
struct ScadParams {
  double lambda = 1.0;
  double a = 3.0;
};

// Knot at lambda*b.
struct McpParams {
  double lambda = 1.0;
  double b = 2.0;
};

// Scalar SCAD penalty as a six-piece function on R (constant tails, concave
// quadratic shoulders, linear core split at the origin). Ships with its
// subdifferential description ([-lambda, lambda] at 0, singleton elsewhere)
// and the regularity flag set.
PwtdFunction scad_scalar(const ScadParams& p);

// Scalar MCP penalty, four pieces.
PwtdFunction mcp_scalar(const McpParams& p);

// Piecewise linear clamp t |-> max{0, min{1, t}}; three pieces, not regular
// at the upper knee. Exercises the pathological second-order cases.
PwtdFunction ramp_clamp();

// lambda recovered from the declared subdifferential at the origin.
double penalty_lambda(const PwtdFunction& rho);
// One-sided derivative d rho(t)(+1); equals rho'(t) wherever rho is smooth.
double penalty_derivative(const PwtdFunction& rho, double t);

// theta(z) = sum_i rho(z_i) over R^m with lazily enumerated product pieces;
// a query point only ever touches the locally active index tuples.
PwtdFunction separable_sum(const PwtdFunction& rho_scalar, int m);

// Indicator of the nonpositive orthant with its normal-cone subdifferential.
PwtdFunction orthant_indicator(int m);

// Group penalty instance: f(x) = sum_i rho(||x_{J_i}||_q).
struct GroupPenalty {
  CompositeFunction cf;
  GroupStructure gs;
  double lambda = 0.0;
  PwtdFunction rho;
};

// Validates the scalar penalty contract (rho(0) = 0, declared subdifferential
// [-lambda, lambda] at 0 matching the pieces, regularity) before assembling.
GroupPenalty group_penalty(const PwtdFunction& rho, const GroupStructure& gs);

// Assembles a subgradient of the group penalty at x from per-group data: for
// zero groups v_{J_i} = eta_i * zeta_i with eta_i in [-lambda, lambda] and
// ||zeta_i||_p <= 1 (= 1 when eta_i < 0); active groups are forced to the
// smooth value. Violated side conditions throw "not a valid subgradient
// recipe". zeta entries for active groups are ignored.
Vec subgradient_factory_type1(const GroupPenalty& gp, const Vec& x, const Vec& eta,
                              const std::vector<Vec>& zeta, double eps_sub = 1e-8);

// One-directional certificate that v satisfies the necessary subgradient
// conditions at x (exact smooth values on active groups, dual-norm bound on
// zero groups).
bool validate_subgradient_type1(const GroupPenalty& gp, const Vec& x, const Vec& v,
                                double eps_sub = 1e-8);

// Indicator of the q-order cone {(x1, x2) : ||x2||_q <= x1} as a composite.
CompositeFunction qcone_indicator(int n, double q);

struct ConeBlock {
  int n = 3;
  double q = 2.0;
};

// Indicator of a Cartesian product of q-order cones; second subderivatives
// decompose blockwise.
CompositeFunction cone_product(const std::vector<ConeBlock>& blocks);

// Composite with a twice differentiable inner map. The caller asserts the
// constraint qualification and the subdifferential inclusion at query points
// by invoking this builder.
CompositeFunction smooth_composite(PwtdFunction theta, InnerMap inner);

// Negative semidefinite cone instance (matrix domain); routes to the
// closed-form second subderivative with its critical-cone test.
struct PsdConeInstance {
  int n = 0;
  bool critical_contains(const Mat& xbar, const Mat& vbar, const Mat& w) const;
  ExtReal second_subderivative(const Mat& xbar, const Mat& vbar, const Mat& w) const;
};
PsdConeInstance psd_cone_instance(int n);

}  // namespace epicalc
