#pragma once

#include <functional>

#include "epicalc/extreal.hpp"
#include "epicalc/linalg.hpp"

namespace epicalc {

struct PsdTol {
  double eps_psd = 1e-9;       // definiteness / complementarity slack
  double eps_rank_rel = 1e-10; // pseudoinverse cutoff, relative to ||x||_F
  double eps_crit = 1e-8;      // critical-cone membership slack
};

// Isometric flattening of a symmetric matrix: diagonal entries as-is,
// off-diagonal entries scaled by sqrt(2), so the Euclidean norm of the vector
// equals the Frobenius norm of the matrix. Used to drive vector-space
// estimators over matrix arguments.
Vec sym_to_vec(const Mat& s);
Mat vec_to_sym(const Vec& v, int n);
int sym_vec_dim(int n);

// Moore-Penrose pseudoinverse of a symmetric matrix by eigendecomposition,
// zeroing eigenvalues below cutoff (absolute).
Mat sym_pseudo_inverse(const Mat& s, double cutoff);

// Whether w lies in the critical cone of the negative semidefinite cone at
// (xbar, vbar): kernel-block compression of w is negative semidefinite and
// <vbar, w> = 0.
bool psd_critical_cone_contains(const Mat& xbar, const Mat& vbar, const Mat& w,
                                const PsdTol& tol = PsdTol{});

// Indicator of the negative semidefinite cone over the isometric vector
// embedding, for the difference-quotient estimators. The definiteness test is
// deliberately strict so that order-tau^2 boundary curvature is visible.
std::function<ExtReal(const Vec&)> make_psd_indicator_evaluatable(int n, double eps = 1e-13);

// Second subderivative of the indicator of the negative semidefinite cone at
// xbar for vbar in direction w: -2 <vbar, w * pinv(xbar) * w> on the critical
// cone, +inf off it. Requires xbar negative semidefinite and vbar a normal
// cone element (vbar positive semidefinite with <vbar, xbar> = 0); violations
// throw "not a subgradient".
ExtReal psd_second_subderivative(const Mat& xbar, const Mat& vbar, const Mat& w,
                                 const PsdTol& tol = PsdTol{});

}  // namespace epicalc
