#pragma once

#include <vector>

#include "epicalc/extreal.hpp"
#include "epicalc/linalg.hpp"

namespace epicalc {

// Default tolerances for activity detection and direction tests. Shipped
// instances use exact rational-like data, so these can stay tight. Both are
// overridable per call (and from the CLI).
struct PolyTol {
  double eps_act = 1e-9;  // |a.y - b| <= eps_act counts as active
  double eps_dir = 1e-10; // direction tests a.w <= eps_dir
};

struct HalfSpace {
  Vec normal;     // a
  double offset;  // b, meaning a.y <= b
};

struct HyperPlane {
  Vec normal;     // e
  double offset;  // d, meaning e.y == d
};

// Convex polyhedron in H-representation: {y : a_j.y <= b_j, e_j.y == d_j}.
// Rows are never rewritten after construction; duplicated rows are permitted.
struct Polyhedron {
  int dim = 0;
  std::vector<HalfSpace> ineqs;
  std::vector<HyperPlane> eqs;

  Polyhedron() = default;
  explicit Polyhedron(int d) : dim(d) {}

  Polyhedron& add_ineq(Vec a, double b);
  Polyhedron& add_eq(Vec e, double d);

  // Whole space of a given dimension.
  static Polyhedron full(int d) { return Polyhedron(d); }
  // Interval [lo, hi] on the real line; +-inf endpoints simply omit the row.
  static Polyhedron interval(double lo, double hi);
  // Box given per-coordinate [lo_i, hi_i]; infinite endpoints omitted.
  static Polyhedron box(const Vec& lo, const Vec& hi);
};

struct ActiveSet {
  Vec point;
  std::vector<std::size_t> active_ineq;
  std::size_t eq_count = 0;
};

bool contains(const Polyhedron& p, const Vec& y, double eps_act = PolyTol{}.eps_act);

ActiveSet active_set(const Polyhedron& p, const Vec& y, double eps_act = PolyTol{}.eps_act);

// w in T_P(y): active inequality rows satisfy a.w <= eps_dir, equalities e.w == 0.
// Throws "point outside set" when y is not in P.
bool tangent_cone_contains(const Polyhedron& p, const Vec& y, const Vec& w,
                           const PolyTol& tol = PolyTol{});

// z in T^2_P(y, w): rows active at y with a.w == 0 must satisfy a.z <= eps_dir.
// Preconditions: y in P and w in T_P(y); violations throw.
bool second_tangent_contains(const Polyhedron& p, const Vec& y, const Vec& w, const Vec& z,
                             const PolyTol& tol = PolyTol{});

// The tangent cone at y, materialized as a Polyhedron (rows from the active set).
Polyhedron tangent_cone_at(const Polyhedron& p, const Vec& y, const PolyTol& tol = PolyTol{});

// The second-order tangent set at (y, w), materialized (a cone for polyhedra).
Polyhedron second_tangent_cone_at(const Polyhedron& p, const Vec& y, const Vec& w,
                                  const PolyTol& tol = PolyTol{});

// All vertices (basic feasible points), deduplicated. Requires dim <= 8 and a
// bounded set; otherwise throws "vertex enumeration unsupported".
std::vector<Vec> vertices(const Polyhedron& p, double eps_act = PolyTol{}.eps_act);

// Basic feasible points without the boundedness guard (used internally and by
// the LP-by-enumeration helpers). Empty result does not imply an empty set.
std::vector<Vec> basic_points(const Polyhedron& p, double feas_tol = 1e-7);

// Unit representatives of recession directions, found by enumerating the
// vertices of rec(P) intersected with the unit box. Empty iff P is bounded.
std::vector<Vec> recession_rays(const Polyhedron& p);

bool is_bounded(const Polyhedron& p);

// Emptiness probe: searches for a feasible point inside a large box.
bool is_empty_probe(const Polyhedron& p, double box_radius = 1e4);

// sup { c.u : u in P } by enumeration: +inf when a recession ray improves c,
// -inf when P appears empty, otherwise the max over basic feasible points of
// P intersected with a safety box.
ExtReal sup_linear(const Polyhedron& p, const Vec& c, double box_radius = 1e3);

// inf { g.z : z in C } for a polyhedral cone C: either 0 or -inf.
ExtReal inf_linear_over_cone(const Polyhedron& cone, const Vec& g);

// Euclidean distance from y to P, exact at desk scale via projection onto
// every face (active-set enumeration). Throws if the row count is too large.
double distance_to(const Polyhedron& p, const Vec& y);

}  // namespace epicalc
