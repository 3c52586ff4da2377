#include "epicalc/selftest.hpp"

#include <cmath>
#include <functional>
#include <iostream>
#include <sstream>
#include <vector>

#include "epicalc/composite.hpp"
#include "epicalc/instances.hpp"
#include "epicalc/oracle.hpp"
#include "epicalc/polynomial.hpp"
#include "epicalc/psd_cone.hpp"
#include "epicalc/testgen.hpp"

namespace epicalc {

namespace {

struct CheckFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require(bool cond, const std::string& msg) {
  if (!cond) throw CheckFailure(msg);
}

void require_close(double got, double want, double tol, const std::string& what) {
  if (std::abs(got - want) > tol)
    throw CheckFailure(what + ": got " + std::to_string(got) + ", want " + std::to_string(want));
}

void require_ext(const ExtReal& got, const ExtReal& want, double tol, const std::string& what) {
  if (!ext_close(got, want, tol))
    throw CheckFailure(what + ": got " + got.str() + ", want " + want.str());
}

using CheckFn = std::function<void(std::uint64_t)>;

struct Check {
  std::string name;
  CheckFn fn;
};

// ---------------------------------------------------------------- polyhedra

void check_poly_membership(std::uint64_t) {
  Polyhedron half = Polyhedron::interval(-INFINITY, 0.0);
  require(contains(half, {0.0}), "0 on the boundary of t<=0");
  Polyhedron unit = Polyhedron::interval(0.0, 1.0);
  require(!contains(unit, {1.5}), "1.5 outside [0,1]");
  Polyhedron tri(2);
  tri.add_ineq({1.0, 1.0}, 1.0).add_ineq({-1.0, 0.0}, 0.0).add_ineq({0.0, -1.0}, 0.0);
  require(contains(tri, {0.5, 0.5}), "(.5,.5) on the simplex boundary");
}

void check_poly_tangent(std::uint64_t) {
  Polyhedron unit = Polyhedron::interval(0.0, 1.0);
  require(tangent_cone_contains(unit, {1.0}, {-1.0}), "inward direction at 1");
  require(!tangent_cone_contains(unit, {1.0}, {1.0}), "outward direction at 1");
  Polyhedron tri(2);
  tri.add_ineq({1.0, 1.0}, 1.0).add_ineq({-1.0, 0.0}, 0.0).add_ineq({0.0, -1.0}, 0.0);
  Vec y{0.5, 0.5}, w{1.0, -1.0};
  require(tangent_cone_contains(tri, y, w), "slide along the diagonal facet");
  for (double tau : {1e-2, 1e-3, 1e-4, 1e-5, 1e-6})
    require(distance_to(tri, axpy(y, tau, w)) <= 1e-9 * tau, "distance probe o(tau)");
  bool threw = false;
  try {
    tangent_cone_contains(unit, {2.0}, {1.0});
  } catch (const std::exception&) {
    threw = true;
  }
  require(threw, "tangent cone query at an outside point must throw");
}

void check_poly_second_tangent(std::uint64_t) {
  Polyhedron unit = Polyhedron::interval(0.0, 1.0);
  require(second_tangent_contains(unit, {1.0}, {-1.0}, {17.0}), "strict direction frees z");
  require(second_tangent_contains(unit, {1.0}, {0.0}, {-1.0}), "z=-1 stays");
  require(!second_tangent_contains(unit, {1.0}, {0.0}, {1.0}), "z=+1 leaves");
  Polyhedron quad(2);
  quad.add_ineq({1.0, 0.0}, 0.0).add_ineq({0.0, 1.0}, 0.0);
  Vec y{0.0, -1.0}, w{0.0, 1.0}, z{-3.0, 7.0};
  require(second_tangent_contains(quad, y, w, z), "orthant second-order example");
  for (double tau : {1e-2, 1e-3, 1e-4})
    require(distance_to(quad, axpy(axpy(y, tau, w), 0.5 * tau * tau, z)) <= 1e-9 * tau * tau,
            "parabolic distance probe o(tau^2)");
}

void check_poly_vertices(std::uint64_t) {
  auto vs = vertices(Polyhedron::interval(0.0, 1.0));
  require(vs.size() == 2, "two interval endpoints");
  auto vl = vertices(Polyhedron::interval(-1.0, 1.0));
  require(vl.size() == 2, "two symmetric endpoints");
  Polyhedron tri(2);
  tri.add_ineq({-1.0, 0.0}, 0.0).add_ineq({0.0, -1.0}, 0.0).add_ineq({1.0, 1.0}, 1.0);
  require(vertices(tri).size() == 3, "unit simplex has three vertices");
  bool threw = false;
  try {
    vertices(Polyhedron::interval(0.0, INFINITY));
  } catch (const std::exception&) {
    threw = true;
  }
  require(threw, "unbounded vertex enumeration must throw");
}

void check_poly_cone_property(std::uint64_t seed) {
  Rng rng(seed);
  for (int rep = 0; rep < 25; ++rep) {
    auto ap = testgen::random_polyhedron(rng, 2 + static_cast<int>(rng.next_u64() % 2), 4, 2);
    Vec w = testgen::random_clear_direction(rng, ap.poly, ap.anchor);
    require(tangent_cone_contains(ap.poly, ap.anchor, Vec(ap.poly.dim, 0.0)),
            "zero direction always tangent");
    bool base = tangent_cone_contains(ap.poly, ap.anchor, w);
    for (double t : {0.5, 2.0, 10.0})
      require(tangent_cone_contains(ap.poly, ap.anchor, scale(t, w)) == base,
              "tangent cone closed under positive scaling");
  }
}

void check_poly_sampling_consistency(std::uint64_t seed) {
  Rng rng(seed);
  for (int rep = 0; rep < 100; ++rep) {
    auto ap = testgen::random_polyhedron(rng, 2, 4, 2);
    Vec w = testgen::random_clear_direction(rng, ap.poly, ap.anchor);
    bool in_cone = tangent_cone_contains(ap.poly, ap.anchor, w);
    double finest = 1e-6;
    double d = distance_to(ap.poly, axpy(ap.anchor, finest, w));
    if (in_cone)
      require(d <= 1e-8 * finest + 1e-14, "tangent direction must have vanishing distance");
    else
      require(d / finest > 1e-4, "non-tangent direction must have linear-order distance");
  }
}

void check_poly_second_tangent_is_tangent_of_cone(std::uint64_t seed) {
  Rng rng(seed);
  for (int rep = 0; rep < 25; ++rep) {
    auto ap = testgen::random_polyhedron(rng, 2, 4, 2);
    Vec w = testgen::random_clear_direction(rng, ap.poly, ap.anchor);
    if (!tangent_cone_contains(ap.poly, ap.anchor, w)) continue;
    Polyhedron cone = tangent_cone_at(ap.poly, ap.anchor);
    Vec z = rng.gaussian_vec(ap.poly.dim);
    bool direct = second_tangent_contains(ap.poly, ap.anchor, w, z);
    bool via_cone = tangent_cone_contains(cone, w, z);
    require(direct == via_cone, "second-order tangent set = tangent cone of the tangent cone");
  }
}

// --------------------------------------------------------------------- pwtd

void check_pwtd_clamp_goldens(std::uint64_t) {
  PwtdFunction h = ramp_clamp();
  require_ext(eval(h, {0.5}), ExtReal(0.5), 0.0, "clamp value at 0.5");
  require_ext(subderivative(h, {1.0}, {-2.0}), ExtReal(-2.0), 0.0, "left slope at 1");
  require_ext(subderivative(h, {1.0}, {3.0}), ExtReal(0.0), 0.0, "right slope at 1");
  IndexSets s = index_sets(h, {1.0}, {-1.0});
  require(s.j_y == std::vector<std::size_t>({1, 2}), "active pieces at 1");
  require(s.j_yw == std::vector<std::size_t>({1}), "left move selects the middle piece");
  IndexSets s2 = index_sets(h, {1.0}, {1.0});
  require(s2.j_yw == std::vector<std::size_t>({2}), "right move selects the flat piece");
  require_ext(second_subderivative_plain(h, {1.0}, {-1.0}), ExtReal(0.0), 0.0,
              "linear piece has no curvature");
  require_ext(parabolic_subderivative(h, {1.0}, {-1.0}, {5.0}), ExtReal(5.0), 1e-15,
              "parabolic value rides the middle gradient");
  require_ext(parabolic_subderivative(h, {1.0}, {0.0}, {1.0}), ExtReal(0.0), 0.0,
              "z=+1 at the knee lands in the flat piece");
  bool threw = false;
  try {
    second_subderivative(h, {1.0}, {1.0}, {1.0});
  } catch (const std::exception&) {
    threw = true;
  }
  require(threw, "non-regular point must be rejected");
}

void check_pwtd_scad_goldens(std::uint64_t) {
  PwtdFunction scad = scad_scalar({1.0, 3.0});
  require_ext(eval(scad, {0.0}), ExtReal(0.0), 0.0, "penalty vanishes at 0");
  require_ext(eval(scad, {0.5}), ExtReal(0.5), 1e-15, "linear branch");
  require_ext(eval(scad, {2.0}), ExtReal(1.75), 1e-15, "quadratic branch");
  require_ext(eval(scad, {4.0}), ExtReal(2.0), 1e-15, "flat tail");
  require_ext(second_subderivative_plain(scad, {2.0}, {1.0}), ExtReal(-0.5), 1e-15,
              "shoulder curvature -1/(a-1)");
  require_ext(second_subderivative(scad, {0.0}, {1.0}, {1.0}), ExtReal(0.0), 0.0,
              "critical direction at the origin");
  require_ext(second_subderivative(scad, {0.0}, {0.0}, {1.0}), ExtReal::pos_inf(), 0.0,
              "non-critical direction blows up");
  PwtdFunction ind = orthant_indicator(1);
  require_ext(eval(ind, {1.0}), ExtReal::pos_inf(), 0.0, "indicator outside");
  require_ext(subderivative(ind, {0.0}, {1.0}), ExtReal::pos_inf(), 0.0,
              "leaving direction has +inf slope");
  require_ext(eval(separable_sum(scad, 2), {0.0, 0.0}), ExtReal(0.0), 0.0,
              "separable sum vanishes at the origin");
}

void check_pwtd_active_multipliers(std::uint64_t) {
  PwtdFunction scad = scad_scalar({1.0, 3.0});
  Polyhedron a0 = active_multipliers(scad, {0.0}, {0.0});
  auto v0 = vertices(a0);
  require(v0.size() == 2, "full interval at w=0");
  Polyhedron a1 = active_multipliers(scad, {0.0}, {1.0});
  auto v1 = vertices(a1);
  require(v1.size() == 1 && std::abs(v1[0][0] - 1.0) < 1e-12, "w=1 pins the upper end");
  PwtdFunction ind = orthant_indicator(1);
  Polyhedron a2 = active_multipliers(ind, {0.0}, {-1.0});
  auto v2 = vertices(a2);
  require(v2.size() == 1 && std::abs(v2[0][0]) < 1e-12, "inward direction pins 0");
  require_ext(parabolic_conjugate_value(scad, {0.0}, {0.0}, {1.0}), ExtReal(0.0), 0.0,
              "conjugate on the active set");
  require_ext(parabolic_conjugate_value(scad, {0.0}, {1.0}, {0.0}), ExtReal::pos_inf(), 0.0,
              "conjugate off the active set");
}

void check_pwtd_regularity_witness(std::uint64_t) {
  PwtdFunction scad = scad_scalar({1.0, 3.0});
  auto w1 = pwtd_parabolic_regularity_witness(scad, {0.0}, {1.0}, {1.0});
  require_ext(w1.lhs, w1.rhs, 1e-12, "witness at the origin");
  require_ext(w1.rhs, ExtReal(0.0), 0.0, "flat value at the origin");
  auto w2 = pwtd_parabolic_regularity_witness(scad, {2.0}, {0.5}, {1.0});
  require_ext(w2.lhs, w2.rhs, 1e-12, "witness on the shoulder");
  require_ext(w2.rhs, ExtReal(-0.5), 1e-15, "shoulder curvature");
  PwtdFunction ind = orthant_indicator(1);
  auto w3 = pwtd_parabolic_regularity_witness(ind, {0.0}, {0.0}, {0.0});
  require_ext(w3.lhs, w3.rhs, 0.0, "indicator witness");
  require_ext(w3.rhs, ExtReal(0.0), 0.0, "indicator value");
}

void check_pwtd_homogeneity(std::uint64_t seed) {
  Rng rng(seed);
  for (int rep = 0; rep < 30; ++rep) {
    auto q = testgen::random_pwtd_query(rng);
    ExtReal d1 = subderivative(q.psi, q.y, q.w);
    ExtReal d2 = second_subderivative_plain(q.psi, q.y, q.w);
    for (double t : {0.5, 2.0, 10.0}) {
      require_ext(subderivative(q.psi, q.y, scale(t, q.w)), d1.scaled(t), 1e-9,
                  "degree-1 homogeneity");
      require_ext(second_subderivative_plain(q.psi, q.y, scale(t, q.w)), d2.scaled(t * t), 1e-9,
                  "degree-2 homogeneity");
    }
  }
}

void check_pwtd_decomposition(std::uint64_t seed) {
  Rng rng(seed);
  for (int rep = 0; rep < 60; ++rep) {
    auto q = testgen::random_pwtd_query(rng);
    ExtReal with_v = second_subderivative(q.psi, q.y, q.v, q.w);
    ExtReal plain = second_subderivative_plain(q.psi, q.y, q.w);
    ExtReal d1 = subderivative(q.psi, q.y, q.w);
    double vw = dot(q.v, q.w);
    bool critical = d1.is_finite() && std::abs(d1.value() - vw) <= 1e-8 * (1.0 + std::abs(vw));
    ExtReal expected = critical ? plain : ExtReal::pos_inf();
    require(with_v == expected, "second subderivative = plain + critical-cone gate");
  }
}

void check_pwtd_sum_rule(std::uint64_t seed) {
  Rng rng(seed);
  for (int rep = 0; rep < 60; ++rep) {
    auto q = testgen::random_pwtd_query(rng);
    ExtReal d1 = subderivative(q.psi, q.y, q.w);
    if (!d1.is_finite()) continue;
    Vec z = rng.gaussian_vec(q.psi.dim());
    ExtReal direct = parabolic_subderivative(q.psi, q.y, q.w, z);
    PwtdFunction dpsi = materialize_subderivative(q.psi, q.y);
    ExtReal plain = second_subderivative_plain(q.psi, q.y, q.w);
    ExtReal via_sum = plain + subderivative(dpsi, q.w, z);
    require(direct == via_sum, "parabolic = plain + subderivative of the materialized slope");
    require_ext(parabolic_subderivative(q.psi, q.y, q.w, Vec(q.psi.dim(), 0.0)), plain, 0.0,
                "z=0 recovers the plain second form");
  }
}

// --------------------------------------------------------------- inner maps

void check_maps_group_qnorm(std::uint64_t) {
  GroupStructure gs{{{0, 1}}, 2.0};
  InnerMap f = group_qnorm_map(gs);
  Vec g = qnorm_gradient({3.0, 4.0}, 2.0);
  require_close(g[0], 0.6, 1e-15, "gradient first coordinate");
  require_close(g[1], 0.8, 1e-15, "gradient second coordinate");
  require_close(dot(g, {3.0, 4.0}), 5.0, 1e-12, "Euler identity");
  require_close(f.semiderivative({0.0, 0.0}, {3.0, 4.0})[0], 5.0, 1e-12, "slope at the origin");
  require_close(f.parabolic({0.0, 0.0}, {0.0, 0.0}, {0.0, 1.0})[0], 1.0, 1e-12,
                "parabolic norm case");
  InnerMap qc = qcone_residual_map(3, 2.0);
  require_close(qc.value({1.0, 0.0, 1.0})[0], 0.0, 1e-15, "cone boundary residual");
  require_close(qc.semiderivative({0.0, 0.0, 0.0}, {1.0, 1.0, 0.0})[0], 0.0, 1e-15,
                "origin slope");
  require_close(qc.parabolic({0.0, 0.0, 0.0}, {0.0, 0.0, 0.0}, {2.0, 1.0, 1.0})[0],
                std::sqrt(2.0) - 2.0, 1e-12, "origin parabolic residual");
}

void check_maps_smooth(std::uint64_t) {
  auto value = [](const Vec& x) { return Vec{x[0] * x[0], x[0] * x[1]}; };
  auto jac = [](const Vec& x) {
    Mat j(2, 2);
    j(0, 0) = 2.0 * x[0];
    j(1, 0) = x[1];
    j(1, 1) = x[0];
    return j;
  };
  auto hess = [](const Vec&) {
    std::vector<Mat> hs(2, Mat(2, 2));
    hs[0](0, 0) = 2.0;
    hs[1](0, 1) = hs[1](1, 0) = 1.0;
    return hs;
  };
  InnerMap f = smooth_map(2, 2, value, jac, hess, {{0.3, -0.7}, {1.1, 0.4}});
  Vec d = f.semiderivative({1.0, 2.0}, {1.0, 0.0});
  require_close(d[0], 2.0, 1e-12, "Jacobian row 1");
  require_close(d[1], 2.0, 1e-12, "Jacobian row 2");
  Vec p = f.parabolic({1.0, 2.0}, {1.0, 0.0}, {0.0, 0.0});
  require_close(p[0], 2.0, 1e-12, "curvature component 1");
  require_close(p[1], 0.0, 1e-12, "curvature component 2");
  require_close(f.scalarized_second({1.0, 1.0}, {1.0, 2.0}, {1.0, 0.0}), 2.0, 1e-12,
                "scalarized curvature");
}

void check_maps_parabola_expansion(std::uint64_t seed) {
  Rng rng(seed);
  for (int rep = 0; rep < 20; ++rep) {
    GroupStructure gs{{{0, 1}, {2}}, rep % 2 == 0 ? 2.0 : 3.0};
    InnerMap f = group_qnorm_map(gs);
    // Unit-scale probes: the remainder constant grows with ||z||^3, and the
    // o(tau^2) property is scale-free anyway.
    auto unit = [&](Vec v) { return scale(1.0 / std::max(norm2(v), 1e-9), v); };
    Vec x = unit(rng.gaussian_vec(3)), w = unit(rng.gaussian_vec(3)), z = unit(rng.gaussian_vec(3));
    if (rep % 3 == 0) {
      x[0] = x[1] = 0.0;  // park one group at the origin
      if (rep % 2 == 1) w[0] = w[1] = 0.0;
    }
    Vec fx = f.value(x), dfw = f.semiderivative(x, w), snd = f.parabolic(x, w, z);
    double first = 0.0, last = 0.0;
    for (double tau : {1e-1, 1e-2, 1e-3, 1e-4}) {
      Vec probe = f.value(axpy(axpy(x, tau, w), 0.5 * tau * tau, z));
      Vec model = axpy(axpy(fx, tau, dfw), 0.5 * tau * tau, snd);
      double resid = norm2(sub(probe, model)) / (tau * tau);
      if (tau == 1e-1) first = resid;
      last = resid;
    }
    require(last <= std::max(1e-3, 0.02 * first), "parabolic remainder must shrink at o(tau^2)");
    for (double t : {0.5, 2.0, 10.0}) {
      Vec scaled = f.semiderivative(x, scale(t, w));
      require_close(norm2(sub(scaled, scale(t, dfw))), 0.0, 1e-9, "semiderivative homogeneity");
    }
  }
}

void check_maps_psd(std::uint64_t seed) {
  Mat xb(3, 3), vb(3, 3), w(3, 3);
  xb(1, 1) = -1.0;
  xb(2, 2) = -2.0;
  vb(0, 0) = 1.0;
  w(0, 1) = w(1, 0) = 1.0;
  require_ext(psd_second_subderivative(xb, vb, w), ExtReal(2.0), 1e-10, "kernel coupling value");
  require_ext(psd_second_subderivative(xb, Mat(3, 3), w), ExtReal(0.0), 1e-12,
              "zero multiplier kills the form");
  Mat z3(3, 3), wneg(3, 3);
  wneg(1, 1) = -2.0;
  wneg(2, 2) = -1.0;
  require_ext(psd_second_subderivative(z3, vb, wneg), ExtReal(0.0), 1e-12,
              "zero matrix has zero pseudoinverse");

  Rng rng(seed);
  auto cfg = testgen::random_psd_config(rng, 3);
  ExtReal base = psd_second_subderivative(cfg.xbar, cfg.vbar, cfg.w);
  require(base.is_finite() && base.value() >= -1e-10, "nonnegative on the critical cone");
  for (double t : {0.5, 2.0, 10.0}) {
    Mat tw = cfg.w;
    for (auto& e : tw.a) e *= t;
    require_ext(psd_second_subderivative(cfg.xbar, cfg.vbar, tw), base.scaled(t * t), 1e-8,
                "degree-2 homogeneity in w");
  }
}

// ---------------------------------------------------------------- composite

GroupPenalty golden_group_scad() {
  return group_penalty(scad_scalar({1.0, 3.0}), GroupStructure{{{0, 1}, {2, 3}}, 2.0});
}

void check_composite_goldens(std::uint64_t) {
  GroupPenalty gp = golden_group_scad();
  Vec x{0.0, 0.0, 3.0, 4.0};
  require_ext(f_eval(gp.cf, x), ExtReal(2.0), 1e-15, "flat-tail group value");
  require_ext(f_subderivative(gp.cf, x, {3.0, 4.0, 0.0, 0.0}), ExtReal(5.0), 1e-12,
              "zero-group slope");
  require_ext(f_subderivative(gp.cf, x, Vec(4, 0.0)), ExtReal(0.0), 0.0, "zero direction");
  Vec v(4, 0.0);
  require(validate_subgradient_type1(gp, x, v), "zero vector is a certified subgradient here");
  require(critical_cone_contains(gp.cf, x, v, {0.0, 0.0, 1.0, 0.0}), "active-group direction");
  require(!critical_cone_contains(gp.cf, x, v, {1.0, 0.0, 0.0, 0.0}), "zero-group escape");
  require_ext(f_second_subderivative(gp.cf, x, v, {0.0, 0.0, 1.0, 0.0}), ExtReal(0.0), 1e-12,
              "flat-tail second subderivative");
  require_ext(f_second_subderivative(gp.cf, x, v, {1.0, 0.0, 0.0, 0.0}), ExtReal::pos_inf(), 0.0,
              "off the critical cone");
  Vec xi = gp.cf.multiplier_candidate(x, v);
  require_close(xi[0], 1.0, 1e-12, "zero group takes lambda");
  require_close(xi[1], 0.0, 1e-12, "flat tail takes slope 0");
  require_ext(f_parabolic_subderivative(gp.cf, x, {0.0, 0.0, 1.0, 0.0}, Vec(4, 0.0)),
              ExtReal(0.0), 1e-12, "parabolic along the tail");
}

void check_composite_qcone_goldens(std::uint64_t) {
  CompositeFunction qc = qcone_indicator(3, 2.0);
  require_ext(f_eval(qc, {1.0, 0.6, 0.8}), ExtReal(0.0), 0.0, "boundary point");
  require_ext(f_eval(qc, {0.5, 1.0, 0.0}), ExtReal::pos_inf(), 0.0, "outside point");
  require(domain_tangent_contains(qc, Vec(3, 0.0), {1.0, 0.0, 0.0}), "axis ray");
  require(!domain_tangent_contains(qc, Vec(3, 0.0), {-1.0, 0.0, 0.0}), "reverse axis ray");
  require_ext(f_subderivative(qc, Vec(3, 0.0), {1.0, 1.0, 0.0}), ExtReal(0.0), 0.0,
              "boundary ray slope");
  Vec v{-1.0, 1.0, 0.0}, w{1.0, 1.0, 0.0};
  require(critical_cone_contains(qc, Vec(3, 0.0), v, w), "aligned boundary ray is critical");
  require_ext(f_second_subderivative(qc, Vec(3, 0.0), v, w), ExtReal(0.0), 1e-12,
              "origin ray value");
  SamplerConfig cfg;
  RegularityReport rep = check_parabolic_regularity(qc, Vec(3, 0.0), v, w, cfg);
  require(rep.pass, "origin ray regularity");
  require_ext(rep.lhs, ExtReal(0.0), 1e-9, "lhs");
  require_ext(rep.rhs, ExtReal(0.0), 1e-12, "rhs");
  RegularityReport degen =
      check_parabolic_regularity(qc, Vec(3, 0.0), Vec(3, 0.0), Vec(3, 0.0), cfg);
  require(degen.pass && degen.lhs == ExtReal(0.0) && degen.rhs == ExtReal(0.0),
          "degenerate data stays at zero");
}

void check_composite_regularity_random(std::uint64_t seed) {
  Rng rng(seed);
  for (int rep = 0; rep < 10; ++rep) {
    GroupPenalty gp = testgen::random_group_penalty(rng, 6);
    auto t = testgen::random_critical_triple(rng, gp);
    SamplerConfig cfg;
    cfg.seed = seed + rep;
    cfg.n_samples = 32;
    RegularityReport r = check_parabolic_regularity(gp.cf, t.x, t.v, t.w, cfg);
    require(r.pass, "sampled identity verdict");
    require(r.lhs.value() >= r.rhs.value() - 1e-6, "sampler never undercuts the certificate");
    ExtReal d2 = f_second_subderivative(gp.cf, t.x, t.v, t.w);
    require(r.lower <= d2 + ExtReal(1e-9) && d2 <= r.upper + ExtReal(1e-9),
            "estimates sandwich the closed form");
  }
}

void check_composite_smooth(std::uint64_t) {
  // Identity inner map: the composite collapses to the outer function.
  PwtdFunction theta = separable_sum(scad_scalar({1.0, 3.0}), 2);
  auto value = [](const Vec& x) { return x; };
  auto jac = [](const Vec& x) { return Mat::identity(static_cast<int>(x.size())); };
  auto hess = [](const Vec& x) { return std::vector<Mat>(x.size(), Mat(static_cast<int>(x.size()), static_cast<int>(x.size()))); };
  CompositeFunction cf =
      smooth_composite(theta, smooth_map(2, 2, value, jac, hess, {{0.4, -0.2}}));
  Vec y{0.0, 2.0};
  Vec v{1.0, penalty_derivative(scad_scalar({1.0, 3.0}), 2.0)};
  Vec w{1.0, 1.0};
  ExtReal direct = second_subderivative(theta, y, v, w);
  ExtReal composed = f_second_subderivative(cf, y, v, w);
  require(direct == composed, "identity composition reduces to the outer calculus");

  // Scalar constraint x1^2 + x2 - 1 <= 0 at (0, 1) with unit multiplier.
  Polynomial p;
  p.dim = 2;
  p.terms = {{1.0, {2, 0}}, {1.0, {0, 1}}, {-1.0, {0, 0}}};
  auto pv = [p](const Vec& x) { return Vec{p.value(x)}; };
  auto pj = [p](const Vec& x) {
    Vec g = p.gradient(x);
    Mat j(1, 2);
    j(0, 0) = g[0];
    j(0, 1) = g[1];
    return j;
  };
  auto ph = [p](const Vec& x) { return std::vector<Mat>{p.hessian(x)}; };
  CompositeFunction con =
      smooth_composite(orthant_indicator(1), smooth_map(2, 1, pv, pj, ph, {{0.1, 0.2}}));
  Vec xbar{0.0, 1.0}, vbar{0.0, 1.0};
  require(critical_cone_contains(con, xbar, vbar, {1.0, 0.0}), "w2=0 is critical");
  ExtReal d2 = f_second_subderivative(con, xbar, vbar, {2.0, 0.0});
  require_ext(d2, ExtReal(8.0), 1e-10, "2 w1^2 at w1=2");
}

void check_weak_duality(std::uint64_t seed) {
  Mat b = Mat::identity(1);
  auto gap = weak_duality_gap(b, {0.0}, {0.0}, Polyhedron::interval(-1.0, 1.0));
  require_ext(gap.dual_value, ExtReal(0.0), 1e-12, "identity dual");
  require(gap.primal_estimate >= -1e-9, "identity primal");
  Polyhedron point(1);
  point.add_eq({1.0}, 0.0);
  auto gap2 = weak_duality_gap(b, {0.0}, {0.0}, point);
  require_ext(gap2.dual_value, ExtReal(0.0), 1e-12, "singleton dual");
  auto gap3 = weak_duality_gap(b, {0.0}, {1.0}, point);
  require(gap3.dual_value.is_neg_inf(), "infeasible dual");
  Rng rng(seed);
  for (int rep = 0; rep < 20; ++rep) {
    auto lp = testgen::random_lp_config(rng);
    SamplerConfig cfg;
    cfg.seed = seed + rep;
    cfg.n_samples = 32;
    auto g = weak_duality_gap(lp.b, lp.c, lp.vbar, lp.omega, cfg);
    if (g.dual_value.is_finite())
      require(g.primal_estimate >= g.dual_value.value() - 1e-6, "weak duality ordering");
  }
}

void check_cone_product_sum(std::uint64_t seed) {
  Rng rng(seed);
  for (int rep = 0; rep < 8; ++rep) {
    const int nblocks = 2 + static_cast<int>(rng.next_u64() % 2);
    std::vector<ConeBlock> blocks;
    std::vector<testgen::QconeConfig> cfgs;
    Vec x, v, w;
    for (int i = 0; i < nblocks; ++i) {
      auto c = testgen::random_qcone_config(rng, true);
      blocks.push_back({c.n, c.q});
      cfgs.push_back(c);
      x.insert(x.end(), c.x.begin(), c.x.end());
      v.insert(v.end(), c.v.begin(), c.v.end());
      w.insert(w.end(), c.w.begin(), c.w.end());
    }
    CompositeFunction prod = cone_product(blocks);
    ExtReal total = f_second_subderivative(prod, x, v, w);
    ExtReal sum(0.0);
    bool any_inf = false;
    for (auto& c : cfgs) {
      ExtReal part = f_second_subderivative(c.cf, c.x, c.v, c.w);
      if (!part.is_finite()) {
        any_inf = true;
        break;
      }
      sum = sum + part;
    }
    if (any_inf)
      require(total.is_pos_inf(), "one bad block blows up the product");
    else
      require_ext(total, sum, 1e-9, "blockwise additivity");
  }
  // Mixed product: an interior block contributes nothing, the active block
  // carries the whole value.
  CompositeFunction mixed = cone_product({{3, 2.0}, {3, 2.0}});
  Vec x{2.0, 0.0, 0.0, 0.0, 0.0, 0.0};
  Vec v{0.0, 0.0, 0.0, -1.0, 1.0, 0.0};
  Vec w{0.3, 0.1, -0.2, 1.0, 1.0, 0.0};
  CompositeFunction lone = qcone_indicator(3, 2.0);
  ExtReal block_val = f_second_subderivative(lone, Vec(3, 0.0), {-1.0, 1.0, 0.0}, {1.0, 1.0, 0.0});
  require(f_second_subderivative(mixed, x, v, w) == block_val,
          "interior block drops out of the sum");
}

// ------------------------------------------------------------------- oracle

void check_oracle_smooth_battery(std::uint64_t) {
  // Single smooth piece: half the squared norm, estimated quantities exact.
  // Dense per-level sampling keeps the neighborhood minimum close to its
  // deterministic envelope, so the refinement slope is a clean O(tau) line.
  Evaluatable h = [](const Vec& y) { return ExtReal(0.5 * dot(y, y)); };
  Vec x{0.3, -0.4}, w{1.0, 2.0};
  Schedule sched;
  sched.samples_per_level = 512;
  // Second-order quotients drown in eps/tau^2 rounding noise below
  // tau ~ eps^(1/3); stop refining above that crossover.
  sched.levels = 8;
  auto d1 = estimate_subderivative(h, x, w, sched);
  require_close(d1.value.value(), dot(x, w), 2e-3, "smooth first order");
  require(d1.trend_slope >= 0.8, "first-order refinement slope");
  auto d2 = estimate_second_subderivative(h, x, x, w, sched);
  require_close(d2.value.value(), dot(w, w), 5e-2, "smooth second order");
  require(d2.trend_slope >= 0.8, "second-order refinement slope");
  auto dp = estimate_parabolic_subderivative(h, x, w, ExtReal(dot(x, w)), {0.5, -0.25}, sched);
  require_close(dp.value.value(), dot(w, w) + dot(x, Vec{0.5, -0.25}), 5e-2, "smooth parabolic");
}

void check_oracle_clamp(std::uint64_t) {
  PwtdFunction hfun = ramp_clamp();
  Evaluatable h = [hfun](const Vec& y) { return eval(hfun, y); };
  auto est = estimate_subderivative(h, {1.0}, {-1.0});
  require_close(est.value.value(), -1.0, 1e-4, "left slope at the knee");
  auto norm2fn = [](const Vec& y) { return ExtReal(std::sqrt(dot(y, y))); };
  auto est2 = estimate_subderivative(norm2fn, {0.0, 0.0}, {3.0, 4.0});
  require_close(est2.value.value(), 5.0, 1e-4, "norm slope at the origin");
  PwtdFunction ind = orthant_indicator(1);
  PwtdTol tight;
  tight.poly.eps_act = 1e-14;  // tau^2-size violations must stay visible
  Evaluatable hi = [ind, tight](const Vec& y) { return eval(ind, y, tight); };
  auto est3 = estimate_subderivative(hi, {0.0}, {1.0});
  require(est3.divergence_flag && est3.value.is_pos_inf(), "indicator divergence");
  auto est4 = estimate_second_subderivative(h, {1.0}, {1.0}, {1.0});
  require(est4.trend_negative, "knee pathology dives to -inf");
  auto est5 = estimate_parabolic_subderivative(h, {1.0}, {-1.0}, ExtReal(-1.0), {5.0});
  require_close(est5.value.value(), 5.0, 1e-3, "parabolic at the knee");
  auto est6 = estimate_parabolic_subderivative(hi, {0.0}, {0.0}, ExtReal(0.0), {-1.0});
  require_close(est6.value.value(), 0.0, 1e-9, "inward parabola stays feasible");
  auto est7 = estimate_parabolic_subderivative(hi, {0.0}, {0.0}, ExtReal(0.0), {1.0});
  require(est7.value.is_pos_inf(), "outward parabola diverges");
}

void check_oracle_determinism(std::uint64_t seed) {
  GroupPenalty gp = golden_group_scad();
  Evaluatable h = make_f_evaluatable(gp.cf);
  Vec x{0.0, 0.0, 3.0, 4.0}, w{1.0, -0.5, 0.25, 0.0};
  Schedule sched;
  sched.seed = seed;
  auto a = estimate_subderivative(h, x, w, sched, ExecPolicy::Parallel);
  auto b = estimate_subderivative(h, x, w, sched, ExecPolicy::Parallel);
  auto c = estimate_subderivative(h, x, w, sched, ExecPolicy::Serial);
  require(a.value == b.value && a.level_minima == b.level_minima, "same seed, same estimate");
  require(a.value == c.value && a.level_minima == c.level_minima,
          "parallel and serial paths agree bit for bit");
  require(a.level_minima.back() <= (eval(gp.cf.theta, gp.cf.inner.value(axpy(x, sched.tau(sched.levels - 1), w))).value() -
                                    f_eval(gp.cf, x).value()) /
                                           sched.tau(sched.levels - 1) +
                                       1e-12,
          "center sample bounds the level minimum");
}

// ---------------------------------------------------------------- instances

void check_instances_mcp(std::uint64_t) {
  PwtdFunction mcp = mcp_scalar({1.0, 2.0});
  require_ext(eval(mcp, {1.0}), ExtReal(0.75), 1e-15, "integral value inside the knot");
  require_ext(eval(mcp, {5.0}), ExtReal(1.0), 1e-15, "saturated value");
  require_ext(eval(mcp, {0.0}), ExtReal(0.0), 0.0, "origin value");
  // One-sided slopes agree across each knot.
  for (const auto& [rho, knot] :
       std::vector<std::pair<PwtdFunction, double>>{{mcp, 2.0}, {scad_scalar({1.0, 3.0}), 1.0},
                                                    {scad_scalar({1.0, 3.0}), 3.0}}) {
    double left = -subderivative(rho, {knot}, {-1.0}).value();
    double right = subderivative(rho, {knot}, {1.0}).value();
    require_close(left, right, 1e-12, "one-sided derivatives agree at the knot");
  }
}

void check_instances_weak_convexity(std::uint64_t seed) {
  Rng rng(seed);
  // rho + c t^2 / 2 midpoint convexity on a grid across the pieces.
  auto probe = [&](const PwtdFunction& rho, double c, double hi) {
    for (int i = 0; i < 60; ++i) {
      double a = -hi + 2.0 * hi * rng.next_unit();
      double b = -hi + 2.0 * hi * rng.next_unit();
      double mid = 0.5 * (a + b);
      double fa = eval(rho, {a}).value() + 0.5 * c * a * a;
      double fb = eval(rho, {b}).value() + 0.5 * c * b * b;
      double fm = eval(rho, {mid}).value() + 0.5 * c * mid * mid;
      require(fm <= 0.5 * (fa + fb) + 1e-10, "midpoint convexity of the shifted penalty");
    }
  };
  probe(scad_scalar({1.0, 3.0}), 1.0 / (3.0 - 1.0), 5.0);
  probe(mcp_scalar({1.0, 2.0}), 1.0 / 2.0, 5.0);
}

void check_instances_factory(std::uint64_t) {
  GroupPenalty gp = golden_group_scad();
  Vec x{0.0, 0.0, 3.0, 4.0};
  Vec v = subgradient_factory_type1(gp, x, {0.0, 0.0}, {{0.0, 0.0}, {0.0, 0.0}});
  require_close(norm2(v), 0.0, 1e-12, "flat tail and free zero group give v = 0");
  Vec x2{3.0, 4.0, 0.0, 0.0};
  Vec v2 = subgradient_factory_type1(gp, x2, {0.0, 0.5}, {{0.0, 0.0}, {0.6, 0.8}});
  require_close(v2[0], 0.0, 1e-12, "active flat group");
  require_close(v2[2], 0.3, 1e-12, "eta * zeta on the zero group");
  bool threw = false;
  try {
    subgradient_factory_type1(gp, x, {-1.0, 0.0}, {{0.3, 0.4}, {0.0, 0.0}});
  } catch (const std::exception&) {
    threw = true;
  }
  require(threw, "negative eta requires a unit dual vector");
}

std::vector<Check> battery() {
  return {
      {"polyhedra.membership", check_poly_membership},
      {"polyhedra.tangent", check_poly_tangent},
      {"polyhedra.second_tangent", check_poly_second_tangent},
      {"polyhedra.vertices", check_poly_vertices},
      {"polyhedra.cone_property", check_poly_cone_property},
      {"polyhedra.sampling_consistency", check_poly_sampling_consistency},
      {"polyhedra.tangent_of_tangent", check_poly_second_tangent_is_tangent_of_cone},
      {"pwtd.clamp_goldens", check_pwtd_clamp_goldens},
      {"pwtd.scad_goldens", check_pwtd_scad_goldens},
      {"pwtd.active_multipliers", check_pwtd_active_multipliers},
      {"pwtd.regularity_witness", check_pwtd_regularity_witness},
      {"pwtd.homogeneity", check_pwtd_homogeneity},
      {"pwtd.decomposition", check_pwtd_decomposition},
      {"pwtd.sum_rule", check_pwtd_sum_rule},
      {"maps.group_qnorm", check_maps_group_qnorm},
      {"maps.smooth", check_maps_smooth},
      {"maps.parabola_expansion", check_maps_parabola_expansion},
      {"maps.psd", check_maps_psd},
      {"composite.goldens", check_composite_goldens},
      {"composite.qcone_goldens", check_composite_qcone_goldens},
      {"composite.regularity_random", check_composite_regularity_random},
      {"composite.smooth", check_composite_smooth},
      {"composite.weak_duality", check_weak_duality},
      {"composite.cone_product", check_cone_product_sum},
      {"oracle.smooth_battery", check_oracle_smooth_battery},
      {"oracle.clamp", check_oracle_clamp},
      {"oracle.determinism", check_oracle_determinism},
      {"instances.mcp", check_instances_mcp},
      {"instances.weak_convexity", check_instances_weak_convexity},
      {"instances.factory", check_instances_factory},
  };
}

}  // namespace

SelftestSummary run_selftest(const std::string& filter, std::uint64_t seed, std::ostream& out) {
  SelftestSummary summary;
  for (const auto& check : battery()) {
    if (!filter.empty() && check.name.find(filter) == std::string::npos) continue;
    ++summary.total;
    try {
      check.fn(seed);
      out << "[PASS] " << check.name << "\n";
    } catch (const std::exception& e) {
      ++summary.failures;
      out << "[FAIL] " << check.name << ": " << e.what() << "\n";
    }
  }
  out << summary.total - summary.failures << "/" << summary.total << " checks passed\n";
  return summary;
}

}  // namespace epicalc
