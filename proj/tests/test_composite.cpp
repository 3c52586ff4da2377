#include "doctest.h"

#include <cmath>

#include "epicalc/composite.hpp"
#include "epicalc/instances.hpp"
#include "epicalc/testgen.hpp"

using namespace epicalc;

namespace {

GroupPenalty golden() {
  return group_penalty(scad_scalar({1.0, 3.0}), GroupStructure{{{0, 1}, {2, 3}}, 2.0});
}

}  // namespace

TEST_CASE("chain rule evaluation and slopes") {
  GroupPenalty gp = golden();
  Vec x{0.0, 0.0, 3.0, 4.0};
  CHECK(f_eval(gp.cf, x).value() == doctest::Approx(2.0));
  CHECK(f_subderivative(gp.cf, x, {3.0, 4.0, 0.0, 0.0}).value() == doctest::Approx(5.0));
  CHECK(f_subderivative(gp.cf, x, Vec(4, 0.0)).value() == 0.0);

  CompositeFunction qc = qcone_indicator(3, 2.0);
  CHECK(f_eval(qc, {1.0, 0.6, 0.8}).value() == 0.0);
  CHECK(f_eval(qc, {0.5, 1.0, 0.0}).is_pos_inf());
  CHECK(f_subderivative(qc, Vec(3, 0.0), {1.0, 1.0, 0.0}).value() == 0.0);
  CHECK_THROWS_WITH_AS(f_subderivative(qc, {0.5, 1.0, 0.0}, Vec(3, 0.0)),
                       doctest::Contains("outside domain"), std::invalid_argument);
}

TEST_CASE("assertion gates") {
  GroupPenalty gp = golden();
  CompositeFunction unasserted = gp.cf;
  unasserted.msqc_asserted = false;
  CHECK_THROWS_WITH_AS(f_subderivative(unasserted, Vec(4, 0.0), Vec(4, 0.0)),
                       doctest::Contains("not asserted"), std::invalid_argument);
  CompositeFunction unknown = gp.cf;
  unknown.regularity_established = false;
  CHECK_THROWS_WITH_AS(f_second_subderivative(unknown, Vec(4, 0.0), Vec(4, 0.0), Vec(4, 0.0)),
                       doctest::Contains("regularity unknown"), std::invalid_argument);
  CHECK_NOTHROW(f_second_subderivative(unknown, Vec(4, 0.0), Vec(4, 0.0), Vec(4, 0.0),
                                       /*assert_regularity=*/true));
}

TEST_CASE("domain tangency mirrors parabolic finiteness") {
  CompositeFunction qc = qcone_indicator(3, 2.0);
  Vec origin(3, 0.0);
  CHECK(domain_tangent_contains(qc, origin, {1.0, 0.0, 0.0}));
  CHECK(!domain_tangent_contains(qc, origin, {-1.0, 0.0, 0.0}));
  Vec w{1.0, 1.0, 0.0};  // boundary ray: dF = 0
  CHECK(domain_tangent_contains(qc, origin, w));
  // Feasible parabola: second-order residual <= 0 <=> finite parabolic value.
  Vec z_in{2.0, 1.0, 0.0};  // residual gradient at w is (-1, 1, 0): value -1
  Vec z_out{0.0, 1.0, 0.0};
  CHECK(domain_second_tangent_contains(qc, origin, w, z_in));
  CHECK(!domain_second_tangent_contains(qc, origin, w, z_out));
  CHECK(f_parabolic_subderivative(qc, origin, w, z_in).value() == 0.0);
  CHECK(f_parabolic_subderivative(qc, origin, w, z_out).is_pos_inf());

  GroupPenalty gp = golden();
  Rng rng(31);
  for (int rep = 0; rep < 10; ++rep) {
    Vec x = testgen::random_instance_point(rng, gp);
    Vec w2 = rng.gaussian_vec(4), z2 = rng.gaussian_vec(4);
    CHECK(domain_tangent_contains(gp.cf, x, w2));  // full-domain outer function
    CHECK(domain_second_tangent_contains(gp.cf, x, w2, z2) ==
          f_parabolic_subderivative(gp.cf, x, w2, z2).is_finite());
  }
}

TEST_CASE("critical cone membership") {
  GroupPenalty gp = golden();
  Vec x{0.0, 0.0, 3.0, 4.0}, v(4, 0.0);
  CHECK(critical_cone_contains(gp.cf, x, v, {0.0, 0.0, 1.0, 0.0}));
  CHECK(!critical_cone_contains(gp.cf, x, v, {1.0, 0.0, 0.0, 0.0}));
  CHECK(critical_cone_contains(gp.cf, x, v, Vec(4, 0.0)));
  CHECK(f_parabolic_subderivative(gp.cf, x, Vec(4, 0.0), Vec(4, 0.0)).value() == 0.0);
}

TEST_CASE("multiplier sets on the three routes") {
  // Instance rule (group penalty).
  GroupPenalty gp = golden();
  MultiplierSet ms = multiplier_set(gp.cf, {0.0, 0.0, 3.0, 4.0}, Vec(4, 0.0));
  REQUIRE(ms.candidate.size() == 2);
  CHECK(ms.candidate[0] == doctest::Approx(1.0));
  CHECK(ms.candidate[1] == doctest::Approx(0.0));

  // Jacobian route (identity inner map): the set is {v} when v is a subgradient.
  PwtdFunction theta = separable_sum(scad_scalar({1.0, 3.0}), 2);
  auto ident = smooth_map(2, 2, [](const Vec& x) { return x; },
                          [](const Vec&) { return Mat::identity(2); },
                          [](const Vec&) { return std::vector<Mat>(2, Mat(2, 2)); }, {{0.3, 0.4}});
  CompositeFunction cf = smooth_composite(theta, ident);
  Vec v{0.7, 1.0};
  MultiplierSet ms2 = multiplier_set(cf, Vec(2, 0.0), v);
  REQUIRE(ms2.poly.has_value());
  auto verts = vertices(*ms2.poly);
  REQUIRE(verts.size() == 1);
  CHECK(verts[0][0] == doctest::Approx(0.7));
  CHECK_THROWS_WITH_AS(multiplier_set(cf, Vec(2, 0.0), {5.0, 0.0}),
                       doctest::Contains("no multiplier"), std::invalid_argument);

  // Missing provider.
  CompositeFunction bare = cf;
  bare.theta.subdiff_provider = nullptr;
  CHECK_THROWS_WITH_AS(multiplier_set(bare, Vec(2, 0.0), v),
                       doctest::Contains("subdifferential unavailable"), std::invalid_argument);

  // Interior of the q-cone: zero multiplier.
  CompositeFunction qc = qcone_indicator(3, 2.0);
  MultiplierSet ms3 = multiplier_set(qc, {2.0, 0.6, 0.8}, Vec(3, 0.0));
  REQUIRE(ms3.poly.has_value());
  auto verts3 = vertices(*ms3.poly);
  REQUIRE(verts3.size() == 1);
  CHECK(std::abs(verts3[0][0]) < 1e-9);
}

TEST_CASE("sampled membership check on certificate multipliers") {
  GroupPenalty gp = golden();
  Vec x{0.0, 0.0, 3.0, 4.0}, v(4, 0.0);
  Vec xi = gp.cf.multiplier_candidate(x, v);
  CHECK(multiplier_candidate_valid(gp.cf, x, v, xi));
  // With v = 0 the zero multiplier dominates trivially.
  CHECK(multiplier_candidate_valid(gp.cf, x, v, {0.0, 0.0}));
  // Outside the subdifferential box.
  CHECK(!multiplier_candidate_valid(gp.cf, x, v, {5.0, 0.0}));
  // A tight subgradient on the zero group forces the full entry lambda:
  // anything smaller loses the domination inequality along that block.
  Vec vt = subgradient_factory_type1(gp, x, {1.0, 0.0}, {{0.6, 0.8}, {0.0, 0.0}});
  CHECK(multiplier_candidate_valid(gp.cf, x, vt, gp.cf.multiplier_candidate(x, vt)));
  CHECK(!multiplier_candidate_valid(gp.cf, x, vt, {0.5, 0.0}));

  CompositeFunction qc = qcone_indicator(3, 2.0);
  Vec vq{-1.0, 1.0, 0.0};
  CHECK(multiplier_candidate_valid(qc, Vec(3, 0.0), vq, qc.multiplier_candidate(Vec(3, 0.0), vq)));
  CHECK(!multiplier_candidate_valid(qc, Vec(3, 0.0), vq, {0.0}));
}

TEST_CASE("second subderivative homogeneity over the critical cone") {
  Rng rng(77);
  for (int rep = 0; rep < 15; ++rep) {
    GroupPenalty gp = testgen::random_group_penalty(rng, 6);
    auto t = testgen::random_critical_triple(rng, gp);
    ExtReal base = f_second_subderivative(gp.cf, t.x, t.v, t.w);
    REQUIRE(base.is_finite());
    for (double s : {0.5, 2.0, 10.0}) {
      ExtReal scaled = f_second_subderivative(gp.cf, t.x, t.v, scale(s, t.w));
      CHECK(ext_close(scaled, base.scaled(s * s), 1e-9 * (1.0 + std::abs(base.value()))));
    }
  }
}

TEST_CASE("regularity report carries the sandwich estimates") {
  GroupPenalty gp = golden();
  Vec x{0.0, 0.0, 3.0, 4.0}, v(4, 0.0), w{0.0, 0.0, 1.0, 0.0};
  RegularityReport rep = check_parabolic_regularity(gp.cf, x, v, w);
  CHECK(rep.pass);
  ExtReal d2 = f_second_subderivative(gp.cf, x, v, w);
  CHECK(rep.lower <= d2 + ExtReal(1e-9));
  CHECK(d2 <= rep.upper + ExtReal(1e-9));
  CHECK_THROWS_WITH_AS(check_parabolic_regularity(gp.cf, x, v, {1.0, 0.0, 0.0, 0.0}),
                       doctest::Contains("critical cone"), std::invalid_argument);
}

TEST_CASE("weak duality gap mechanics") {
  Mat b = Mat::identity(1);
  CHECK_THROWS_WITH_AS(weak_duality_gap(b, {0.0}, {0.0}, Polyhedron::interval(0.0, INFINITY)),
                       doctest::Contains("unbounded"), std::invalid_argument);
  auto gap = weak_duality_gap(b, {0.0}, {0.0}, Polyhedron::interval(-1.0, 1.0));
  CHECK(gap.dual_value.value() == doctest::Approx(0.0));
  CHECK(gap.primal_estimate >= -1e-9);
  // Feasible slice strictly inside the box is still found.
  Mat b2(2, 1);
  b2(0, 0) = 1.0;
  b2(1, 0) = 1.0;
  Vec lo{-1.0, -1.0}, hi{1.0, 1.0};
  auto gap2 = weak_duality_gap(b2, {1.0, 0.0}, {0.5}, Polyhedron::box(lo, hi));
  CHECK(gap2.dual_value.value() == doctest::Approx(1.0));  // u = (1, -0.5)
  CHECK(gap2.primal_estimate >= gap2.dual_value.value() - 1e-6);
}
