#include "doctest.h"

#include <cmath>

#include "epicalc/inner_map.hpp"
#include "epicalc/oracle.hpp"

using namespace epicalc;

TEST_CASE("group structure validation") {
  CHECK_THROWS(GroupStructure{{{0, 1}}, 1.0}.validate());          // q too small
  CHECK_THROWS(GroupStructure{{{0}, {0}}, 2.0}.validate());        // overlap
  CHECK_THROWS(GroupStructure{{{0}, {2}}, 2.0}.validate());        // gap
  CHECK_THROWS((GroupStructure{{{0}, {}}, 2.0}).validate());       // empty block
  GroupStructure ok{{{1, 0}, {2}}, 1.5};
  ok.validate();
  CHECK(ok.conjugate() == doctest::Approx(3.0));
}

TEST_CASE("group q-norm map values and branches") {
  GroupStructure gs{{{0, 1}, {2}}, 2.0};
  InnerMap f = group_qnorm_map(gs);
  Vec x{3.0, 4.0, 0.0};
  CHECK(f.value(x)[0] == doctest::Approx(5.0));
  CHECK(f.value(x)[1] == 0.0);
  // Active block uses the gradient; zero block uses the norm of the step.
  Vec d = f.semiderivative(x, {1.0, 0.0, -2.0});
  CHECK(d[0] == doctest::Approx(0.6));
  CHECK(d[1] == doctest::Approx(2.0));
  // Parabolic branches: zero/zero -> norm of z; zero/moving -> gradient at w.
  Vec p = f.parabolic(x, {0.0, 0.0, 0.0}, {0.0, 0.0, 7.0});
  CHECK(p[1] == doctest::Approx(7.0));
  Vec p2 = f.parabolic(x, {0.0, 0.0, 2.0}, {0.0, 0.0, 5.0});
  CHECK(p2[1] == doctest::Approx(5.0));
  CHECK(f.jacobian_at(x) == std::nullopt);
  CHECK(f.jacobian_at({3.0, 4.0, 1.0}).has_value());
  CHECK(group_near_zero_diagnostics(gs, {3.0, 4.0, 1e-10}) == std::vector<int>{1});
}

TEST_CASE("q-norm homogeneity across exponents") {
  Rng rng(11);
  for (double q : {1.5, 2.0, 3.0}) {
    GroupStructure gs{{{0, 1, 2}}, q};
    InnerMap f = group_qnorm_map(gs);
    for (int rep = 0; rep < 10; ++rep) {
      Vec x = rng.gaussian_vec(3), w = rng.gaussian_vec(3);
      if (rep % 3 == 0) x = Vec(3, 0.0);
      Vec base = f.semiderivative(x, w);
      for (double t : {0.5, 2.0, 10.0})
        CHECK(f.semiderivative(x, scale(t, w))[0] == doctest::Approx(t * base[0]));
      // Euler identity on the active branch.
      if (norm_inf(x) > 0.0)
        CHECK(dot(qnorm_gradient(x, q), x) == doctest::Approx(norm_q(x, q)));
    }
  }
}

TEST_CASE("scalarized second form matches the parabolic map at z = 0") {
  Rng rng(3);
  GroupStructure gs{{{0, 1}, {2, 3}}, 2.0};
  InnerMap f = group_qnorm_map(gs);
  for (int rep = 0; rep < 20; ++rep) {
    Vec x = rng.gaussian_vec(4), w = rng.gaussian_vec(4), xi = rng.gaussian_vec(2);
    Vec curv = f.parabolic(x, w, Vec(4, 0.0));
    CHECK(f.scalarized_second(xi, x, w) == doctest::Approx(xi[0] * curv[0] + xi[1] * curv[1]));
  }
}

TEST_CASE("q-cone residual map") {
  InnerMap f = qcone_residual_map(3, 2.0);
  CHECK(f.value({1.0, 0.0, 1.0})[0] == doctest::Approx(0.0));
  CHECK(f.semiderivative({0.0, 0.0, 0.0}, {1.0, 1.0, 0.0})[0] == doctest::Approx(0.0));
  CHECK(f.parabolic({0.0, 0.0, 0.0}, {0.0, 0.0, 0.0}, {2.0, 1.0, 1.0})[0] ==
        doctest::Approx(std::sqrt(2.0) - 2.0));
  CHECK_THROWS(qcone_residual_map(1, 2.0));
  CHECK_THROWS(qcone_residual_map(3, 1.0));
}

TEST_CASE("smooth map construction cross-checks the supplied derivatives") {
  auto value = [](const Vec& x) { return Vec{x[0] * x[0]}; };
  auto good_jac = [](const Vec& x) {
    Mat j(1, 1);
    j(0, 0) = 2.0 * x[0];
    return j;
  };
  auto bad_jac = [](const Vec& x) {
    Mat j(1, 1);
    j(0, 0) = 3.0 * x[0];  // wrong factor
    return j;
  };
  auto hess = [](const Vec&) {
    std::vector<Mat> hs(1, Mat(1, 1));
    hs[0](0, 0) = 2.0;
    return hs;
  };
  CHECK_NOTHROW(smooth_map(1, 1, value, good_jac, hess, {{0.7}}));
  CHECK_THROWS_WITH_AS(smooth_map(1, 1, value, bad_jac, hess, {{0.7}}),
                       doctest::Contains("derivative data inconsistent"), std::invalid_argument);
  InnerMap ident = smooth_map(1, 1, [](const Vec& x) { return x; },
                              [](const Vec&) { return Mat::identity(1); },
                              [](const Vec&) { return std::vector<Mat>(1, Mat(1, 1)); }, {{0.2}});
  CHECK(ident.semiderivative({5.0}, {-2.0})[0] == -2.0);
  CHECK(ident.parabolic({5.0}, {-2.0}, {3.0})[0] == 3.0);
}
