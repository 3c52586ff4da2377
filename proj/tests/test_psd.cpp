#include "doctest.h"

#include <cmath>

#include "epicalc/psd_cone.hpp"
#include "epicalc/testgen.hpp"

using namespace epicalc;

namespace {

Mat diag3(double a, double b, double c) {
  Mat m(3, 3);
  m(0, 0) = a;
  m(1, 1) = b;
  m(2, 2) = c;
  return m;
}

}  // namespace

TEST_CASE("symmetric embedding is an isometry") {
  Rng rng(4);
  for (int rep = 0; rep < 20; ++rep) {
    int n = 2 + static_cast<int>(rng.next_u64() % 4);
    Mat s(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) s(i, j) = s(j, i) = rng.next_gaussian();
    Vec v = sym_to_vec(s);
    CHECK(static_cast<int>(v.size()) == sym_vec_dim(n));
    CHECK(norm2(v) == doctest::Approx(std::sqrt(trace_inner(s, s))));
    Mat back = vec_to_sym(v, n);
    double err = 0.0;
    for (std::size_t t = 0; t < back.a.size(); ++t) err = std::max(err, std::abs(back.a[t] - s.a[t]));
    CHECK(err < 1e-14);
  }
}

TEST_CASE("jacobi eigendecomposition reconstructs the matrix") {
  Rng rng(8);
  for (int n : {3, 5, 8}) {
    Mat s(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) s(i, j) = s(j, i) = rng.next_gaussian();
    EigResult e = eig_symmetric(s);
    // V diag(w) V^T == s
    Mat rec(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double acc = 0.0;
        for (int k = 0; k < n; ++k) acc += e.eigenvectors(i, k) * e.eigenvalues[k] * e.eigenvectors(j, k);
        rec(i, j) = acc;
      }
    double err = 0.0;
    for (std::size_t t = 0; t < rec.a.size(); ++t) err = std::max(err, std::abs(rec.a[t] - s.a[t]));
    CHECK(err < 1e-12);
    for (int k = 0; k + 1 < n; ++k) CHECK(e.eigenvalues[k] <= e.eigenvalues[k + 1] + 1e-14);
  }
}

TEST_CASE("pseudoinverse on the nonzero spectrum") {
  Mat x = diag3(0.0, -1.0, -2.0);
  Mat p = sym_pseudo_inverse(x, 1e-12);
  CHECK(p(0, 0) == doctest::Approx(0.0));
  CHECK(p(1, 1) == doctest::Approx(-1.0));
  CHECK(p(2, 2) == doctest::Approx(-0.5));
}

TEST_CASE("closed form on the worked example") {
  Mat xb = diag3(0.0, -1.0, -2.0);
  Mat vb = diag3(1.0, 0.0, 0.0);
  Mat w(3, 3);
  w(0, 1) = w(1, 0) = 1.0;
  CHECK(psd_second_subderivative(xb, vb, w).value() == doctest::Approx(2.0));
  // Degree-2 homogeneity.
  Mat w2 = w;
  for (auto& e : w2.a) e *= 3.0;
  CHECK(psd_second_subderivative(xb, vb, w2).value() == doctest::Approx(18.0));
}

TEST_CASE("normal-cone and critical-cone guards") {
  Mat xb = diag3(0.0, -1.0, -2.0);
  Mat vb = diag3(1.0, 0.0, 0.0);
  Mat w(3, 3);
  w(0, 1) = w(1, 0) = 1.0;
  // xbar not NSD
  CHECK_THROWS(psd_second_subderivative(diag3(0.5, -1.0, -1.0), vb, w));
  // vbar not PSD
  CHECK_THROWS_WITH_AS(psd_second_subderivative(xb, diag3(-1.0, 0.0, 0.0), w),
                       doctest::Contains("not a subgradient"), std::invalid_argument);
  // complementarity violated
  CHECK_THROWS_WITH_AS(psd_second_subderivative(xb, diag3(0.0, 1.0, 0.0), w),
                       doctest::Contains("not a subgradient"), std::invalid_argument);
  // critical cone: positive kernel compression is out
  Mat wpos(3, 3);
  wpos(0, 0) = 1.0;
  CHECK(psd_second_subderivative(xb, vb, wpos).is_pos_inf());
  // <vbar, w> != 0 is out
  Mat wv(3, 3);
  wv(0, 0) = -1.0;
  CHECK(psd_second_subderivative(xb, vb, wv).is_pos_inf());
}

TEST_CASE("random critical configurations stay nonnegative and finite") {
  Rng rng(17);
  for (int rep = 0; rep < 10; ++rep) {
    auto cfg = testgen::random_psd_config(rng, 4);
    ExtReal v = psd_second_subderivative(cfg.xbar, cfg.vbar, cfg.w);
    REQUIRE(v.is_finite());
    CHECK(v.value() >= -1e-9);
  }
}
