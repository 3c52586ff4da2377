#include "epicalc/composite.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "epicalc/oracle.hpp"

namespace epicalc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_msqc(const CompositeFunction& cf, const char* who) {
  if (!cf.msqc_asserted)
    throw std::invalid_argument(std::string(who) + ": constraint qualification not asserted");
}

void check_dims(const CompositeFunction& cf, const Vec& x, const char* who) {
  if (static_cast<int>(x.size()) != cf.inner.dim_in)
    throw std::invalid_argument(std::string(who) + ": dimension mismatch");
  if (cf.theta.dim() != cf.inner.dim_out)
    throw std::invalid_argument(std::string(who) + ": outer/inner dimension mismatch");
}

// Multiplier selection shared by f_second_subderivative and the regularity
// report: an instance rule beats the Jacobian route; the Jacobian route picks
// the curvature-maximizing basic point of the exact multiplier set.
Vec select_multiplier(const CompositeFunction& cf, const Vec& x, const Vec& v, const Vec& w,
                      const PwtdTol& tol) {
  if (cf.multiplier_candidate) return cf.multiplier_candidate(x, v);
  MultiplierSet ms = multiplier_set(cf, x, v, tol);
  if (!ms.poly) return ms.candidate;
  std::vector<Vec> pts = basic_points(*ms.poly);
  if (pts.empty()) throw std::invalid_argument("no multiplier available");
  Vec best = pts.front();
  double best_val = cf.inner.scalarized_second(best, x, w);
  for (const auto& p : pts) {
    double val = cf.inner.scalarized_second(p, x, w);
    if (val > best_val) {
      best_val = val;
      best = p;
    }
  }
  return best;
}

}  // namespace

ExtReal f_eval(const CompositeFunction& cf, const Vec& x, const PwtdTol& tol) {
  check_dims(cf, x, "f_eval");
  return eval(cf.theta, cf.inner.value(x), tol);
}

ExtReal f_subderivative(const CompositeFunction& cf, const Vec& x, const Vec& w,
                        const PwtdTol& tol) {
  check_dims(cf, x, "f_subderivative");
  require_msqc(cf, "f_subderivative");
  if (!f_eval(cf, x, tol).is_finite())
    throw std::invalid_argument("f_subderivative: point outside domain");
  return subderivative(cf.theta, cf.inner.value(x), cf.inner.semiderivative(x, w), tol);
}

bool domain_tangent_contains(const CompositeFunction& cf, const Vec& x, const Vec& w,
                             const PwtdTol& tol) {
  check_dims(cf, x, "domain_tangent_contains");
  require_msqc(cf, "domain_tangent_contains");
  Vec y = cf.inner.value(x);
  Vec u = cf.inner.semiderivative(x, w);
  for (std::size_t i : cf.theta.candidates(y)) {
    PwtdPiece p = cf.theta.piece(i);
    if (!contains(p.region, y, tol.poly.eps_act)) continue;
    if (tangent_cone_contains(p.region, y, u, tol.poly)) return true;
  }
  return false;
}

bool domain_second_tangent_contains(const CompositeFunction& cf, const Vec& x, const Vec& w,
                                    const Vec& z, const PwtdTol& tol) {
  check_dims(cf, x, "domain_second_tangent_contains");
  require_msqc(cf, "domain_second_tangent_contains");
  if (!domain_tangent_contains(cf, x, w, tol))
    throw std::invalid_argument("domain_second_tangent_contains: w outside domain tangent cone");
  Vec y = cf.inner.value(x);
  Vec u = cf.inner.semiderivative(x, w);
  Vec b = cf.inner.parabolic(x, w, z);
  for (std::size_t i : cf.theta.candidates(y)) {
    PwtdPiece p = cf.theta.piece(i);
    if (!contains(p.region, y, tol.poly.eps_act)) continue;
    if (!tangent_cone_contains(p.region, y, u, tol.poly)) continue;
    if (second_tangent_contains(p.region, y, u, b, tol.poly)) return true;
  }
  return false;
}

bool critical_cone_contains(const CompositeFunction& cf, const Vec& x, const Vec& v, const Vec& w,
                            const PwtdTol& tol) {
  ExtReal df = f_subderivative(cf, x, w, tol);
  double vw = dot(v, w);
  return df.is_finite() && std::abs(df.value() - vw) <= tol.eps_crit * (1.0 + std::abs(vw));
}

ExtReal f_parabolic_subderivative(const CompositeFunction& cf, const Vec& x, const Vec& w,
                                  const Vec& z, const PwtdTol& tol) {
  check_dims(cf, x, "f_parabolic_subderivative");
  require_msqc(cf, "f_parabolic_subderivative");
  if (!domain_tangent_contains(cf, x, w, tol))
    throw std::invalid_argument("f_parabolic_subderivative: w outside domain tangent cone");
  Vec y = cf.inner.value(x);
  return parabolic_subderivative(cf.theta, y, cf.inner.semiderivative(x, w),
                                 cf.inner.parabolic(x, w, z), tol);
}

MultiplierSet multiplier_set(const CompositeFunction& cf, const Vec& x, const Vec& v,
                             const PwtdTol&) {
  check_dims(cf, x, "multiplier_set");
  if (!cf.theta.subdiff_provider)
    throw std::invalid_argument("multiplier_set: subdifferential unavailable");
  MultiplierSet ms;
  ms.x = x;
  ms.v = v;
  Vec y = cf.inner.value(x);

  if (auto jac = cf.inner.jacobian_at ? cf.inner.jacobian_at(x) : std::nullopt) {
    // Linear semiderivative: the multiplier set is the polyhedron
    // { xi in subdiff theta(y) : J^T xi = v }.
    Polyhedron lam = cf.theta.subdiff_provider(y);
    for (int r = 0; r < jac->cols; ++r) {
      Vec col(jac->rows);
      for (int i = 0; i < jac->rows; ++i) col[i] = (*jac)(i, r);
      lam.add_eq(col, v[r]);
    }
    ms.poly = lam;
    std::vector<Vec> pts = basic_points(lam);
    if (pts.empty()) {
      if (is_empty_probe(lam)) throw std::invalid_argument("multiplier_set: no multiplier");
    } else {
      ms.candidate = pts.front();
    }
    if (cf.multiplier_candidate) ms.candidate = cf.multiplier_candidate(x, v);
    return ms;
  }

  if (cf.multiplier_candidate) {
    ms.candidate = cf.multiplier_candidate(x, v);
    return ms;
  }
  throw std::invalid_argument(
      "multiplier_set: semiderivative not linear here and no instance rule available");
}

bool multiplier_candidate_valid(const CompositeFunction& cf, const Vec& x, const Vec& v,
                                const Vec& xi, int n_samples, std::uint64_t seed, double tol) {
  if (!cf.theta.subdiff_provider)
    throw std::invalid_argument("multiplier_candidate_valid: subdifferential unavailable");
  Vec y = cf.inner.value(x);
  if (!contains(cf.theta.subdiff_provider(y), xi, 1e-9)) return false;
  Rng rng(seed);
  for (int s = 0; s < n_samples; ++s) {
    Vec wp = rng.gaussian_vec(static_cast<int>(x.size()));
    double lhs = dot(xi, cf.inner.semiderivative(x, wp));
    if (lhs < dot(v, wp) - tol * (1.0 + std::abs(lhs))) return false;
  }
  return true;
}

ExtReal f_second_subderivative(const CompositeFunction& cf, const Vec& x, const Vec& v,
                               const Vec& w, bool assert_regularity, const PwtdTol& tol) {
  check_dims(cf, x, "f_second_subderivative");
  require_msqc(cf, "f_second_subderivative");
  if (!cf.regularity_established && !assert_regularity)
    throw std::invalid_argument("f_second_subderivative: parabolic regularity unknown");
  if (!critical_cone_contains(cf, x, v, w, tol)) return ExtReal::pos_inf();

  Vec y = cf.inner.value(x);
  Vec u = cf.inner.semiderivative(x, w);
  ExtReal outer = second_subderivative_plain(cf.theta, y, u, tol);
  Vec xi_bar = select_multiplier(cf, x, v, w, tol);
  return outer + ExtReal(cf.inner.scalarized_second(xi_bar, x, w));
}

RegularityReport check_parabolic_regularity(const CompositeFunction& cf, const Vec& x,
                                            const Vec& v, const Vec& w, const SamplerConfig& cfg,
                                            const PwtdTol& tol) {
  check_dims(cf, x, "check_parabolic_regularity");
  require_msqc(cf, "check_parabolic_regularity");
  if (!cf.theta.regular_flag)
    throw std::invalid_argument("check_parabolic_regularity: outer function must be regular");
  if (!critical_cone_contains(cf, x, v, w, tol))
    throw std::invalid_argument("check_parabolic_regularity: w outside critical cone");

  Vec y = cf.inner.value(x);
  Vec u = cf.inner.semiderivative(x, w);
  Polyhedron active = active_multipliers(cf.theta, y, u, tol);
  std::vector<Vec> u_pts = basic_points(active);
  std::vector<Vec> u_rays = recession_rays(active);

  auto bracket = [&](const Vec& z) -> double {
    Vec b = cf.inner.parabolic(x, w, z);
    double bn = norm2(b);
    for (const auto& ray : u_rays)
      if (dot(ray, b) > 1e-9 * (1.0 + bn)) return kInf;
    if (u_pts.empty()) return kInf;  // empty active set: vacuous sup
    double best = -kInf;
    for (const auto& up : u_pts) best = std::max(best, dot(up, b));
    return best - dot(v, z);
  };

  // Candidate pool: the origin, instance closed-form minimizers, then seeded
  // gaussian draws over several magnitudes.
  std::vector<Vec> cands;
  cands.emplace_back(x.size(), 0.0);
  if (cf.minimizer_hints)
    for (auto& hint : cf.minimizer_hints(x, v, w)) cands.push_back(hint);
  Rng rng(cfg.seed);
  for (double mag : cfg.magnitudes)
    for (int s = 0; s < cfg.n_samples; ++s) cands.push_back(scale(mag, rng.gaussian_vec(static_cast<int>(x.size()))));

  std::vector<double> vals(cands.size());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < static_cast<long>(cands.size()); ++i) vals[i] = bracket(cands[i]);
  double lhs = kInf;
  for (double vv : vals) lhs = std::min(lhs, vv);  // fixed reduction order

  RegularityReport rep;
  rep.w = w;
  rep.xi_bar = select_multiplier(cf, x, v, w, tol);
  rep.lhs = std::isfinite(lhs) ? ExtReal(lhs) : ExtReal::pos_inf();
  rep.rhs = ExtReal(cf.inner.scalarized_second(rep.xi_bar, x, w));

  ExtReal outer_plain = second_subderivative_plain(cf.theta, y, u, tol);
  rep.upper = outer_plain + rep.lhs;

  // Lower estimate over multiplier candidates (certificate plus, when the
  // exact set is available, its basic points).
  std::vector<Vec> xi_cands{rep.xi_bar};
  if (cf.theta.subdiff_provider && cf.inner.jacobian_at) {
    if (auto jac = cf.inner.jacobian_at(x)) {
      MultiplierSet ms = multiplier_set(cf, x, v, tol);
      if (ms.poly)
        for (auto& p : basic_points(*ms.poly)) xi_cands.push_back(p);
    }
  }
  ExtReal lower = ExtReal::neg_inf();
  for (const auto& xi : xi_cands) {
    ExtReal term = second_subderivative(cf.theta, y, xi, u, /*caller_asserts_regular=*/false, tol);
    if (!term.is_finite()) continue;
    ExtReal cand = term + ExtReal(cf.inner.scalarized_second(xi, x, w));
    if (cand > lower) lower = cand;
  }
  rep.lower = lower;

  rep.pass = rep.lhs.is_finite() && rep.rhs.is_finite() &&
             std::abs(rep.lhs.value() - rep.rhs.value()) <= cfg.pass_tol;
  return rep;
}

std::function<ExtReal(const Vec&)> make_f_evaluatable(const CompositeFunction& cf,
                                                      double eps_act) {
  PwtdTol tol;
  tol.poly.eps_act = eps_act;
  return [cf, tol](const Vec& x) { return f_eval(cf, x, tol); };
}

DualityGap weak_duality_gap(const Mat& b, const Vec& c, const Vec& vbar, const Polyhedron& omega,
                            const SamplerConfig& cfg) {
  if (omega.dim != b.rows || static_cast<int>(c.size()) != b.rows ||
      static_cast<int>(vbar.size()) != b.cols)
    throw std::invalid_argument("weak_duality_gap: dimension mismatch");
  if (!is_bounded(omega)) throw std::invalid_argument("weak_duality_gap: unbounded multiplier set");

  DualityGap gap;

  // Dual: restrict omega to the affine slice B^T u = vbar and take the best
  // vertex of the slice.
  Polyhedron sliced = omega;
  for (int r = 0; r < b.cols; ++r) {
    Vec col(b.rows);
    for (int i = 0; i < b.rows; ++i) col[i] = b(i, r);
    sliced.add_eq(col, vbar[r]);
  }
  std::vector<Vec> feas = basic_points(sliced);
  if (feas.empty()) {
    gap.dual_value = ExtReal::neg_inf();
  } else {
    double best = -kInf;
    for (const auto& u : feas) best = std::max(best, dot(u, c));
    gap.dual_value = ExtReal(best);
  }

  std::vector<Vec> verts = vertices(omega);
  auto outer_sup = [&](const Vec& z) {
    Vec bz = matvec(b, z);
    double best = -kInf;
    for (const auto& u : verts) best = std::max(best, dot(u, add(bz, c)));
    return best - dot(vbar, z);
  };

  Rng rng(cfg.seed);
  double primal = outer_sup(Vec(b.cols, 0.0));
  for (double mag : cfg.magnitudes)
    for (int s = 0; s < cfg.n_samples; ++s)
      primal = std::min(primal, outer_sup(scale(mag, rng.gaussian_vec(b.cols))));
  gap.primal_estimate = primal;
  return gap;
}

}  // namespace epicalc
