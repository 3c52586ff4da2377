#include "epicalc/pwtd.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace epicalc {

PwtdFunction::PwtdFunction(int dim, std::vector<PwtdPiece> pieces)
    : dim_(dim), explicit_(true), pieces_(std::move(pieces)) {
  for (const auto& p : pieces_)
    if (p.region.dim != dim_) throw std::invalid_argument("PwtdFunction: piece dimension mismatch");
}

PwtdFunction::PwtdFunction(int dim, std::size_t count, PieceFactory factory, Locator locator)
    : dim_(dim), explicit_(false), lazy_count_(count), factory_(std::move(factory)),
      locator_(std::move(locator)) {
  if (!factory_ || !locator_) throw std::invalid_argument("PwtdFunction: lazy form needs factory and locator");
}

PwtdPiece PwtdFunction::piece(std::size_t i) const {
  if (i >= piece_count()) throw std::out_of_range("PwtdFunction::piece");
  return explicit_ ? pieces_[i] : factory_(i);
}

std::vector<std::size_t> PwtdFunction::candidates(const Vec& y) const {
  if (!explicit_) return locator_(y);
  std::vector<std::size_t> all(pieces_.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return all;
}

namespace {

void check_point_dim(const PwtdFunction& psi, const Vec& y, const char* who) {
  if (static_cast<int>(y.size()) != psi.dim())
    throw std::invalid_argument(std::string(who) + ": dimension mismatch");
}

// Values of all listed pieces must agree; returns the lowest-index value so
// repeated evaluations are bit-stable.
double agreeing_value(const std::vector<double>& vals, double eps_cons, const char* what) {
  double ref = vals.front();
  for (double v : vals)
    if (std::abs(v - ref) > eps_cons * (1.0 + std::abs(ref)))
      throw std::invalid_argument(std::string("inconsistent PWTD data: ") + what);
  return ref;
}

}  // namespace

ExtReal eval(const PwtdFunction& psi, const Vec& y, const PwtdTol& tol) {
  check_point_dim(psi, y, "eval");
  std::vector<double> vals;
  for (std::size_t i : psi.candidates(y)) {
    PwtdPiece p = psi.piece(i);
    if (contains(p.region, y, tol.poly.eps_act)) vals.push_back(p.fn.value(y));
  }
  if (vals.empty()) return ExtReal::pos_inf();
  return ExtReal(agreeing_value(vals, tol.eps_cons, "piece values disagree"));
}

IndexSets index_sets(const PwtdFunction& psi, const Vec& y, const Vec& w, const Vec* z,
                     const PwtdTol& tol) {
  check_point_dim(psi, y, "index_sets");
  IndexSets s;
  for (std::size_t i : psi.candidates(y)) {
    PwtdPiece p = psi.piece(i);
    if (!contains(p.region, y, tol.poly.eps_act)) continue;
    s.j_y.push_back(i);
    if (!tangent_cone_contains(p.region, y, w, tol.poly)) continue;
    s.j_yw.push_back(i);
    if (z) {
      if (!s.j_ywz) s.j_ywz.emplace();
      if (second_tangent_contains(p.region, y, w, *z, tol.poly)) s.j_ywz->push_back(i);
    }
  }
  if (z && !s.j_ywz) s.j_ywz.emplace();
  return s;
}

ExtReal subderivative(const PwtdFunction& psi, const Vec& y, const Vec& w, const PwtdTol& tol) {
  IndexSets s = index_sets(psi, y, w, nullptr, tol);
  if (s.j_y.empty()) throw std::invalid_argument("subderivative: point outside domain");
  if (s.j_yw.empty()) return ExtReal::pos_inf();
  std::vector<double> vals;
  for (std::size_t k : s.j_yw) vals.push_back(dot(psi.piece(k).fn.gradient(y), w));
  return ExtReal(agreeing_value(vals, tol.eps_cons, "gradients disagree across active pieces"));
}

ExtReal second_subderivative_plain(const PwtdFunction& psi, const Vec& y, const Vec& w,
                                   const PwtdTol& tol) {
  IndexSets s = index_sets(psi, y, w, nullptr, tol);
  if (s.j_y.empty()) throw std::invalid_argument("second_subderivative_plain: point outside domain");
  if (s.j_yw.empty()) return ExtReal::pos_inf();
  std::vector<double> vals;
  for (std::size_t k : s.j_yw) vals.push_back(dot(w, matvec(psi.piece(k).fn.hessian(y), w)));
  return ExtReal(agreeing_value(vals, tol.eps_cons, "Hessians disagree across active pieces"));
}

ExtReal second_subderivative(const PwtdFunction& psi, const Vec& y, const Vec& v, const Vec& w,
                             bool caller_asserts_regular, const PwtdTol& tol) {
  check_point_dim(psi, y, "second_subderivative");
  if (!psi.regular_flag && !caller_asserts_regular)
    throw std::invalid_argument(
        "second_subderivative: regular subdifferential required (set regular_flag or assert)");
  if (psi.subdiff_provider && !contains(psi.subdiff_provider(y), v, tol.poly.eps_act))
    throw std::invalid_argument("second_subderivative: not a subgradient");
  ExtReal d1 = subderivative(psi, y, w, tol);
  double vw = dot(v, w);
  if (!d1.is_finite() || std::abs(d1.value() - vw) > tol.eps_crit * (1.0 + std::abs(vw)))
    return ExtReal::pos_inf();
  return second_subderivative_plain(psi, y, w, tol);
}

ExtReal parabolic_subderivative(const PwtdFunction& psi, const Vec& y, const Vec& w, const Vec& z,
                                const PwtdTol& tol) {
  ExtReal d1 = subderivative(psi, y, w, tol);
  if (!d1.is_finite())
    throw std::invalid_argument("parabolic_subderivative: subderivative at (y, w) must be finite");
  IndexSets s = index_sets(psi, y, w, &z, tol);
  if (s.j_ywz->empty()) return ExtReal::pos_inf();
  std::vector<double> vals;
  for (std::size_t k : *s.j_ywz) {
    PwtdPiece p = psi.piece(k);
    vals.push_back(dot(w, matvec(p.fn.hessian(y), w)) + dot(p.fn.gradient(y), z));
  }
  return ExtReal(agreeing_value(vals, tol.eps_cons, "parabolic values disagree across pieces"));
}

Polyhedron active_multipliers(const PwtdFunction& psi, const Vec& y, const Vec& w,
                              const PwtdTol& tol) {
  check_point_dim(psi, y, "active_multipliers");
  if (!psi.regular_flag)
    throw std::invalid_argument("active_multipliers: requires regular_flag");
  if (!psi.subdiff_provider)
    throw std::invalid_argument("active_multipliers: subdifferential unavailable");
  ExtReal d1 = subderivative(psi, y, w, tol);
  if (!d1.is_finite())
    throw std::invalid_argument("active_multipliers: subderivative at (y, w) must be finite");
  Polyhedron a = psi.subdiff_provider(y);
  // Components of w that are float residue of an exact zero would turn the
  // vacuous 0 = 0 row into a near-degenerate constraint; snap them away.
  Vec row = w;
  for (double& c : row)
    if (std::abs(c) <= 1e-12) c = 0.0;
  a.add_eq(row, norm_inf(row) == 0.0 ? 0.0 : d1.value());
  return a;
}

ExtReal parabolic_conjugate_value(const PwtdFunction& psi, const Vec& y, const Vec& w,
                                  const Vec& zstar, const PwtdTol& tol) {
  Polyhedron a = active_multipliers(psi, y, w, tol);
  if (!contains(a, zstar, tol.poly.eps_act)) return ExtReal::pos_inf();
  ExtReal d2 = second_subderivative_plain(psi, y, w, tol);
  return -d2;
}

RegularityWitness pwtd_parabolic_regularity_witness(const PwtdFunction& psi, const Vec& y,
                                                    const Vec& v, const Vec& w,
                                                    const PwtdTol& tol) {
  if (!psi.regular_flag)
    throw std::invalid_argument("pwtd_parabolic_regularity_witness: requires regular_flag");
  if (psi.subdiff_provider && !contains(psi.subdiff_provider(y), v, tol.poly.eps_act))
    throw std::invalid_argument("pwtd_parabolic_regularity_witness: not a subgradient");
  ExtReal d1 = subderivative(psi, y, w, tol);
  double vw = dot(v, w);
  if (!d1.is_finite() || std::abs(d1.value() - vw) > tol.eps_crit * (1.0 + std::abs(vw)))
    throw std::invalid_argument("pwtd_parabolic_regularity_witness: w outside critical cone");

  // inf_z { d^2 psi(y)(w|z) - <v,z> } decomposes piecewise: over each active
  // piece's second-order tangent cone the integrand is linear in z, so each
  // partial infimum is 0 or -inf by a polar test, and the total is the min.
  IndexSets s = index_sets(psi, y, w, nullptr, tol);
  ExtReal d2 = second_subderivative_plain(psi, y, w, tol);
  ExtReal best = ExtReal::pos_inf();
  for (std::size_t k : s.j_yw) {
    PwtdPiece p = psi.piece(k);
    Polyhedron cone = second_tangent_cone_at(p.region, y, w, tol.poly);
    ExtReal part = inf_linear_over_cone(cone, sub(p.fn.gradient(y), v));
    if (part < best) best = part;
  }
  RegularityWitness wit;
  wit.lhs = d2 + best;
  wit.rhs = second_subderivative(psi, y, v, w, /*caller_asserts_regular=*/false, tol);
  return wit;
}

PwtdFunction materialize_subderivative(const PwtdFunction& psi, const Vec& y, const PwtdTol& tol) {
  check_point_dim(psi, y, "materialize_subderivative");
  std::vector<PwtdPiece> pieces;
  for (std::size_t i : psi.candidates(y)) {
    PwtdPiece p = psi.piece(i);
    if (!contains(p.region, y, tol.poly.eps_act)) continue;
    Vec g = p.fn.gradient(y);
    const int d = psi.dim();
    PwtdPiece lin;
    lin.region = tangent_cone_at(p.region, y, tol.poly);
    lin.fn.value = [g](const Vec& u) { return dot(g, u); };
    lin.fn.gradient = [g](const Vec&) { return g; };
    lin.fn.hessian = [d](const Vec&) { return Mat(d, d); };
    pieces.push_back(std::move(lin));
  }
  if (pieces.empty()) throw std::invalid_argument("materialize_subderivative: point outside domain");
  return PwtdFunction(psi.dim(), std::move(pieces));
}

void validate_pwtd(const PwtdFunction& psi, const PwtdTol& tol) {
  if (psi.is_lazy()) return;  // product builders validate their scalar factors
  const int d = psi.dim();
  const std::size_t n = psi.piece_count();

  auto probe_points = [&](const Polyhedron& region) {
    std::vector<Vec> pts = basic_points(region);
    // Unbounded regions still need interior probes; clip with a box.
    Polyhedron boxed = region;
    for (int i = 0; i < d; ++i) {
      Vec e(d, 0.0);
      e[i] = 1.0;
      boxed.add_ineq(e, 3.0);
      e[i] = -1.0;
      boxed.add_ineq(e, 3.0);
    }
    for (const auto& v : basic_points(boxed)) pts.push_back(v);
    if (pts.size() >= 2) {
      Vec mid(d, 0.0);
      for (const auto& v : pts)
        for (int i = 0; i < d; ++i) mid[i] += v[i] / static_cast<double>(pts.size());
      pts.push_back(mid);
    }
    return pts;
  };

  for (std::size_t i = 0; i < n; ++i) {
    PwtdPiece p = psi.piece(i);
    for (const auto& y : probe_points(p.region)) {
      Mat h = p.fn.hessian(y);
      for (int r = 0; r < d; ++r)
        for (int c = r + 1; c < d; ++c)
          if (std::abs(h(r, c) - h(c, r)) > 1e-12)
            throw std::invalid_argument("derivative data inconsistent: Hessian not symmetric");
      Vec g = p.fn.gradient(y);
      const double step = 1e-6;
      for (int c = 0; c < d; ++c) {
        Vec yp = y, ym = y;
        yp[c] += step;
        ym[c] -= step;
        double fd = (p.fn.value(yp) - p.fn.value(ym)) / (2.0 * step);
        if (std::abs(fd - g[c]) > 1e-6 * (1.0 + std::abs(fd)) + 1e-6)
          throw std::invalid_argument("derivative data inconsistent: gradient mismatch");
      }
    }
  }

  // Pairwise agreement where regions overlap.
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      PwtdPiece a = psi.piece(i), b = psi.piece(j);
      Polyhedron meet = a.region;
      for (const auto& r : b.region.ineqs) meet.add_ineq(r.normal, r.offset);
      for (const auto& r : b.region.eqs) meet.add_eq(r.normal, r.offset);
      for (const auto& y : probe_points(meet)) {
        if (!contains(meet, y, 1e-9)) continue;
        if (std::abs(a.fn.value(y) - b.fn.value(y)) > tol.eps_cons * (1.0 + std::abs(a.fn.value(y))))
          throw std::invalid_argument("inconsistent PWTD data: boundary values disagree");
      }
    }
  }
}

}  // namespace epicalc
