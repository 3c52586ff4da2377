#include "epicalc/polyhedron.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>

namespace epicalc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool near_dup(const Vec& a, const Vec& b, double tol) {
  double d2 = 0.0, n2 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    d2 += (a[i] - b[i]) * (a[i] - b[i]);
    n2 += b[i] * b[i];
  }
  return std::sqrt(d2) <= tol * (1.0 + std::sqrt(n2));
}

void dedup_points(std::vector<Vec>& pts, double tol) {
  std::vector<Vec> out;
  for (const auto& p : pts) {
    bool seen = false;
    for (const auto& q : out)
      if (near_dup(p, q, tol)) {
        seen = true;
        break;
      }
    if (!seen) out.push_back(p);
  }
  pts.swap(out);
}

std::uint64_t n_choose_k(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t r = 1;
  for (std::uint64_t i = 0; i < k; ++i) {
    r = r * (n - i) / (i + 1);
    if (r > (1ull << 40)) return 1ull << 40;  // saturate, caller only compares
  }
  return r;
}

// Visits all k-subsets of {0..n-1}; f may return false to abort.
template <typename F>
void for_each_subset(int n, int k, F&& f) {
  if (k == 0) {
    std::vector<int> empty;
    f(empty);
    return;
  }
  if (k > n) return;
  std::vector<int> idx(k);
  for (int i = 0; i < k; ++i) idx[i] = i;
  while (true) {
    f(idx);
    int i = k - 1;
    while (i >= 0 && idx[i] == n - k + i) --i;
    if (i < 0) break;
    ++idx[i];
    for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

bool feasible(const Polyhedron& p, const Vec& y, double tol) {
  for (const auto& r : p.ineqs)
    if (dot(r.normal, y) - r.offset > tol) return false;
  for (const auto& r : p.eqs)
    if (std::abs(dot(r.normal, y) - r.offset) > tol) return false;
  return true;
}

Polyhedron intersect_box(const Polyhedron& p, double radius) {
  Polyhedron q = p;
  for (int i = 0; i < p.dim; ++i) {
    Vec e(p.dim, 0.0);
    e[i] = 1.0;
    q.add_ineq(e, radius);
    e[i] = -1.0;
    q.add_ineq(e, radius);
  }
  return q;
}

Polyhedron recession_polyhedron(const Polyhedron& p) {
  Polyhedron r(p.dim);
  // Direction-duplicated rows collapse; keeps ray enumeration tractable.
  auto push_ineq = [&](const Vec& a) {
    double n = norm2(a);
    if (n == 0.0) return;
    Vec u = scale(1.0 / n, a);
    for (const auto& row : r.ineqs)
      if (near_dup(u, row.normal, 1e-12)) return;
    r.add_ineq(u, 0.0);
  };
  auto push_eq = [&](const Vec& e) {
    double n = norm2(e);
    if (n == 0.0) return;
    Vec u = scale(1.0 / n, e);
    for (const auto& row : r.eqs)
      if (near_dup(u, row.normal, 1e-12)) return;
    r.add_eq(u, 0.0);
  };
  for (const auto& row : p.ineqs) push_ineq(row.normal);
  for (const auto& row : p.eqs) push_eq(row.normal);
  return r;
}

}  // namespace

Polyhedron& Polyhedron::add_ineq(Vec a, double b) {
  if (static_cast<int>(a.size()) != dim)
    throw std::invalid_argument("Polyhedron: inequality row dimension mismatch");
  ineqs.push_back({std::move(a), b});
  return *this;
}

Polyhedron& Polyhedron::add_eq(Vec e, double d) {
  if (static_cast<int>(e.size()) != dim)
    throw std::invalid_argument("Polyhedron: equality row dimension mismatch");
  eqs.push_back({std::move(e), d});
  return *this;
}

Polyhedron Polyhedron::interval(double lo, double hi) {
  Polyhedron p(1);
  if (std::isfinite(hi)) p.add_ineq({1.0}, hi);
  if (std::isfinite(lo)) p.add_ineq({-1.0}, -lo);
  return p;
}

Polyhedron Polyhedron::box(const Vec& lo, const Vec& hi) {
  if (lo.size() != hi.size()) throw std::invalid_argument("box: bound dimension mismatch");
  Polyhedron p(static_cast<int>(lo.size()));
  for (std::size_t i = 0; i < lo.size(); ++i) {
    Vec e(lo.size(), 0.0);
    if (std::isfinite(hi[i])) {
      e[i] = 1.0;
      p.add_ineq(e, hi[i]);
    }
    if (std::isfinite(lo[i])) {
      e[i] = -1.0;
      p.add_ineq(e, -lo[i]);
    }
  }
  return p;
}

bool contains(const Polyhedron& p, const Vec& y, double eps_act) {
  if (static_cast<int>(y.size()) != p.dim)
    throw std::invalid_argument("contains: point dimension mismatch");
  return feasible(p, y, eps_act);
}

ActiveSet active_set(const Polyhedron& p, const Vec& y, double eps_act) {
  if (static_cast<int>(y.size()) != p.dim)
    throw std::invalid_argument("active_set: point dimension mismatch");
  ActiveSet s;
  s.point = y;
  s.eq_count = p.eqs.size();
  for (std::size_t j = 0; j < p.ineqs.size(); ++j)
    if (std::abs(dot(p.ineqs[j].normal, y) - p.ineqs[j].offset) <= eps_act)
      s.active_ineq.push_back(j);
  return s;
}

bool tangent_cone_contains(const Polyhedron& p, const Vec& y, const Vec& w, const PolyTol& tol) {
  if (!contains(p, y, tol.eps_act)) throw std::invalid_argument("tangent_cone_contains: point outside set");
  if (static_cast<int>(w.size()) != p.dim)
    throw std::invalid_argument("tangent_cone_contains: direction dimension mismatch");
  ActiveSet s = active_set(p, y, tol.eps_act);
  for (std::size_t j : s.active_ineq)
    if (dot(p.ineqs[j].normal, w) > tol.eps_dir) return false;
  for (const auto& r : p.eqs)
    if (std::abs(dot(r.normal, w)) > tol.eps_dir) return false;
  return true;
}

bool second_tangent_contains(const Polyhedron& p, const Vec& y, const Vec& w, const Vec& z,
                             const PolyTol& tol) {
  if (!tangent_cone_contains(p, y, w, tol))
    throw std::invalid_argument("second_tangent_contains: direction outside tangent cone");
  if (static_cast<int>(z.size()) != p.dim)
    throw std::invalid_argument("second_tangent_contains: dimension mismatch");
  ActiveSet s = active_set(p, y, tol.eps_act);
  for (std::size_t j : s.active_ineq) {
    if (std::abs(dot(p.ineqs[j].normal, w)) > tol.eps_dir) continue;  // strictly tangent row drops out
    if (dot(p.ineqs[j].normal, z) > tol.eps_dir) return false;
  }
  for (const auto& r : p.eqs)
    if (std::abs(dot(r.normal, z)) > tol.eps_dir) return false;
  return true;
}

Polyhedron tangent_cone_at(const Polyhedron& p, const Vec& y, const PolyTol& tol) {
  if (!contains(p, y, tol.eps_act)) throw std::invalid_argument("tangent_cone_at: point outside set");
  Polyhedron c(p.dim);
  ActiveSet s = active_set(p, y, tol.eps_act);
  for (std::size_t j : s.active_ineq) c.add_ineq(p.ineqs[j].normal, 0.0);
  for (const auto& r : p.eqs) c.add_eq(r.normal, 0.0);
  return c;
}

Polyhedron second_tangent_cone_at(const Polyhedron& p, const Vec& y, const Vec& w,
                                  const PolyTol& tol) {
  if (!tangent_cone_contains(p, y, w, tol))
    throw std::invalid_argument("second_tangent_cone_at: direction outside tangent cone");
  Polyhedron c(p.dim);
  ActiveSet s = active_set(p, y, tol.eps_act);
  for (std::size_t j : s.active_ineq)
    if (std::abs(dot(p.ineqs[j].normal, w)) <= tol.eps_dir) c.add_ineq(p.ineqs[j].normal, 0.0);
  for (const auto& r : p.eqs) c.add_eq(r.normal, 0.0);
  return c;
}

std::vector<Vec> basic_points(const Polyhedron& p, double feas_tol) {
  const int d = p.dim;
  const int n_rows = static_cast<int>(p.ineqs.size() + p.eqs.size());
  std::vector<Vec> pts;
  if (d == 0) return pts;
  if (n_choose_k(n_rows, d) > 5'000'000ull)
    throw std::invalid_argument("vertex enumeration unsupported: too many row subsets");

  auto row_normal = [&](int r) -> const Vec& {
    return r < static_cast<int>(p.eqs.size()) ? p.eqs[r].normal
                                              : p.ineqs[r - p.eqs.size()].normal;
  };
  auto row_offset = [&](int r) {
    return r < static_cast<int>(p.eqs.size()) ? p.eqs[r].offset
                                              : p.ineqs[r - p.eqs.size()].offset;
  };

  for_each_subset(n_rows, d, [&](const std::vector<int>& rows) {
    Mat m(d, d);
    Vec b(d);
    for (int i = 0; i < d; ++i) {
      const Vec& a = row_normal(rows[i]);
      for (int j = 0; j < d; ++j) m(i, j) = a[j];
      b[i] = row_offset(rows[i]);
    }
    auto x = solve_square(m, b);
    if (!x) return;
    if (feasible(p, *x, feas_tol)) pts.push_back(*x);
  });
  dedup_points(pts, 1e-8);
  return pts;
}

std::vector<Vec> recession_rays(const Polyhedron& p) {
  Polyhedron rec = intersect_box(recession_polyhedron(p), 1.0);
  std::vector<Vec> rays;
  for (const auto& v : basic_points(rec)) {
    double n = norm2(v);
    if (n <= 1e-6) continue;
    rays.push_back(scale(1.0 / n, v));
  }
  dedup_points(rays, 1e-9);
  return rays;
}

bool is_bounded(const Polyhedron& p) { return recession_rays(p).empty(); }

bool is_empty_probe(const Polyhedron& p, double box_radius) {
  return basic_points(intersect_box(p, box_radius)).empty();
}

std::vector<Vec> vertices(const Polyhedron& p, double eps_act) {
  if (p.dim > 8) throw std::invalid_argument("vertex enumeration unsupported: dim > 8");
  if (!is_bounded(p)) throw std::invalid_argument("vertex enumeration unsupported: unbounded set");
  std::vector<Vec> pts = basic_points(p);
  dedup_points(pts, std::max(eps_act, 1e-9));
  return pts;
}

ExtReal sup_linear(const Polyhedron& p, const Vec& c, double box_radius) {
  if (static_cast<int>(c.size()) != p.dim) throw std::invalid_argument("sup_linear: dimension mismatch");
  double cn = norm2(c);
  for (const auto& ray : recession_rays(p))
    if (dot(ray, c) > 1e-9 * (1.0 + cn)) return ExtReal::pos_inf();
  std::vector<Vec> pts = basic_points(intersect_box(p, box_radius));
  if (pts.empty()) return ExtReal::neg_inf();
  double best = -kInf;
  for (const auto& v : pts) best = std::max(best, dot(c, v));
  return ExtReal(best);
}

ExtReal inf_linear_over_cone(const Polyhedron& cone, const Vec& g) {
  double gn = norm2(g);
  for (const auto& ray : recession_rays(cone))
    if (dot(ray, g) < -1e-9 * (1.0 + gn)) return ExtReal::neg_inf();
  return ExtReal(0.0);
}

double distance_to(const Polyhedron& p, const Vec& y) {
  if (static_cast<int>(y.size()) != p.dim)
    throw std::invalid_argument("distance_to: point dimension mismatch");
  const int n_ineq = static_cast<int>(p.ineqs.size());
  if (n_ineq > 20) throw std::invalid_argument("distance_to: too many rows for face enumeration");
  const int n_eq = static_cast<int>(p.eqs.size());
  // Tight filter: this routine feeds o(tau) / o(tau^2) probes, where a loose
  // feasibility slack would misreport points just outside the set as inside.
  const double feas_tol = 1e-10;
  double best = kInf;

  // Project onto every candidate face: all equalities plus a subset of tight
  // inequalities. The least-norm correction solves the Gram system.
  for (int k = 0; k <= std::min(p.dim, n_ineq); ++k) {
    for_each_subset(n_ineq, k, [&](const std::vector<int>& sel) {
      const int rows = n_eq + k;
      if (rows == 0) {
        if (feasible(p, y, feas_tol)) best = 0.0;
        return;
      }
      Mat a(rows, p.dim);
      Vec resid(rows);
      for (int i = 0; i < n_eq; ++i) {
        for (int j = 0; j < p.dim; ++j) a(i, j) = p.eqs[i].normal[j];
        resid[i] = dot(p.eqs[i].normal, y) - p.eqs[i].offset;
      }
      for (int i = 0; i < k; ++i) {
        const auto& r = p.ineqs[sel[i]];
        for (int j = 0; j < p.dim; ++j) a(n_eq + i, j) = r.normal[j];
        resid[n_eq + i] = dot(r.normal, y) - r.offset;
      }
      Mat gram(rows, rows);
      for (int i = 0; i < rows; ++i)
        for (int j = 0; j < rows; ++j) {
          double s = 0.0;
          for (int t = 0; t < p.dim; ++t) s += a(i, t) * a(j, t);
          gram(i, j) = s;
        }
      auto lam = solve_square(gram, resid);
      if (!lam) return;
      Vec x = y;
      for (int i = 0; i < rows; ++i)
        for (int j = 0; j < p.dim; ++j) x[j] -= (*lam)[i] * a(i, j);
      if (!feasible(p, x, feas_tol)) return;
      best = std::min(best, norm2(sub(x, y)));
    });
    if (n_eq == 0 && k == 0 && best == 0.0) break;  // already inside
  }
  return best;
}

}  // namespace epicalc
