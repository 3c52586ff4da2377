#include "epicalc/testgen.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace epicalc::testgen {

namespace {

Vec slice(const Vec& x, const std::vector<int>& idx) {
  Vec r(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) r[i] = x[idx[i]];
  return r;
}

void place(Vec& out, const std::vector<int>& idx, const Vec& vals) {
  for (std::size_t i = 0; i < idx.size(); ++i) out[idx[i]] = vals[i];
}

double pick(Rng& rng, std::initializer_list<double> opts) {
  auto it = opts.begin();
  std::advance(it, rng.next_u64() % opts.size());
  return *it;
}

// Nonzero gaussian block, rescaled to the requested q-norm. Components are
// resampled away from zero: the q-norm Hessian carries |u_i|^{q-2} factors
// that blow up for q < 2, and these draws feed difference-quotient checks.
Vec block_with_norm(Rng& rng, int len, double q, double target) {
  Vec b = rng.gaussian_vec(len);
  auto too_small = [&](const Vec& v) {
    double m = norm_inf(v);
    if (m < 1e-6) return true;
    for (double e : v)
      if (std::abs(e) < 5e-3 * m) return true;
    return false;
  };
  while (too_small(b)) b = rng.gaussian_vec(len);
  return scale(target / norm_q(b, q), b);
}

}  // namespace

GroupPenalty random_group_penalty(Rng& rng, int max_n, PenaltyParams* params_out,
                                  std::initializer_list<double> qs) {
  const int n = 2 + static_cast<int>(rng.next_u64() % std::max(1, max_n - 1));
  GroupStructure gs;
  gs.q = pick(rng, qs);
  // Random contiguous partition: split points drawn by coin flips.
  std::vector<int> current;
  for (int i = 0; i < n; ++i) {
    current.push_back(i);
    bool close = i == n - 1 || rng.next_unit() < 0.45;
    if (close) {
      gs.groups.push_back(current);
      current.clear();
    }
  }
  PenaltyParams params;
  params.scad = rng.next_unit() < 0.5;
  params.lambda = pick(rng, {0.5, 1.0});
  params.shape = params.scad ? pick(rng, {2.5, 3.0, 4.0}) : pick(rng, {1.0, 2.0, 3.5});
  if (params_out) *params_out = params;
  PwtdFunction rho = params.scad ? scad_scalar({params.lambda, params.shape})
                                 : mcp_scalar({params.lambda, params.shape});
  return group_penalty(rho, gs);
}

namespace {

long double penalty_value_ld(const PenaltyParams& p, long double t) {
  long double a = fabsl(t);
  long double lam = p.lambda, s = p.shape;
  if (p.scad) {
    if (a <= lam) return lam * a;
    if (a <= s * lam) return (-a * a + 2.0L * s * lam * a - lam * lam) / (2.0L * (s - 1.0L));
    return 0.5L * (s + 1.0L) * lam * lam;
  }
  if (a <= lam * s) return lam * a - a * a / (2.0L * s);
  return 0.5L * lam * lam * s;
}

long double qnorm_ld(const Vec& x, const std::vector<int>& idx, long double q) {
  long double m = 0.0L;
  for (int i : idx) m = std::max(m, (long double)fabsl((long double)x[i]));
  if (m == 0.0L) return 0.0L;
  long double acc = 0.0L;
  for (int i : idx) acc += powl(fabsl((long double)x[i]) / m, q);
  return m * powl(acc, 1.0L / q);
}

}  // namespace

std::function<ExtReal(const Vec&)> precise_group_eval(const GroupStructure& gs,
                                                      const PenaltyParams& params) {
  return [gs, params](const Vec& x) {
    long double total = 0.0L;
    for (const auto& g : gs.groups) total += penalty_value_ld(params, qnorm_ld(x, g, gs.q));
    return ExtReal(static_cast<double>(total));
  };
}

std::function<ExtReal(const Vec&)> precise_separable_eval(int m, const PenaltyParams& params) {
  return [m, params](const Vec& x) {
    long double total = 0.0L;
    for (int i = 0; i < m; ++i) total += penalty_value_ld(params, (long double)x[i]);
    return ExtReal(static_cast<double>(total));
  };
}

Vec random_instance_point(Rng& rng, const GroupPenalty& gp, double min_norm_factor) {
  const auto& gs = gp.gs;
  Vec x(gs.total_dim(), 0.0);
  const double lam = gp.lambda;
  // Knot locations differ between the penalty families; spread targets over
  // every regime, occasionally landing exactly on a knot.
  for (const auto& g : gs.groups) {
    double u = rng.next_unit();
    if (u < 0.35) continue;  // zero block
    double target = pick(rng, {0.4 * lam, lam, 1.7 * lam, 2.5 * lam, 4.5 * lam});
    if (rng.next_unit() < 0.7) target *= 0.85 + 0.3 * rng.next_unit();
    target = std::max(target, min_norm_factor * lam);
    place(x, g, block_with_norm(rng, static_cast<int>(g.size()), gs.q, target));
  }
  return x;
}

CriticalTriple random_critical_triple(Rng& rng, const GroupPenalty& gp) {
  const auto& gs = gp.gs;
  const int n = gs.total_dim();
  const int m = static_cast<int>(gs.groups.size());
  const double lam = gp.lambda;

  CriticalTriple t;
  t.x = random_instance_point(rng, gp);
  t.w = Vec(n, 0.0);
  Vec eta(m, 0.0);
  std::vector<Vec> zeta(m);

  for (int i = 0; i < m; ++i) {
    const auto& g = gs.groups[i];
    const int len = static_cast<int>(g.size());
    zeta[i] = Vec(len, 0.0);
    Vec xb = slice(t.x, g);
    if (norm_inf(xb) > kGroupZeroEps) {
      place(t.w, g, rng.gaussian_vec(len));  // active group: any direction stays critical
      continue;
    }
    if (rng.next_unit() < 0.5) {
      // Frozen direction on this block; dual data free up to the sign rules
      // (negative eta demands a unit dual vector).
      Vec d = rng.gaussian_vec(len);
      double np = norm_q(d, gs.conjugate());
      while (np < 1e-9) {
        d = rng.gaussian_vec(len);
        np = norm_q(d, gs.conjugate());
      }
      if (rng.next_unit() < 0.7) {
        eta[i] = lam * rng.next_unit();
        zeta[i] = scale(rng.next_unit() / np, d);
      } else {
        eta[i] = -lam * rng.next_unit();
        zeta[i] = scale(1.0 / np, d);
      }
    } else {
      // Moving direction: the dual pair must be tight against it.
      Vec wb = block_with_norm(rng, len, gs.q, 0.3 + 2.0 * rng.next_unit());
      place(t.w, g, wb);
      double sign = rng.next_unit() < 0.5 ? 1.0 : -1.0;
      eta[i] = sign * lam;
      zeta[i] = scale(sign, qnorm_gradient(wb, gs.q));
    }
  }
  double wn = norm2(t.w);
  if (wn > 1e-9) t.w = scale(1.0 / wn, t.w);
  t.v = subgradient_factory_type1(gp, t.x, eta, zeta);
  return t;
}

CriticalTriple resolvable_triple(Rng& rng, const GroupPenalty& gp,
                                 const PenaltyParams& params) {
  const auto& gs = gp.gs;
  const int n = gs.total_dim();
  const int m = static_cast<int>(gs.groups.size());
  const double lam = params.lambda;
  const double flat_knot = params.shape * lam;  // both families saturate at shape * lambda

  for (int attempt = 0; attempt < 24; ++attempt) {
    CriticalTriple t;
    t.x = Vec(n, 0.0);
    t.w = Vec(n, 0.0);
    Vec eta(m, 0.0);
    std::vector<Vec> zeta(m);
    const int focus = static_cast<int>(rng.next_u64() % m);
    for (int i = 0; i < m; ++i) {
      const auto& g = gs.groups[i];
      const int len = static_cast<int>(g.size());
      zeta[i] = Vec(len, 0.0);
      if (i == focus) {
        // Focus block on the open curved piece of the penalty.
        double t0 = params.scad ? lam * (1.0 + (params.shape - 1.0) * (0.25 + 0.5 * rng.next_unit()))
                                : lam * params.shape * (0.25 + 0.5 * rng.next_unit());
        Vec xb = block_with_norm(rng, len, gs.q, t0);
        place(t.x, g, xb);
        bool radial = attempt >= 12 || len == 1 || rng.next_unit() < 0.5;
        if (radial) {
          place(t.w, g, scale(1.0 / norm_q(xb, 2.0), xb));
        } else {
          Vec raw = rng.gaussian_vec(len);
          Vec grad = qnorm_gradient(xb, gs.q);
          double proj = dot(raw, grad) / dot(grad, grad);
          Vec tang = axpy(raw, -proj, grad);
          double tn = norm2(tang);
          if (tn < 1e-6) {
            place(t.w, g, scale(1.0 / norm2(xb), xb));
          } else {
            place(t.w, g, scale(1.0 / tn, tang));
          }
        }
      } else if (rng.next_unit() < 0.3) {
        // Flat tail: constant piece, exact cancellation in the quotients.
        place(t.x, g, block_with_norm(rng, len, gs.q, flat_knot + 0.75 + rng.next_unit()));
      }  // else zero-frozen: x and w stay zero on this block
      if (norm_inf(slice(t.x, g)) <= kGroupZeroEps) {
        eta[i] = 0.9 * lam * rng.next_unit();  // nonnegative: zeta stays inside the dual ball
        Vec d = rng.gaussian_vec(len);
        double np = norm_q(d, gs.conjugate());
        if (np > 1e-9) zeta[i] = scale(0.8 * rng.next_unit() / np, d);
      }
    }
    t.v = subgradient_factory_type1(gp, t.x, eta, zeta);
    ExtReal d2 = f_second_subderivative(gp.cf, t.x, t.v, t.w);
    if (d2.is_finite() && std::abs(d2.value()) >= 0.25) return t;
  }
  throw std::runtime_error("resolvable_triple: no admissible focus configuration found");
}

QconeConfig random_qcone_config(Rng& rng, bool allow_curved_boundary) {
  QconeConfig c;
  c.n = 2 + static_cast<int>(rng.next_u64() % 4);  // 2..5
  c.q = pick(rng, {1.5, 2.0, 3.0});
  c.cf = qcone_indicator(c.n, c.q);
  const int n = c.n;
  c.x = Vec(n, 0.0);
  c.v = Vec(n, 0.0);
  c.w = Vec(n, 0.0);
  const double p = c.q / (c.q - 1.0);

  double u = rng.next_unit();
  if (!allow_curved_boundary) u *= 0.75;  // skip the Boundary branch
  if (u < 0.25) {
    c.which = QconeConfig::Case::Interior;
    Vec x2 = rng.gaussian_vec(n - 1);
    double r = norm_q(x2, c.q);
    c.x[0] = r + 0.5 + rng.next_unit();
    for (int i = 1; i < n; ++i) c.x[i] = x2[i - 1];
    c.w = rng.gaussian_vec(n);
  } else if (u < 0.5) {
    c.which = QconeConfig::Case::OriginZeroDir;
    Vec v2 = rng.gaussian_vec(n - 1);
    c.v[0] = -norm_q(v2, p) - (rng.next_unit() < 0.5 ? 0.0 : rng.next_unit());
    for (int i = 1; i < n; ++i) c.v[i] = v2[i - 1];
    // w = 0
  } else if (u < 0.75) {
    c.which = QconeConfig::Case::OriginRay;
    Vec w2 = block_with_norm(rng, n - 1, c.q, 0.5 + rng.next_unit());
    double wn = norm_q(w2, c.q);
    if (rng.next_unit() < 0.4) {
      c.w[0] = wn + 0.3 + rng.next_unit();  // interior ray: multiplier must vanish
      for (int i = 1; i < n; ++i) c.w[i] = w2[i - 1];
    } else {
      c.w[0] = wn;  // boundary ray
      for (int i = 1; i < n; ++i) c.w[i] = w2[i - 1];
      if (rng.next_unit() < 0.7) {
        double tbar = 0.3 + rng.next_unit();
        Vec eta = qnorm_gradient(w2, c.q);
        c.v[0] = -tbar;
        for (int i = 1; i < n; ++i) c.v[i] = tbar * eta[i - 1];
      }
    }
  } else {
    c.which = QconeConfig::Case::Boundary;
    Vec x2 = block_with_norm(rng, n - 1, c.q, 1.0);
    // Bounded curvature: keep every component away from zero (the q-norm
    // Hessian has |u_i|^{q-2} factors, singular for q < 2).
    bool clear = false;
    while (!clear) {
      clear = true;
      for (double e : x2)
        if (std::abs(e) < 0.25 / std::sqrt(static_cast<double>(n - 1))) clear = false;
      if (!clear) x2 = block_with_norm(rng, n - 1, c.q, 1.0);
    }
    // Close the residual in floating point exactly: the stored apex equals
    // the recomputed norm, so the base point never drifts off the boundary.
    c.x[0] = norm_q(x2, c.q);
    for (int i = 1; i < n; ++i) c.x[i] = x2[i - 1];
    Vec grad = qnorm_gradient(x2, c.q);  // residual gradient: (-1, grad)
    double tbar = rng.next_unit() < 0.3 ? 0.0 : 0.5 + rng.next_unit();
    c.v[0] = -tbar;
    for (int i = 1; i < n; ++i) c.v[i] = tbar * grad[i - 1];
    // Critical direction: orthogonal to the residual gradient when the
    // multiplier is active, any tangent direction otherwise.
    Vec raw = rng.gaussian_vec(n);
    Vec full_grad(n);
    full_grad[0] = -1.0;
    for (int i = 1; i < n; ++i) full_grad[i] = grad[i - 1];
    double proj = dot(raw, full_grad) / dot(full_grad, full_grad);
    c.w = axpy(raw, -proj, full_grad);
    if (tbar == 0.0 && rng.next_unit() < 0.5) c.w = axpy(c.w, -0.5, full_grad);
    double wn = norm2(c.w);
    if (wn > 1e-9) c.w = scale(1.0 / wn, c.w);
  }
  return c;
}

PsdConfig random_psd_config(Rng& rng, int n) {
  PsdConfig c;
  c.n = n;
  // Random orthogonal basis by Gram-Schmidt on gaussian columns.
  Mat qmat(n, n);
  for (int col = 0; col < n; ++col) {
    Vec v = rng.gaussian_vec(n);
    for (int prev = 0; prev < col; ++prev) {
      double d = 0.0;
      for (int i = 0; i < n; ++i) d += v[i] * qmat(i, prev);
      for (int i = 0; i < n; ++i) v[i] -= d * qmat(i, prev);
    }
    double nv = norm2(v);
    while (nv < 1e-8) {
      v = rng.gaussian_vec(n);
      nv = norm2(v);
    }
    for (int i = 0; i < n; ++i) qmat(i, col) = v[i] / nv;
  }

  // Corank-1: one zero eigenvalue, the rest in [-2, -0.5].
  Vec eigs(n, 0.0);
  for (int i = 1; i < n; ++i) eigs[i] = -(0.5 + 1.5 * rng.next_unit());
  auto assemble = [&](const Vec& d) {
    Mat s(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double acc = 0.0;
        for (int k = 0; k < n; ++k) acc += qmat(i, k) * d[k] * qmat(j, k);
        s(i, j) = acc;
      }
    // exact symmetry
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) s(j, i) = s(i, j);
    return s;
  };
  c.xbar = assemble(eigs);

  Vec veigs(n, 0.0);
  veigs[0] = 0.5 + 1.5 * rng.next_unit();
  c.vbar = assemble(veigs);

  // w in the eigenbasis: kernel diagonal entry zero, everything else free,
  // normalized to unit Frobenius norm.
  Mat wb(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      double g = rng.next_gaussian();
      wb(i, j) = wb(j, i) = g;
    }
  wb(0, 0) = 0.0;
  // Keep the kernel coupling row away from zero so the closed form has
  // magnitude the quotient estimator can resolve.
  double row = 0.0;
  for (int j = 1; j < n; ++j) row += wb(0, j) * wb(0, j);
  double target_row = 0.5 + 0.4 * rng.next_unit();
  double fac = target_row / std::max(std::sqrt(row), 1e-9);
  for (int j = 1; j < n; ++j) {
    wb(0, j) *= fac;
    wb(j, 0) = wb(0, j);
  }
  Mat w(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double acc = 0.0;
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) acc += qmat(i, a) * wb(a, b) * qmat(j, b);
      w(i, j) = acc;
    }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) w(j, i) = w(i, j);
  double fn = std::sqrt(trace_inner(w, w));
  if (fn > 2.5)
    for (auto& e : w.a) e *= 2.5 / fn;  // cap the scale, keep the kernel row
  c.w = w;
  return c;
}

AnchoredPolyhedron random_polyhedron(Rng& rng, int dim, int rows, int active_rows) {
  AnchoredPolyhedron ap;
  ap.anchor = rng.gaussian_vec(dim);
  ap.poly = Polyhedron(dim);
  for (int r = 0; r < rows; ++r) {
    Vec a = rng.gaussian_vec(dim);
    double na = norm2(a);
    while (na < 1e-8) {
      a = rng.gaussian_vec(dim);
      na = norm2(a);
    }
    a = scale(1.0 / na, a);
    double slack = r < active_rows ? 0.0 : 0.2 + rng.next_unit();
    ap.poly.add_ineq(a, dot(a, ap.anchor) + slack);
  }
  return ap;
}

Vec random_clear_direction(Rng& rng, const Polyhedron& poly, const Vec& anchor) {
  for (int attempt = 0; attempt < 200; ++attempt) {
    Vec w = rng.gaussian_vec(poly.dim);
    bool clear = true;
    ActiveSet s = active_set(poly, anchor);
    for (std::size_t j : s.active_ineq) {
      double d = std::abs(dot(poly.ineqs[j].normal, w));
      if (d > 1e-12 && d < 1e-3) clear = false;
    }
    if (clear) return w;
  }
  return Vec(poly.dim, 0.0);
}

PwtdQuery random_pwtd_query(Rng& rng, int max_m) {
  PwtdQuery q;
  const int m = 1 + static_cast<int>(rng.next_u64() % max_m);
  q.params.scad = rng.next_unit() < 0.5;
  q.params.lambda = pick(rng, {0.5, 1.0});
  q.params.shape = q.params.scad ? pick(rng, {2.5, 3.0}) : pick(rng, {1.5, 2.0});
  const double lam = q.params.lambda;
  PwtdFunction rho = q.params.scad ? scad_scalar({lam, q.params.shape})
                                   : mcp_scalar({lam, q.params.shape});
  q.lambda = lam;
  q.psi = separable_sum(rho, m);
  q.y = Vec(m, 0.0);
  q.v = Vec(m, 0.0);
  q.w = Vec(m, 0.0);
  for (int i = 0; i < m; ++i) {
    double u = rng.next_unit();
    if (u < 0.4) {
      // zero coordinate: subgradient from the interval, direction aligned or frozen
      double coin = rng.next_unit();
      if (coin < 0.4) {
        q.v[i] = lam * (2.0 * rng.next_unit() - 1.0);
        q.w[i] = 0.0;
      } else {
        double sign = rng.next_unit() < 0.5 ? 1.0 : -1.0;
        q.v[i] = sign * lam;
        q.w[i] = rng.next_unit() < 0.8 ? sign * (0.2 + rng.next_unit()) : 0.0;
      }
    } else {
      double mag = pick(rng, {0.4 * lam, lam, 1.6 * lam, 3.0 * lam});
      double sign = rng.next_unit() < 0.5 ? 1.0 : -1.0;
      q.y[i] = sign * mag * (0.9 + 0.2 * rng.next_unit());
      q.v[i] = penalty_derivative(rho, q.y[i]);
      q.w[i] = rng.next_gaussian();
    }
  }
  return q;
}

LpConfig random_lp_config(Rng& rng) {
  LpConfig lp;
  const int m = 2 + static_cast<int>(rng.next_u64() % 3);   // multiplier dim
  const int nz = 1 + static_cast<int>(rng.next_u64() % 3);  // decision dim
  Vec lo(m), hi(m);
  for (int i = 0; i < m; ++i) {
    lo[i] = -(0.5 + rng.next_unit());
    hi[i] = 0.5 + rng.next_unit();
  }
  lp.omega = Polyhedron::box(lo, hi);
  // A couple of extra cuts keep the geometry interesting; the box keeps it bounded.
  for (int r = 0; r < 2; ++r) {
    Vec a = rng.gaussian_vec(m);
    lp.omega.add_ineq(a, dot(a, Vec(m, 0.0)) + 0.3 + rng.next_unit());
  }
  lp.b = Mat(m, nz);
  for (auto& e : lp.b.a) e = rng.next_gaussian();
  lp.c = rng.gaussian_vec(m);
  if (rng.next_unit() < 0.5) {
    // Feasible dual: derive vbar from a point of omega.
    Vec u0(m, 0.0);
    for (int i = 0; i < m; ++i) u0[i] = lo[i] + (hi[i] - lo[i]) * rng.next_unit();
    lp.vbar = matvec_t(lp.b, u0);
  } else {
    lp.vbar = rng.gaussian_vec(nz);
  }
  return lp;
}

}  // namespace epicalc::testgen
