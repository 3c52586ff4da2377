#include "epicalc/instances.hpp"

#include <cmath>
#include <memory>
#include <stdexcept>

namespace epicalc {

namespace {

Vec slice(const Vec& x, const std::vector<int>& idx) {
  Vec r(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) r[i] = x[idx[i]];
  return r;
}

SmoothPiece scalar_piece(std::function<double(double)> v, std::function<double(double)> d,
                         std::function<double(double)> h) {
  SmoothPiece p;
  p.value = [v](const Vec& y) { return v(y[0]); };
  p.gradient = [d](const Vec& y) { return Vec{d(y[0])}; };
  p.hessian = [h](const Vec& y) {
    Mat m(1, 1);
    m(0, 0) = h(y[0]);
    return m;
  };
  return p;
}

SmoothPiece constant_piece(int dim, double c) {
  SmoothPiece p;
  p.value = [c](const Vec&) { return c; };
  p.gradient = [dim](const Vec&) { return Vec(dim, 0.0); };
  p.hessian = [dim](const Vec&) { return Mat(dim, dim); };
  return p;
}

// Shared hint: when the semiderivative is linear at x, the minimum-norm z
// cancelling the curvature term places the parabolic expansion at the origin
// of the second-order tangent set.
std::function<std::vector<Vec>(const Vec&, const Vec&, const Vec&)> jacobian_hints(
    const InnerMap& inner) {
  return [inner](const Vec& x, const Vec&, const Vec& w) {
    std::vector<Vec> hints;
    if (!inner.jacobian_at) return hints;
    auto j = inner.jacobian_at(x);
    if (!j) return hints;
    Vec curv = inner.parabolic(x, w, Vec(x.size(), 0.0));
    if (auto z = solve_min_norm(*j, scale(-1.0, curv))) hints.push_back(*z);
    return hints;
  };
}

}  // namespace

PwtdFunction scad_scalar(const ScadParams& p) {
  if (p.lambda <= 0.0) throw std::invalid_argument("scad_scalar: lambda must be positive");
  if (p.a <= 2.0) throw std::invalid_argument("scad_scalar: a must exceed 2");
  const double lam = p.lambda, a = p.a;
  const double tail = 0.5 * (a + 1.0) * lam * lam;
  const double den = 2.0 * (a - 1.0);

  std::vector<PwtdPiece> pieces;
  pieces.push_back({Polyhedron::interval(-INFINITY, -a * lam), constant_piece(1, tail)});
  pieces.push_back({Polyhedron::interval(-a * lam, -lam),
                    scalar_piece([lam, a, den](double t) { return (-t * t - 2.0 * a * lam * t - lam * lam) / den; },
                                 [lam, a, den](double t) { return (-2.0 * t - 2.0 * a * lam) / den; },
                                 [den](double) { return -2.0 / den; })});
  pieces.push_back({Polyhedron::interval(-lam, 0.0),
                    scalar_piece([lam](double t) { return -lam * t; },
                                 [lam](double) { return -lam; }, [](double) { return 0.0; })});
  pieces.push_back({Polyhedron::interval(0.0, lam),
                    scalar_piece([lam](double t) { return lam * t; },
                                 [lam](double) { return lam; }, [](double) { return 0.0; })});
  pieces.push_back({Polyhedron::interval(lam, a * lam),
                    scalar_piece([lam, a, den](double t) { return (-t * t + 2.0 * a * lam * t - lam * lam) / den; },
                                 [lam, a, den](double t) { return (-2.0 * t + 2.0 * a * lam) / den; },
                                 [den](double) { return -2.0 / den; })});
  pieces.push_back({Polyhedron::interval(a * lam, INFINITY), constant_piece(1, tail)});

  PwtdFunction rho(1, std::move(pieces));
  rho.regular_flag = true;
  rho.subdiff_provider = [lam, a](const Vec& y) {
    double t = y[0];
    Polyhedron s(1);
    if (std::abs(t) <= kGroupZeroEps) {
      s.add_ineq({1.0}, lam);
      s.add_ineq({-1.0}, lam);
      return s;
    }
    double sign = t > 0 ? 1.0 : -1.0;
    double at = std::abs(t);
    double d = at <= lam ? sign * lam : (at <= a * lam ? sign * (a * lam - at) / (a - 1.0) : 0.0);
    s.add_eq({1.0}, d);
    return s;
  };
  validate_pwtd(rho);
  return rho;
}

PwtdFunction mcp_scalar(const McpParams& p) {
  if (p.lambda <= 0.0) throw std::invalid_argument("mcp_scalar: lambda must be positive");
  if (p.b <= 0.0) throw std::invalid_argument("mcp_scalar: b must be positive");
  const double lam = p.lambda, b = p.b;
  const double tail = 0.5 * lam * lam * b;

  std::vector<PwtdPiece> pieces;
  pieces.push_back({Polyhedron::interval(-INFINITY, -lam * b), constant_piece(1, tail)});
  pieces.push_back({Polyhedron::interval(-lam * b, 0.0),
                    scalar_piece([lam, b](double t) { return -lam * t - t * t / (2.0 * b); },
                                 [lam, b](double t) { return -lam - t / b; },
                                 [b](double) { return -1.0 / b; })});
  pieces.push_back({Polyhedron::interval(0.0, lam * b),
                    scalar_piece([lam, b](double t) { return lam * t - t * t / (2.0 * b); },
                                 [lam, b](double t) { return lam - t / b; },
                                 [b](double) { return -1.0 / b; })});
  pieces.push_back({Polyhedron::interval(lam * b, INFINITY), constant_piece(1, tail)});

  PwtdFunction rho(1, std::move(pieces));
  rho.regular_flag = true;
  rho.subdiff_provider = [lam, b](const Vec& y) {
    double t = y[0];
    Polyhedron s(1);
    if (std::abs(t) <= kGroupZeroEps) {
      s.add_ineq({1.0}, lam);
      s.add_ineq({-1.0}, lam);
      return s;
    }
    double sign = t > 0 ? 1.0 : -1.0;
    double at = std::abs(t);
    double d = at <= lam * b ? sign * lam - t / b : 0.0;
    s.add_eq({1.0}, d);
    return s;
  };
  validate_pwtd(rho);
  return rho;
}

PwtdFunction ramp_clamp() {
  std::vector<PwtdPiece> pieces;
  pieces.push_back({Polyhedron::interval(-INFINITY, 0.0), constant_piece(1, 0.0)});
  pieces.push_back({Polyhedron::interval(0.0, 1.0),
                    scalar_piece([](double t) { return t; }, [](double) { return 1.0; },
                                 [](double) { return 0.0; })});
  pieces.push_back({Polyhedron::interval(1.0, INFINITY), constant_piece(1, 1.0)});
  PwtdFunction h(1, std::move(pieces));
  h.regular_flag = false;  // regular and basic subdifferentials split at the upper knee
  validate_pwtd(h);
  return h;
}

double penalty_lambda(const PwtdFunction& rho) {
  if (!rho.subdiff_provider) throw std::invalid_argument("penalty_lambda: subdifferential unavailable");
  std::vector<Vec> vs = vertices(rho.subdiff_provider({0.0}));
  double lam = 0.0;
  for (const auto& v : vs) lam = std::max(lam, v[0]);
  if (lam <= 0.0) throw std::invalid_argument("penalty_lambda: degenerate subdifferential at 0");
  return lam;
}

double penalty_derivative(const PwtdFunction& rho, double t) {
  return subderivative(rho, {t}, {1.0}).value();
}

PwtdFunction separable_sum(const PwtdFunction& rho_scalar, int m) {
  if (rho_scalar.dim() != 1) throw std::invalid_argument("separable_sum: scalar factor required");
  if (m < 1) throw std::invalid_argument("separable_sum: m must be positive");
  auto scalar = std::make_shared<PwtdFunction>(rho_scalar);
  const std::size_t s = scalar->piece_count();
  std::size_t count = 1;
  for (int j = 0; j < m; ++j) count *= s;

  auto digits = [s, m](std::size_t idx) {
    std::vector<std::size_t> d(m);
    for (int j = 0; j < m; ++j) {
      d[j] = idx % s;
      idx /= s;
    }
    return d;
  };

  PwtdFunction::PieceFactory factory = [scalar, m, digits](std::size_t idx) {
    std::vector<std::size_t> d = digits(idx);
    PwtdPiece out;
    out.region = Polyhedron(m);
    auto parts = std::make_shared<std::vector<PwtdPiece>>();
    for (int j = 0; j < m; ++j) {
      PwtdPiece sp = scalar->piece(d[j]);
      for (const auto& row : sp.region.ineqs) {
        Vec a(m, 0.0);
        a[j] = row.normal[0];
        out.region.add_ineq(a, row.offset);
      }
      for (const auto& row : sp.region.eqs) {
        Vec e(m, 0.0);
        e[j] = row.normal[0];
        out.region.add_eq(e, row.offset);
      }
      parts->push_back(std::move(sp));
    }
    out.fn.value = [parts, m](const Vec& y) {
      double v = 0.0;
      for (int j = 0; j < m; ++j) v += (*parts)[j].fn.value({y[j]});
      return v;
    };
    out.fn.gradient = [parts, m](const Vec& y) {
      Vec g(m);
      for (int j = 0; j < m; ++j) g[j] = (*parts)[j].fn.gradient({y[j]})[0];
      return g;
    };
    out.fn.hessian = [parts, m](const Vec& y) {
      Mat h(m, m);
      for (int j = 0; j < m; ++j) h(j, j) = (*parts)[j].fn.hessian({y[j]})(0, 0);
      return h;
    };
    return out;
  };

  PwtdFunction::Locator locator = [scalar, s, m](const Vec& y) {
    std::vector<std::vector<std::size_t>> per_coord(m);
    for (int j = 0; j < m; ++j) {
      for (std::size_t i = 0; i < s; ++i)
        if (contains(scalar->piece(i).region, {y[j]})) per_coord[j].push_back(i);
      if (per_coord[j].empty()) return std::vector<std::size_t>{};
    }
    // Odometer over digit tuples, most significant digit outermost, so the
    // produced linear indices ascend.
    std::vector<std::size_t> out;
    std::vector<std::size_t> pos(m, 0);
    while (true) {
      std::size_t idx = 0;
      for (int j = m - 1; j >= 0; --j) idx = idx * s + per_coord[j][pos[j]];
      out.push_back(idx);
      int j = 0;
      for (; j < m; ++j) {
        if (++pos[j] < per_coord[j].size()) break;
        pos[j] = 0;
      }
      if (j == m) break;
    }
    std::sort(out.begin(), out.end());
    return out;
  };

  PwtdFunction theta(m, count, std::move(factory), std::move(locator));
  theta.regular_flag = rho_scalar.regular_flag;
  if (rho_scalar.subdiff_provider) {
    auto scalar_sub = rho_scalar.subdiff_provider;
    theta.subdiff_provider = [scalar_sub, m](const Vec& y) {
      Polyhedron s(m);
      for (int j = 0; j < m; ++j) {
        Polyhedron sj = scalar_sub({y[j]});
        for (const auto& row : sj.ineqs) {
          Vec a(m, 0.0);
          a[j] = row.normal[0];
          s.add_ineq(a, row.offset);
        }
        for (const auto& row : sj.eqs) {
          Vec e(m, 0.0);
          e[j] = row.normal[0];
          s.add_eq(e, row.offset);
        }
      }
      return s;
    };
  }
  return theta;
}

PwtdFunction orthant_indicator(int m) {
  if (m < 1) throw std::invalid_argument("orthant_indicator: m must be positive");
  Polyhedron region(m);
  for (int i = 0; i < m; ++i) {
    Vec a(m, 0.0);
    a[i] = 1.0;
    region.add_ineq(a, 0.0);
  }
  std::vector<PwtdPiece> pieces;
  pieces.push_back({std::move(region), constant_piece(m, 0.0)});
  PwtdFunction theta(m, std::move(pieces));
  theta.regular_flag = true;
  theta.subdiff_provider = [m](const Vec& y) {
    Polyhedron s(m);
    for (int i = 0; i < m; ++i) {
      Vec a(m, 0.0);
      if (y[i] < -1e-9) {
        a[i] = 1.0;
        s.add_eq(a, 0.0);  // inactive coordinate pins the multiplier to 0
      } else {
        a[i] = -1.0;
        s.add_ineq(a, 0.0);  // boundary coordinate: multiplier >= 0
      }
    }
    return s;
  };
  return theta;
}

GroupPenalty group_penalty(const PwtdFunction& rho, const GroupStructure& gs) {
  gs.validate();
  if (!rho.regular_flag) throw std::invalid_argument("group_penalty: scalar penalty must be regular");
  if (!rho.subdiff_provider)
    throw std::invalid_argument("group_penalty: scalar penalty needs a subdifferential description");
  if (std::abs(eval(rho, {0.0}).value()) > 1e-12)
    throw std::invalid_argument("group_penalty: penalty must vanish at the origin");
  const double lam = penalty_lambda(rho);
  for (double dir : {1.0, -1.0}) {
    double d = subderivative(rho, {0.0}, {dir}).value();
    if (std::abs(d - lam) > 1e-9)
      throw std::invalid_argument("group_penalty: subdifferential at 0 inconsistent with pieces");
  }

  const int m = static_cast<int>(gs.groups.size());
  GroupPenalty gp;
  gp.gs = gs;
  gp.lambda = lam;
  gp.rho = rho;
  gp.cf.theta = separable_sum(rho, m);
  gp.cf.inner = group_qnorm_map(gs);
  gp.cf.msqc_asserted = true;          // full-domain outer function
  gp.cf.regularity_established = true; // certified for this family

  PwtdFunction rho_copy = rho;
  GroupStructure gs_copy = gs;
  gp.cf.multiplier_candidate = [rho_copy, gs_copy, lam](const Vec& x, const Vec&) {
    const double q = gs_copy.q;
    Vec xi(gs_copy.groups.size());
    for (std::size_t i = 0; i < gs_copy.groups.size(); ++i) {
      Vec xb = slice(x, gs_copy.groups[i]);
      xi[i] = norm_inf(xb) <= kGroupZeroEps ? lam
                                            : penalty_derivative(rho_copy, norm_q(xb, q));
    }
    return xi;
  };
  gp.cf.minimizer_hints = [](const Vec& x, const Vec&, const Vec&) {
    return std::vector<Vec>{Vec(x.size(), 0.0)};
  };
  return gp;
}

Vec subgradient_factory_type1(const GroupPenalty& gp, const Vec& x, const Vec& eta,
                              const std::vector<Vec>& zeta, double eps_sub) {
  const auto& gs = gp.gs;
  const double q = gs.q;
  const double p = gs.conjugate();
  if (eta.size() != gs.groups.size() || zeta.size() != gs.groups.size())
    throw std::invalid_argument("subgradient_factory_type1: per-group data size mismatch");
  Vec v(x.size(), 0.0);
  for (std::size_t i = 0; i < gs.groups.size(); ++i) {
    Vec xb = slice(x, gs.groups[i]);
    if (norm_inf(xb) > kGroupZeroEps) {
      double d = penalty_derivative(gp.rho, norm_q(xb, q));
      Vec g = qnorm_gradient(xb, q);
      for (std::size_t t = 0; t < gs.groups[i].size(); ++t) v[gs.groups[i][t]] = d * g[t];
      continue;
    }
    if (std::abs(eta[i]) > gp.lambda + eps_sub)
      throw std::invalid_argument("not a valid subgradient recipe: eta out of range");
    double np = norm_q(zeta[i], p);
    if (eta[i] >= 0.0 ? np > 1.0 + eps_sub : std::abs(np - 1.0) > eps_sub)
      throw std::invalid_argument("not a valid subgradient recipe: dual norm condition fails");
    for (std::size_t t = 0; t < gs.groups[i].size(); ++t)
      v[gs.groups[i][t]] = eta[i] * zeta[i][t];
  }
  return v;
}

bool validate_subgradient_type1(const GroupPenalty& gp, const Vec& x, const Vec& v,
                                double eps_sub) {
  const auto& gs = gp.gs;
  const double q = gs.q;
  const double p = gs.conjugate();
  for (std::size_t i = 0; i < gs.groups.size(); ++i) {
    Vec xb = slice(x, gs.groups[i]);
    Vec vb = slice(v, gs.groups[i]);
    if (norm_inf(xb) > kGroupZeroEps) {
      double d = penalty_derivative(gp.rho, norm_q(xb, q));
      Vec g = qnorm_gradient(xb, q);
      for (std::size_t t = 0; t < vb.size(); ++t)
        if (std::abs(vb[t] - d * g[t]) > eps_sub * (1.0 + std::abs(d))) return false;
    } else {
      if (norm_q(vb, p) > gp.lambda + eps_sub) return false;
    }
  }
  return true;
}

CompositeFunction qcone_indicator(int n, double q) {
  CompositeFunction cf;
  cf.theta = orthant_indicator(1);
  cf.inner = qcone_residual_map(n, q);
  cf.msqc_asserted = true;  // Slater point exists
  cf.regularity_established = true;
  cf.multiplier_candidate = [](const Vec&, const Vec& v) { return Vec{-v[0]}; };
  auto base_hints = jacobian_hints(cf.inner);
  cf.minimizer_hints = [base_hints](const Vec& x, const Vec& v, const Vec& w) {
    std::vector<Vec> hints{Vec(x.size(), 0.0)};
    for (auto& h : base_hints(x, v, w)) hints.push_back(h);
    return hints;
  };
  return cf;
}

CompositeFunction cone_product(const std::vector<ConeBlock>& blocks) {
  if (blocks.empty()) throw std::invalid_argument("cone_product: need at least one block");
  const int m = static_cast<int>(blocks.size());
  std::vector<InnerMap> maps;
  std::vector<int> offset(m + 1, 0);
  for (int i = 0; i < m; ++i) {
    maps.push_back(qcone_residual_map(blocks[i].n, blocks[i].q));
    offset[i + 1] = offset[i] + blocks[i].n;
  }
  const int n = offset[m];

  auto block_of = [offset](const Vec& x, int i) {
    return Vec(x.begin() + offset[i], x.begin() + offset[i + 1]);
  };

  InnerMap inner;
  inner.dim_in = n;
  inner.dim_out = m;
  inner.kind = MapKind::Custom;
  inner.value = [maps, block_of, m](const Vec& x) {
    Vec y(m);
    for (int i = 0; i < m; ++i) y[i] = maps[i].value(block_of(x, i))[0];
    return y;
  };
  inner.semiderivative = [maps, block_of, m](const Vec& x, const Vec& w) {
    Vec d(m);
    for (int i = 0; i < m; ++i) d[i] = maps[i].semiderivative(block_of(x, i), block_of(w, i))[0];
    return d;
  };
  inner.parabolic = [maps, block_of, m](const Vec& x, const Vec& w, const Vec& z) {
    Vec r(m);
    for (int i = 0; i < m; ++i)
      r[i] = maps[i].parabolic(block_of(x, i), block_of(w, i), block_of(z, i))[0];
    return r;
  };
  inner.scalarized_second = [maps, block_of, m](const Vec& xi, const Vec& x, const Vec& w) {
    double s = 0.0;
    for (int i = 0; i < m; ++i)
      s += maps[i].scalarized_second({xi[i]}, block_of(x, i), block_of(w, i));
    return s;
  };
  inner.jacobian_at = [maps, block_of, offset, n, m](const Vec& x) -> std::optional<Mat> {
    Mat j(m, n);
    for (int i = 0; i < m; ++i) {
      auto ji = maps[i].jacobian_at(block_of(x, i));
      if (!ji) return std::nullopt;
      for (int c = 0; c < ji->cols; ++c) j(i, offset[i] + c) = (*ji)(0, c);
    }
    return j;
  };

  CompositeFunction cf;
  cf.theta = orthant_indicator(m);
  cf.inner = std::move(inner);
  cf.msqc_asserted = true;
  cf.regularity_established = true;
  cf.multiplier_candidate = [offset, m](const Vec&, const Vec& v) {
    Vec xi(m);
    for (int i = 0; i < m; ++i) xi[i] = -v[offset[i]];
    return xi;
  };
  std::vector<InnerMap> maps_copy = maps;
  cf.minimizer_hints = [maps_copy, block_of, offset, n, m](const Vec& x, const Vec&, const Vec& w) {
    std::vector<Vec> hints{Vec(n, 0.0)};
    Vec assembled(n, 0.0);
    bool any = false;
    for (int i = 0; i < m; ++i) {
      Vec xb = block_of(x, i), wb = block_of(w, i);
      auto ji = maps_copy[i].jacobian_at(xb);
      if (!ji) continue;
      Vec curv = maps_copy[i].parabolic(xb, wb, Vec(xb.size(), 0.0));
      if (auto z = solve_min_norm(*ji, scale(-1.0, curv))) {
        for (std::size_t t = 0; t < z->size(); ++t) assembled[offset[i] + t] = (*z)[t];
        any = true;
      }
    }
    if (any) hints.push_back(assembled);
    return hints;
  };
  return cf;
}

CompositeFunction smooth_composite(PwtdFunction theta, InnerMap inner) {
  if (!theta.regular_flag)
    throw std::invalid_argument("smooth_composite: outer function must be regular");
  if (!theta.subdiff_provider)
    throw std::invalid_argument("smooth_composite: outer subdifferential unavailable");
  if (!inner.jacobian_at)
    throw std::invalid_argument("smooth_composite: inner map must expose a Jacobian");
  CompositeFunction cf;
  cf.inner = std::move(inner);
  cf.theta = std::move(theta);
  cf.msqc_asserted = true;  // asserted by the caller through this builder
  cf.regularity_established = true;
  auto base_hints = jacobian_hints(cf.inner);
  cf.minimizer_hints = [base_hints](const Vec& x, const Vec& v, const Vec& w) {
    std::vector<Vec> hints{Vec(x.size(), 0.0)};
    for (auto& h : base_hints(x, v, w)) hints.push_back(h);
    return hints;
  };
  return cf;
}

bool PsdConeInstance::critical_contains(const Mat& xbar, const Mat& vbar, const Mat& w) const {
  return psd_critical_cone_contains(xbar, vbar, w);
}

ExtReal PsdConeInstance::second_subderivative(const Mat& xbar, const Mat& vbar,
                                              const Mat& w) const {
  if (xbar.rows != n) throw std::invalid_argument("PsdConeInstance: dimension mismatch");
  return psd_second_subderivative(xbar, vbar, w);
}

PsdConeInstance psd_cone_instance(int n) {
  if (n < 1 || n > 64) throw std::invalid_argument("psd_cone_instance: n out of range");
  return PsdConeInstance{n};
}

}  // namespace epicalc
