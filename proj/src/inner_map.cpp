#include "epicalc/inner_map.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace epicalc {

namespace {

Vec slice(const Vec& x, const std::vector<int>& idx) {
  Vec r(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) r[i] = x[idx[i]];
  return r;
}

bool block_zero(const Vec& u) { return norm_inf(u) <= kGroupZeroEps; }

}  // namespace

int GroupStructure::total_dim() const {
  int n = 0;
  for (const auto& g : groups) n += static_cast<int>(g.size());
  return n;
}

void GroupStructure::validate() const {
  if (q <= 1.0) throw std::invalid_argument("GroupStructure: q must exceed 1");
  const int n = total_dim();
  std::vector<int> seen(n, 0);
  for (const auto& g : groups) {
    if (g.empty()) throw std::invalid_argument("GroupStructure: empty block");
    for (int i : g) {
      if (i < 0 || i >= n) throw std::invalid_argument("GroupStructure: index out of range");
      if (seen[i]++) throw std::invalid_argument("GroupStructure: overlapping blocks");
    }
  }
  for (int c : seen)
    if (!c) throw std::invalid_argument("GroupStructure: blocks do not cover all coordinates");
}

InnerMap group_qnorm_map(const GroupStructure& gs_in) {
  gs_in.validate();
  const GroupStructure gs = gs_in;
  const double q = gs.q;
  const int n = gs.total_dim();
  const int m = static_cast<int>(gs.groups.size());

  InnerMap f;
  f.dim_in = n;
  f.dim_out = m;
  f.kind = MapKind::GroupQNorm;
  f.groups = gs;

  f.value = [gs, q, m](const Vec& x) {
    Vec y(m);
    for (int i = 0; i < m; ++i) y[i] = norm_q(slice(x, gs.groups[i]), q);
    return y;
  };

  f.semiderivative = [gs, q, m](const Vec& x, const Vec& w) {
    Vec d(m);
    for (int i = 0; i < m; ++i) {
      Vec xi = slice(x, gs.groups[i]);
      Vec wi = slice(w, gs.groups[i]);
      d[i] = block_zero(xi) ? norm_q(wi, q) : dot(qnorm_gradient(xi, q), wi);
    }
    return d;
  };

  f.parabolic = [gs, q, m](const Vec& x, const Vec& w, const Vec& z) {
    Vec r(m);
    for (int i = 0; i < m; ++i) {
      Vec xi = slice(x, gs.groups[i]);
      Vec wi = slice(w, gs.groups[i]);
      Vec zi = slice(z, gs.groups[i]);
      if (!block_zero(xi)) {
        r[i] = dot(wi, matvec(qnorm_hessian(xi, q), wi)) + dot(qnorm_gradient(xi, q), zi);
      } else if (!block_zero(wi)) {
        r[i] = dot(qnorm_gradient(wi, q), zi);
      } else {
        r[i] = norm_q(zi, q);
      }
    }
    return r;
  };

  f.scalarized_second = [gs, q, m](const Vec& xi, const Vec& x, const Vec& w) {
    double s = 0.0;
    for (int i = 0; i < m; ++i) {
      Vec xb = slice(x, gs.groups[i]);
      if (block_zero(xb)) continue;
      Vec wb = slice(w, gs.groups[i]);
      s += xi[i] * dot(wb, matvec(qnorm_hessian(xb, q), wb));
    }
    return s;
  };

  f.jacobian_at = [gs, q, n, m](const Vec& x) -> std::optional<Mat> {
    Mat j(m, n);
    for (int i = 0; i < m; ++i) {
      Vec xb = slice(x, gs.groups[i]);
      if (block_zero(xb)) return std::nullopt;  // norm kink at the origin of a block
      Vec g = qnorm_gradient(xb, q);
      for (std::size_t t = 0; t < gs.groups[i].size(); ++t) j(i, gs.groups[i][t]) = g[t];
    }
    return j;
  };

  return f;
}

std::vector<int> group_near_zero_diagnostics(const GroupStructure& gs, const Vec& x,
                                             double warn_below) {
  std::vector<int> out;
  for (std::size_t i = 0; i < gs.groups.size(); ++i) {
    double n = norm_inf(slice(x, gs.groups[i]));
    if (n > kGroupZeroEps && n < warn_below) out.push_back(static_cast<int>(i));
  }
  return out;
}

InnerMap qcone_residual_map(int n, double q) {
  if (n < 2) throw std::invalid_argument("qcone_residual_map: need n >= 2");
  if (q <= 1.0) throw std::invalid_argument("qcone_residual_map: q must exceed 1");

  auto tail = [n](const Vec& x) { return Vec(x.begin() + 1, x.end()); };

  InnerMap f;
  f.dim_in = n;
  f.dim_out = 1;
  f.kind = MapKind::QConeResidual;

  f.value = [q, tail](const Vec& x) { return Vec{norm_q(tail(x), q) - x[0]}; };

  f.semiderivative = [q, tail](const Vec& x, const Vec& w) {
    Vec x2 = tail(x), w2 = tail(w);
    double d = block_zero(x2) ? norm_q(w2, q) : dot(qnorm_gradient(x2, q), w2);
    return Vec{d - w[0]};
  };

  f.parabolic = [q, tail](const Vec& x, const Vec& w, const Vec& z) {
    Vec x2 = tail(x), w2 = tail(w), z2 = tail(z);
    double r;
    if (!block_zero(x2)) {
      r = dot(w2, matvec(qnorm_hessian(x2, q), w2)) + dot(qnorm_gradient(x2, q), z2);
    } else if (!block_zero(w2)) {
      r = dot(qnorm_gradient(w2, q), z2);
    } else {
      r = norm_q(z2, q);
    }
    return Vec{r - z[0]};
  };

  f.scalarized_second = [q, tail](const Vec& xi, const Vec& x, const Vec& w) {
    Vec x2 = tail(x);
    if (block_zero(x2)) return 0.0;
    Vec w2 = tail(w);
    return xi[0] * dot(w2, matvec(qnorm_hessian(x2, q), w2));
  };

  f.jacobian_at = [q, n, tail](const Vec& x) -> std::optional<Mat> {
    Vec x2 = tail(x);
    if (block_zero(x2)) return std::nullopt;
    Mat j(1, n);
    j(0, 0) = -1.0;
    Vec g = qnorm_gradient(x2, q);
    for (int i = 1; i < n; ++i) j(0, i) = g[i - 1];
    return j;
  };

  return f;
}

InnerMap smooth_map(int dim_in, int dim_out,
                    std::function<Vec(const Vec&)> value,
                    std::function<Mat(const Vec&)> jacobian,
                    std::function<std::vector<Mat>(const Vec&)> hessian_tensor,
                    const std::vector<Vec>& probe_points) {
  if (!value || !jacobian || !hessian_tensor)
    throw std::invalid_argument("smooth_map: missing callables");

  // Finite-difference cross-check of the supplied derivatives.
  const double h = 1e-5;
  for (const auto& x : probe_points) {
    if (static_cast<int>(x.size()) != dim_in)
      throw std::invalid_argument("smooth_map: probe point dimension mismatch");
    Mat j = jacobian(x);
    if (j.rows != dim_out || j.cols != dim_in)
      throw std::invalid_argument("smooth_map: Jacobian shape mismatch");
    std::vector<Mat> hs = hessian_tensor(x);
    if (static_cast<int>(hs.size()) != dim_out)
      throw std::invalid_argument("smooth_map: Hessian tensor size mismatch");
    for (int c = 0; c < dim_in; ++c) {
      Vec xp = x, xm = x;
      xp[c] += h;
      xm[c] -= h;
      Vec fp = value(xp), fm = value(xm);
      Mat jp = jacobian(xp), jm = jacobian(xm);
      for (int r = 0; r < dim_out; ++r) {
        double fd = (fp[r] - fm[r]) / (2.0 * h);
        if (std::abs(fd - j(r, c)) > 1e-4 * (1.0 + std::abs(fd)))
          throw std::invalid_argument("smooth_map: derivative data inconsistent (Jacobian)");
        for (int c2 = 0; c2 < dim_in; ++c2) {
          double hd = (jp(r, c2) - jm(r, c2)) / (2.0 * h);
          if (std::abs(hd - hs[r](c2, c)) > 1e-4 * (1.0 + std::abs(hd)))
            throw std::invalid_argument("smooth_map: derivative data inconsistent (Hessian)");
        }
      }
    }
  }

  InnerMap f;
  f.dim_in = dim_in;
  f.dim_out = dim_out;
  f.kind = MapKind::Smooth;
  f.value = value;
  f.semiderivative = [jacobian](const Vec& x, const Vec& w) { return matvec(jacobian(x), w); };
  f.parabolic = [jacobian, hessian_tensor, dim_out](const Vec& x, const Vec& w, const Vec& z) {
    Vec r = matvec(jacobian(x), z);
    std::vector<Mat> hs = hessian_tensor(x);
    for (int i = 0; i < dim_out; ++i) r[i] += dot(w, matvec(hs[i], w));
    return r;
  };
  f.scalarized_second = [hessian_tensor, dim_out](const Vec& xi, const Vec& x, const Vec& w) {
    std::vector<Mat> hs = hessian_tensor(x);
    double s = 0.0;
    for (int i = 0; i < dim_out; ++i) s += xi[i] * dot(w, matvec(hs[i], w));
    return s;
  };
  f.jacobian_at = [jacobian](const Vec& x) -> std::optional<Mat> { return jacobian(x); };
  return f;
}

}  // namespace epicalc
