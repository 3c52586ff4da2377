#include "epicalc/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace epicalc {

double dot(const Vec& x, const Vec& y) {
  if (x.size() != y.size()) throw std::invalid_argument("dot: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

Vec add(const Vec& x, const Vec& y) {
  if (x.size() != y.size()) throw std::invalid_argument("add: dimension mismatch");
  Vec r(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) r[i] = x[i] + y[i];
  return r;
}

Vec sub(const Vec& x, const Vec& y) {
  if (x.size() != y.size()) throw std::invalid_argument("sub: dimension mismatch");
  Vec r(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) r[i] = x[i] - y[i];
  return r;
}

Vec scale(double t, const Vec& x) {
  Vec r(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) r[i] = t * x[i];
  return r;
}

Vec axpy(const Vec& x, double t, const Vec& y) {
  if (x.size() != y.size()) throw std::invalid_argument("axpy: dimension mismatch");
  Vec r(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) r[i] = x[i] + t * y[i];
  return r;
}

double norm2(const Vec& x) { return std::sqrt(dot(x, x)); }

double norm_inf(const Vec& x) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::abs(v));
  return m;
}

double norm_q(const Vec& x, double q) {
  if (q < 1.0) throw std::invalid_argument("norm_q: q must be >= 1");
  if (x.empty()) return 0.0;
  // Scale by the max to avoid overflow for large q.
  double m = norm_inf(x);
  if (m == 0.0) return 0.0;
  double s = 0.0;
  for (double v : x) s += std::pow(std::abs(v) / m, q);
  return m * std::pow(s, 1.0 / q);
}

Vec matvec(const Mat& m, const Vec& x) {
  if (static_cast<int>(x.size()) != m.cols) throw std::invalid_argument("matvec: dimension mismatch");
  Vec r(m.rows, 0.0);
  for (int i = 0; i < m.rows; ++i) {
    double s = 0.0;
    for (int j = 0; j < m.cols; ++j) s += m(i, j) * x[j];
    r[i] = s;
  }
  return r;
}

Vec matvec_t(const Mat& m, const Vec& x) {
  if (static_cast<int>(x.size()) != m.rows) throw std::invalid_argument("matvec_t: dimension mismatch");
  Vec r(m.cols, 0.0);
  for (int i = 0; i < m.rows; ++i)
    for (int j = 0; j < m.cols; ++j) r[j] += m(i, j) * x[i];
  return r;
}

Mat mat_mul(const Mat& a, const Mat& b) {
  if (a.cols != b.rows) throw std::invalid_argument("mat_mul: shape mismatch");
  Mat r(a.rows, b.cols);
  for (int i = 0; i < a.rows; ++i)
    for (int k = 0; k < a.cols; ++k) {
      double v = a(i, k);
      if (v == 0.0) continue;
      for (int j = 0; j < b.cols; ++j) r(i, j) += v * b(k, j);
    }
  return r;
}

double trace_inner(const Mat& a, const Mat& b) {
  if (a.rows != b.rows || a.cols != b.cols) throw std::invalid_argument("trace_inner: shape mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.a.size(); ++i) s += a.a[i] * b.a[i];
  return s;
}

Vec qnorm_gradient(const Vec& u, double q) {
  double n = norm_q(u, q);
  if (n == 0.0) throw std::invalid_argument("qnorm_gradient: zero point");
  Vec g(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    double s = (u[i] > 0) - (u[i] < 0);
    g[i] = s * std::pow(std::abs(u[i]), q - 1.0) * std::pow(n, 1.0 - q);
  }
  return g;
}

Mat qnorm_hessian(const Vec& u, double q) {
  double n = norm_q(u, q);
  if (n == 0.0) throw std::invalid_argument("qnorm_hessian: zero point");
  const int d = static_cast<int>(u.size());
  Vec g = qnorm_gradient(u, q);
  Mat h(d, d);
  // (q-1) [ n^{1-q} diag(|u|^{q-2}) - n^{-1} g g^T ]
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      double v = -(q - 1.0) * g[i] * g[j] / n;
      if (i == j) v += (q - 1.0) * std::pow(std::abs(u[i]), q - 2.0) * std::pow(n, 1.0 - q);
      h(i, j) = v;
    }
  }
  return h;
}

std::optional<Vec> solve_square(Mat m, Vec b, double pivot_tol) {
  if (m.rows != m.cols || static_cast<int>(b.size()) != m.rows)
    throw std::invalid_argument("solve_square: shape mismatch");
  const int n = m.rows;
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  for (int k = 0; k < n; ++k) {
    int piv = k;
    double best = std::abs(m(k, k));
    for (int i = k + 1; i < n; ++i) {
      if (std::abs(m(i, k)) > best) {
        best = std::abs(m(i, k));
        piv = i;
      }
    }
    if (best <= pivot_tol) return std::nullopt;
    if (piv != k) {
      for (int j = 0; j < n; ++j) std::swap(m(k, j), m(piv, j));
      std::swap(b[k], b[piv]);
    }
    for (int i = k + 1; i < n; ++i) {
      double f = m(i, k) / m(k, k);
      if (f == 0.0) continue;
      for (int j = k; j < n; ++j) m(i, j) -= f * m(k, j);
      b[i] -= f * b[k];
    }
  }
  Vec x(n, 0.0);
  for (int i = n - 1; i >= 0; --i) {
    double s = b[i];
    for (int j = i + 1; j < n; ++j) s -= m(i, j) * x[j];
    x[i] = s / m(i, i);
  }
  return x;
}

std::optional<Vec> solve_least_squares(const Mat& m, const Vec& b) {
  // Normal equations m^T m z = m^T b; desk-scale so conditioning is acceptable.
  Mat g(m.cols, m.cols);
  for (int i = 0; i < m.cols; ++i)
    for (int j = 0; j < m.cols; ++j) {
      double s = 0.0;
      for (int k = 0; k < m.rows; ++k) s += m(k, i) * m(k, j);
      g(i, j) = s;
    }
  return solve_square(g, matvec_t(m, b));
}

std::optional<Vec> solve_min_norm(const Mat& m, const Vec& b) {
  Mat gram(m.rows, m.rows);
  for (int i = 0; i < m.rows; ++i)
    for (int j = 0; j < m.rows; ++j) {
      double s = 0.0;
      for (int k = 0; k < m.cols; ++k) s += m(i, k) * m(j, k);
      gram(i, j) = s;
    }
  auto y = solve_square(gram, b);
  if (!y) return std::nullopt;
  return matvec_t(m, *y);
}

EigResult eig_symmetric(const Mat& a_in, int max_sweeps) {
  if (a_in.rows != a_in.cols) throw std::invalid_argument("eig_symmetric: not square");
  const int n = a_in.rows;
  Mat a = a_in;
  Mat v = Mat::identity(n);

  double scale = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) scale = std::max(scale, std::abs(a(i, j)));
  if (scale == 0.0) scale = 1.0;
  const double tol = 1e-15 * scale;

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (std::sqrt(off) <= tol) break;
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        if (std::abs(a(p, q)) <= tol * 1e-2) continue;
        double theta = 0.5 * std::atan2(2.0 * a(p, q), a(q, q) - a(p, p));
        double c = std::cos(theta), s = std::sin(theta);
        for (int k = 0; k < n; ++k) {
          double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (int k = 0; k < n; ++k) {
          double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int i, int j) { return a(i, i) < a(j, j); });
  EigResult r;
  r.eigenvalues.resize(n);
  r.eigenvectors = Mat(n, n);
  for (int c = 0; c < n; ++c) {
    r.eigenvalues[c] = a(order[c], order[c]);
    for (int k = 0; k < n; ++k) r.eigenvectors(k, c) = v(k, order[c]);
  }
  return r;
}

}  // namespace epicalc
