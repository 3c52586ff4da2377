#include "epicalc/psd_cone.hpp"

#include <cmath>
#include <stdexcept>

namespace epicalc {

namespace {

const double kSqrt2 = std::sqrt(2.0);

void check_symmetric(const Mat& s, const char* who) {
  if (s.rows != s.cols) throw std::invalid_argument(std::string(who) + ": matrix not square");
  for (int i = 0; i < s.rows; ++i)
    for (int j = i + 1; j < s.cols; ++j)
      if (std::abs(s(i, j) - s(j, i)) > 1e-10 * (1.0 + std::abs(s(i, j))))
        throw std::invalid_argument(std::string(who) + ": matrix not symmetric");
}

double frob(const Mat& s) { return std::sqrt(trace_inner(s, s)); }

}  // namespace

int sym_vec_dim(int n) { return n * (n + 1) / 2; }

Vec sym_to_vec(const Mat& s) {
  check_symmetric(s, "sym_to_vec");
  const int n = s.rows;
  Vec v(sym_vec_dim(n));
  int k = 0;
  for (int i = 0; i < n; ++i) {
    v[k++] = s(i, i);
    for (int j = i + 1; j < n; ++j) v[k++] = kSqrt2 * s(i, j);
  }
  return v;
}

Mat vec_to_sym(const Vec& v, int n) {
  if (static_cast<int>(v.size()) != sym_vec_dim(n))
    throw std::invalid_argument("vec_to_sym: length mismatch");
  Mat s(n, n);
  int k = 0;
  for (int i = 0; i < n; ++i) {
    s(i, i) = v[k++];
    for (int j = i + 1; j < n; ++j) {
      s(i, j) = s(j, i) = v[k++] / kSqrt2;
    }
  }
  return s;
}

Mat sym_pseudo_inverse(const Mat& s, double cutoff) {
  check_symmetric(s, "sym_pseudo_inverse");
  EigResult e = eig_symmetric(s);
  const int n = s.rows;
  Mat r(n, n);
  for (int k = 0; k < n; ++k) {
    if (std::abs(e.eigenvalues[k]) <= cutoff) continue;
    double inv = 1.0 / e.eigenvalues[k];
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) r(i, j) += inv * e.eigenvectors(i, k) * e.eigenvectors(j, k);
  }
  return r;
}

bool psd_critical_cone_contains(const Mat& xbar, const Mat& vbar, const Mat& w,
                                const PsdTol& tol) {
  check_symmetric(w, "psd_critical_cone_contains");
  const int n = xbar.rows;
  const double xs = std::max(1.0, frob(xbar));
  const double cutoff = std::max(tol.eps_rank_rel * frob(xbar), 1e-14 * xs);

  EigResult ex = eig_symmetric(xbar);
  std::vector<int> kernel;
  for (int k = 0; k < n; ++k)
    if (std::abs(ex.eigenvalues[k]) <= cutoff) kernel.push_back(k);

  // Compression of w onto the kernel of xbar must be negative semidefinite.
  if (!kernel.empty()) {
    const int d = static_cast<int>(kernel.size());
    Mat comp(d, d);
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) {
        double s = 0.0;
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j)
            s += ex.eigenvectors(i, kernel[a]) * w(i, j) * ex.eigenvectors(j, kernel[b]);
        comp(a, b) = s;
      }
    EigResult ec = eig_symmetric(comp);
    if (ec.eigenvalues.back() > tol.eps_crit * (1.0 + frob(w))) return false;
  }
  double vw = trace_inner(vbar, w);
  return std::abs(vw) <= tol.eps_crit * (1.0 + frob(vbar) * frob(w));
}

std::function<ExtReal(const Vec&)> make_psd_indicator_evaluatable(int n, double eps) {
  return [n, eps](const Vec& v) {
    Mat s = vec_to_sym(v, n);
    EigResult e = eig_symmetric(s);
    double scale = std::max(1.0, frob(s));
    return e.eigenvalues.back() <= eps * scale ? ExtReal(0.0) : ExtReal::pos_inf();
  };
}

ExtReal psd_second_subderivative(const Mat& xbar, const Mat& vbar, const Mat& w,
                                 const PsdTol& tol) {
  check_symmetric(xbar, "psd_second_subderivative");
  check_symmetric(vbar, "psd_second_subderivative");
  check_symmetric(w, "psd_second_subderivative");
  const int n = xbar.rows;
  if (n > 64) throw std::invalid_argument("psd_second_subderivative: n > 64 unsupported");
  if (vbar.rows != n || w.rows != n)
    throw std::invalid_argument("psd_second_subderivative: dimension mismatch");

  const double scale = std::max({1.0, frob(xbar), frob(vbar)});
  EigResult ex = eig_symmetric(xbar);
  if (ex.eigenvalues.back() > tol.eps_psd * scale)
    throw std::invalid_argument("psd_second_subderivative: xbar not negative semidefinite");
  EigResult ev = eig_symmetric(vbar);
  if (ev.eigenvalues.front() < -tol.eps_psd * scale)
    throw std::invalid_argument("psd_second_subderivative: not a subgradient (vbar not PSD)");
  if (std::abs(trace_inner(vbar, xbar)) > tol.eps_psd * scale * scale)
    throw std::invalid_argument("psd_second_subderivative: not a subgradient (complementarity fails)");

  if (!psd_critical_cone_contains(xbar, vbar, w, tol)) return ExtReal::pos_inf();

  const double cutoff = std::max(tol.eps_rank_rel * frob(xbar), 1e-14);
  Mat pinv = sym_pseudo_inverse(xbar, cutoff);
  Mat wpw = mat_mul(mat_mul(w, pinv), w);
  return ExtReal(-2.0 * trace_inner(vbar, wpw));
}

}  // namespace epicalc
