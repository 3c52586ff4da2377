#pragma once

#include <cstddef>
#include <optional>
#include <vector>

namespace epicalc {

using Vec = std::vector<double>;

// Small dense row-major matrix. Everything in this library is desk scale
// (dims <= 64), so no blocking or factorization caching.
struct Mat {
  int rows = 0;
  int cols = 0;
  std::vector<double> a;

  Mat() = default;
  Mat(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, 0.0) {}

  double& operator()(int i, int j) { return a[static_cast<std::size_t>(i) * cols + j]; }
  double operator()(int i, int j) const { return a[static_cast<std::size_t>(i) * cols + j]; }

  static Mat identity(int n) {
    Mat m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }
};

double dot(const Vec& x, const Vec& y);
Vec add(const Vec& x, const Vec& y);
Vec sub(const Vec& x, const Vec& y);
Vec scale(double t, const Vec& x);
// x + t*y
Vec axpy(const Vec& x, double t, const Vec& y);
double norm2(const Vec& x);
double norm_inf(const Vec& x);
// l_q norm, q > 1 (also accepts q = 1 internally for conjugate exponents).
double norm_q(const Vec& x, double q);

Vec matvec(const Mat& m, const Vec& x);
Vec matvec_t(const Mat& m, const Vec& x);  // m^T x
Mat mat_mul(const Mat& a, const Mat& b);
// Trace inner product <a, b> = tr(a^T b).
double trace_inner(const Mat& a, const Mat& b);

// Gradient of u |-> ||u||_q at u != 0: sign(u) o |u|^{q-1} ||u||_q^{1-q}.
Vec qnorm_gradient(const Vec& u, double q);
// Hessian of u |-> ||u||_q at u != 0 (for q < 2 requires nonzero components).
Mat qnorm_hessian(const Vec& u, double q);

// Solves a square system by Gaussian elimination with partial pivoting.
// Returns nullopt when the matrix is singular up to pivot_tol.
std::optional<Vec> solve_square(Mat m, Vec b, double pivot_tol = 1e-12);

// Least-squares solution of m z = b via normal equations (m has full row rank
// in our use sites; falls back to nullopt if the Gram matrix is singular).
std::optional<Vec> solve_least_squares(const Mat& m, const Vec& b);

// Minimum-norm solution of the underdetermined system m z = b (full row
// rank): z = m^T (m m^T)^{-1} b.
std::optional<Vec> solve_min_norm(const Mat& m, const Vec& b);

// Cyclic Jacobi eigendecomposition of a symmetric matrix: a = V diag(w) V^T.
// Good to ~1e-14 relative for the desk-scale matrices used here (n <= 64).
struct EigResult {
  Vec eigenvalues;  // ascending
  Mat eigenvectors; // columns
};
EigResult eig_symmetric(const Mat& a, int max_sweeps = 64);

}  // namespace epicalc
