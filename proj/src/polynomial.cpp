#include "epicalc/polynomial.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace epicalc {

namespace {

double ipow(double x, int e) {
  double r = 1.0;
  for (int i = 0; i < e; ++i) r *= x;
  return r;
}

}  // namespace

void Polynomial::validate() const {
  for (const auto& t : terms) {
    if (static_cast<int>(t.powers.size()) != dim)
      throw std::invalid_argument("Polynomial: exponent arity mismatch");
    int total = 0;
    for (int e : t.powers) {
      if (e < 0) throw std::invalid_argument("Polynomial: negative exponent");
      total += e;
    }
    if (total > 4) throw std::invalid_argument("Polynomial: degree above 4 unsupported");
  }
}

double Polynomial::value(const Vec& x) const {
  double s = 0.0;
  for (const auto& t : terms) {
    double m = t.coeff;
    for (int i = 0; i < dim; ++i) m *= ipow(x[i], t.powers[i]);
    s += m;
  }
  return s;
}

Vec Polynomial::gradient(const Vec& x) const {
  Vec g(dim, 0.0);
  for (const auto& t : terms) {
    for (int i = 0; i < dim; ++i) {
      if (t.powers[i] == 0) continue;
      double m = t.coeff * t.powers[i];
      for (int j = 0; j < dim; ++j) m *= ipow(x[j], j == i ? t.powers[j] - 1 : t.powers[j]);
      g[i] += m;
    }
  }
  return g;
}

Mat Polynomial::hessian(const Vec& x) const {
  Mat h(dim, dim);
  for (const auto& t : terms) {
    for (int i = 0; i < dim; ++i) {
      if (t.powers[i] == 0) continue;
      for (int j = 0; j < dim; ++j) {
        int pj = j == i ? t.powers[j] - 1 : t.powers[j];
        if (pj == 0) continue;
        double m = t.coeff * t.powers[i] * pj;
        for (int k = 0; k < dim; ++k) {
          int pk = t.powers[k];
          if (k == i) --pk;
          if (k == j) --pk;
          m *= ipow(x[k], pk);
        }
        h(i, j) += m;
      }
    }
  }
  return h;
}

}  // namespace epicalc
