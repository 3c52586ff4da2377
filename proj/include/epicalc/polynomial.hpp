#pragma once

#include <vector>

#include "epicalc/linalg.hpp"

namespace epicalc {

// Sparse multivariate polynomial as a coefficient table, degree <= 4. This is
// the wire format for user-declared smooth pieces and polynomial inner maps.
struct Monomial {
  double coeff = 0.0;
  std::vector<int> powers;  // one exponent per variable
};

struct Polynomial {
  int dim = 0;
  std::vector<Monomial> terms;

  // Throws if a term has the wrong arity, a negative exponent, or total
  // degree above 4.
  void validate() const;

  double value(const Vec& x) const;
  Vec gradient(const Vec& x) const;
  Mat hessian(const Vec& x) const;
};

}  // namespace epicalc
