#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace epicalc {

// Extended real value: a finite double, +inf, or -inf.
// Addition follows the one-sided convention used throughout the library:
// inf + finite = inf, inf + inf = inf, and inf + (-inf) is rejected as a
// domain error instead of silently producing NaN.
class ExtReal {
 public:
  ExtReal() : v_(0.0) {}
  ExtReal(double v) : v_(v) {
    if (std::isnan(v)) throw std::domain_error("ExtReal: NaN is not an extended real");
  }

  static ExtReal pos_inf() { return ExtReal(std::numeric_limits<double>::infinity()); }
  static ExtReal neg_inf() { return ExtReal(-std::numeric_limits<double>::infinity()); }

  bool is_finite() const { return std::isfinite(v_); }
  bool is_pos_inf() const { return std::isinf(v_) && v_ > 0; }
  bool is_neg_inf() const { return std::isinf(v_) && v_ < 0; }

  // Finite payload; throws on infinities so callers cannot misuse a flag value.
  double value() const {
    if (!is_finite()) throw std::domain_error("ExtReal: value() on infinite value");
    return v_;
  }

  // Raw double, with IEEE infinities preserved. For serialization and comparisons.
  double raw() const { return v_; }

  ExtReal operator+(const ExtReal& o) const {
    if ((is_pos_inf() && o.is_neg_inf()) || (is_neg_inf() && o.is_pos_inf()))
      throw std::domain_error("ExtReal: inf - inf");
    return ExtReal(v_ + o.v_);
  }
  ExtReal operator-() const { return ExtReal(-v_); }
  ExtReal operator-(const ExtReal& o) const { return *this + (-o); }

  // Positive scaling: t*inf = inf for t > 0.
  ExtReal scaled(double t) const {
    if (t <= 0.0) throw std::invalid_argument("ExtReal::scaled requires t > 0");
    return ExtReal(t * v_);
  }

  bool operator==(const ExtReal& o) const { return v_ == o.v_; }
  bool operator!=(const ExtReal& o) const { return v_ != o.v_; }
  bool operator<(const ExtReal& o) const { return v_ < o.v_; }
  bool operator<=(const ExtReal& o) const { return v_ <= o.v_; }
  bool operator>(const ExtReal& o) const { return v_ > o.v_; }
  bool operator>=(const ExtReal& o) const { return v_ >= o.v_; }

  std::string str() const {
    if (is_pos_inf()) return "+inf";
    if (is_neg_inf()) return "-inf";
    return std::to_string(v_);
  }

 private:
  double v_;
};

// |a - b| <= tol, treating equal infinities as matching.
inline bool ext_close(const ExtReal& a, const ExtReal& b, double tol) {
  if (!a.is_finite() || !b.is_finite()) return a == b;
  return std::abs(a.value() - b.value()) <= tol;
}

}  // namespace epicalc
