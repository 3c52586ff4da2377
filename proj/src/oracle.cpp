#include "epicalc/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace epicalc {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

void Schedule::validate() const {
  if (tau0 <= 0.0) throw std::invalid_argument("Schedule: tau0 must be positive");
  if (ratio <= 0.0 || ratio >= 1.0) throw std::invalid_argument("Schedule: ratio must be in (0,1)");
  if (levels < 1) throw std::invalid_argument("Schedule: need at least one level");
  if (samples_per_level < 1) throw std::invalid_argument("Schedule: need at least one sample");
  if (radius_factor < 0.0) throw std::invalid_argument("Schedule: radius_factor must be nonnegative");
}

double Schedule::tau(int k) const { return tau0 * std::pow(ratio, k); }

std::uint64_t Rng::next_u64() {
  // splitmix64
  state_ += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = state_;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

double Rng::next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double Rng::next_gaussian() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  double u1 = 0.0;
  do {
    u1 = next_unit();
  } while (u1 <= 0.0);
  double u2 = next_unit();
  double r = std::sqrt(-2.0 * std::log(u1));
  double a = 2.0 * 3.14159265358979323846 * u2;
  spare_ = r * std::sin(a);
  have_spare_ = true;
  return r * std::cos(a);
}

Vec Rng::gaussian_vec(int dim) {
  Vec v(dim);
  for (int i = 0; i < dim; ++i) v[i] = next_gaussian();
  return v;
}

Vec Rng::ball_point(const Vec& center, double radius) {
  const int d = static_cast<int>(center.size());
  Vec dir = gaussian_vec(d);
  double n = norm2(dir);
  if (n == 0.0) return center;
  double r = radius * std::pow(next_unit(), 1.0 / d);
  return axpy(center, r / n, dir);
}

namespace {

// Shared level-by-level driver. make_arg builds the evaluation point from a
// sampled direction; quotient maps (h(point), sample) to the quotient value.
// Samples are drawn sequentially so both execution policies see the same
// points; the per-level min runs in index order for determinism.
struct LevelScan {
  std::vector<double> minima;
  bool divergence = false;
  bool trend_negative = false;
  double slope = std::numeric_limits<double>::quiet_NaN();
};

template <typename QuotientFn>
LevelScan run_levels(const Vec& center, const Schedule& sched, ExecPolicy policy,
                     QuotientFn&& quotient) {
  sched.validate();
  Rng rng(sched.seed);
  LevelScan scan;
  scan.minima.resize(sched.levels, kInf);

  const int n_samples = sched.samples_per_level;
  std::vector<Vec> samples(n_samples);
  std::vector<double> quo(n_samples);

  for (int k = 0; k < sched.levels; ++k) {
    const double tau = sched.tau(k);
    const double radius = sched.radius_factor * tau;
    samples[0] = center;
    for (int s = 1; s < n_samples; ++s) samples[s] = rng.ball_point(center, radius);

    if (policy == ExecPolicy::Parallel) {
#pragma omp parallel for schedule(static)
      for (int s = 0; s < n_samples; ++s) quo[s] = quotient(tau, samples[s]);
    } else {
      for (int s = 0; s < n_samples; ++s) quo[s] = quotient(tau, samples[s]);
    }

    double m = kInf;
    for (int s = 0; s < n_samples; ++s) m = std::min(m, quo[s]);  // infinite samples drop out
    scan.minima[k] = m;
  }

  const int last = sched.levels - 1;
  if (sched.levels >= 3) {
    scan.divergence = true;
    scan.trend_negative = true;
    for (int k = last - 2; k <= last; ++k) {
      if (std::isfinite(scan.minima[k])) scan.divergence = false;
      if (!(scan.minima[k] < -1.0 / sched.tau(k))) scan.trend_negative = false;
    }
  }

  // Slope of log|m_k - m_last| vs log tau_k over the 4 levels before the last.
  double m_last = scan.minima[last];
  if (std::isfinite(m_last)) {
    std::vector<double> xs, ys;
    for (int k = std::max(0, last - 4); k < last; ++k) {
      if (!std::isfinite(scan.minima[k])) continue;
      double diff = std::abs(scan.minima[k] - m_last);
      if (diff <= 0.0) continue;
      xs.push_back(std::log(sched.tau(k)));
      ys.push_back(std::log(diff));
    }
    if (xs.size() >= 2) {
      double mx = 0, my = 0;
      for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
      }
      mx /= xs.size();
      my /= ys.size();
      double num = 0, den = 0;
      for (std::size_t i = 0; i < xs.size(); ++i) {
        num += (xs[i] - mx) * (ys[i] - my);
        den += (xs[i] - mx) * (xs[i] - mx);
      }
      if (den > 0) scan.slope = num / den;
    }
  }
  return scan;
}

OracleEstimate finish(LevelScan&& scan) {
  OracleEstimate est;
  est.level_minima = std::move(scan.minima);
  est.divergence_flag = scan.divergence;
  est.trend_negative = scan.trend_negative;
  est.trend_slope = scan.slope;
  double last = est.level_minima.back();
  est.value = est.divergence_flag || !std::isfinite(last) ? ExtReal::pos_inf() : ExtReal(last);
  return est;
}

double finite_or_inf(const ExtReal& e) {
  if (e.is_neg_inf()) throw std::domain_error("oracle: function value -inf (not a proper function)");
  return e.is_finite() ? e.value() : kInf;
}

}  // namespace

OracleEstimate estimate_subderivative(const Evaluatable& h, const Vec& x, const Vec& w,
                                      const Schedule& sched, ExecPolicy policy) {
  ExtReal h0 = h(x);
  if (!h0.is_finite()) throw std::invalid_argument("estimate_subderivative: h(x) must be finite");
  const double base = h0.value();
  auto scan = run_levels(w, sched, policy, [&](double tau, const Vec& wp) {
    double hv = finite_or_inf(h(axpy(x, tau, wp)));
    return std::isfinite(hv) ? (hv - base) / tau : kInf;
  });
  return finish(std::move(scan));
}

OracleEstimate estimate_second_subderivative(const Evaluatable& h, const Vec& x, const Vec& v,
                                             const Vec& w, const Schedule& sched,
                                             ExecPolicy policy) {
  ExtReal h0 = h(x);
  if (!h0.is_finite())
    throw std::invalid_argument("estimate_second_subderivative: h(x) must be finite");
  const double base = h0.value();
  auto scan = run_levels(w, sched, policy, [&](double tau, const Vec& wp) {
    double hv = finite_or_inf(h(axpy(x, tau, wp)));
    if (!std::isfinite(hv)) return kInf;
    return (hv - base - tau * dot(v, wp)) / (tau * tau / 2.0);
  });
  return finish(std::move(scan));
}

OracleEstimate estimate_parabolic_subderivative(const Evaluatable& h, const Vec& x, const Vec& w,
                                                const ExtReal& dhxw, const Vec& z,
                                                const Schedule& sched, ExecPolicy policy) {
  if (!dhxw.is_finite())
    throw std::invalid_argument("estimate_parabolic_subderivative: dhxw must be finite");
  ExtReal h0 = h(x);
  if (!h0.is_finite())
    throw std::invalid_argument("estimate_parabolic_subderivative: h(x) must be finite");
  const double base = h0.value();
  const double d1 = dhxw.value();
  auto scan = run_levels(z, sched, policy, [&](double tau, const Vec& zp) {
    Vec pt = axpy(axpy(x, tau, w), tau * tau / 2.0, zp);
    double hv = finite_or_inf(h(pt));
    if (!std::isfinite(hv)) return kInf;
    return (hv - base - tau * d1) / (tau * tau / 2.0);
  });
  return finish(std::move(scan));
}

}  // namespace epicalc
