#pragma once

#include <algorithm>
#include <boost/math/special_functions/beta.hpp>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "sacn/errors.hpp"

namespace sacn::harness {

inline double mean(const std::vector<double>& v) {
  if (v.empty()) throw UsageError("mean of an empty sample");
  double acc = 0.0;
  for (double x : v) acc += x - v.front();
  return v.front() + acc / static_cast<double>(v.size());
}

/// Unbiased sample variance (n - 1 denominator).
inline double variance(const std::vector<double>& v) {
  if (v.size() < 2) throw UsageError("variance needs at least two values");
  const double m = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return ss / static_cast<double>(v.size() - 1);
}

inline double standard_error(const std::vector<double>& v) {
  return std::sqrt(variance(v) / static_cast<double>(v.size()));
}

/// Student-t CDF through the regularized incomplete beta function.
inline double student_t_cdf(double t, double df) {
  if (!(df > 0.0)) throw UsageError("student_t_cdf: df must be > 0");
  if (std::isinf(t)) return t > 0 ? 1.0 : 0.0;
  const double x = df / (df + t * t);
  const double tail = 0.5 * boost::math::ibeta(0.5 * df, 0.5, x);
  return t > 0 ? 1.0 - tail : tail;
}

struct WelchResult {
  double t = 0.0;
  double df = 0.0;
  double p = 0.5;  // one-sided P(mean_a >= mean_b)
};

/// Welch's unequal-variance t-test reported as the Student-t CDF at t.
/// Both variances zero: p = 0.5 when the means agree, else 0 or 1.
inline WelchResult welch(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() < 2 || b.size() < 2) throw UsageError("welch: each sample needs >= 2 values");
  const double ma = mean(a);
  const double mb = mean(b);
  const double va = variance(a) / static_cast<double>(a.size());
  const double vb = variance(b) / static_cast<double>(b.size());
  WelchResult r;
  if (va + vb == 0.0) {
    r.t = ma == mb ? 0.0 : (ma > mb ? HUGE_VAL : -HUGE_VAL);
    r.df = static_cast<double>(a.size() + b.size() - 2);
    r.p = ma == mb ? 0.5 : (ma > mb ? 1.0 : 0.0);
    return r;
  }
  r.t = (ma - mb) / std::sqrt(va + vb);
  r.df = (va + vb) * (va + vb) /
         (va * va / static_cast<double>(a.size() - 1) + vb * vb / static_cast<double>(b.size() - 1));
  r.p = student_t_cdf(r.t, r.df);
  return r;
}

inline double welch_p(const std::vector<double>& a, const std::vector<double>& b) {
  return welch(a, b).p;
}

struct EvalPoint {
  std::int64_t timestep = 0;
  double mean_return = 0.0;
};

/// Mean of the per-evaluation mean returns with timestep in the final
/// `window` steps, i.e. timestep > last - window.
inline double tail_mean(const std::vector<EvalPoint>& points, std::int64_t window) {
  if (points.empty()) throw UsageError("tail_mean: no evaluation points");
  std::int64_t last = points.front().timestep;
  for (const auto& p : points) last = std::max(last, p.timestep);
  std::vector<double> v;
  for (const auto& p : points) {
    if (p.timestep > last - window) v.push_back(p.mean_return);
  }
  if (v.empty()) throw UsageError("tail_mean: window covers no evaluation point");
  return mean(v);
}

}  // namespace sacn::harness
