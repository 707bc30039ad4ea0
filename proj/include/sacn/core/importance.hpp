#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "sacn/errors.hpp"

namespace sacn::core {

/// omega_1 = 1 and omega_tau = exp(sum of the first tau-1 per-step log
/// ratios log pi(a|s) - log pi_t(a|s)). Exponentiation happens in S, so a
/// 32-bit run may return +inf.
template <class S>
std::vector<S> is_ratios(const std::vector<S>& step_log_ratios) {
  std::vector<S> out;
  out.reserve(step_log_ratios.size() + 1);
  out.push_back(S(1));
  S acc = 0;
  for (S lr : step_log_ratios) {
    acc += lr;
    out.push_back(std::exp(acc));
  }
  return out;
}

/// Quantile of order q by linear interpolation at rank q (m - 1) over the
/// sorted ratios. +inf sorts last; if the interpolation touches an infinite
/// value the result falls back to the largest finite ratio, or 1 if none.
template <class S>
S clip_bound(std::vector<S> ratios, double q) {
  if (ratios.empty()) throw UsageError("clip_bound: empty batch");
  if (!(q > 0.0 && q <= 1.0)) throw ConfigError("clip_bound: q must lie in (0, 1]");
  for (S r : ratios) {
    if (std::isnan(r) || r < S(0)) throw UsageError("clip_bound: ratios must be >= 0");
  }
  std::sort(ratios.begin(), ratios.end());
  const double pos = q * static_cast<double>(ratios.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = static_cast<std::size_t>(std::ceil(pos));
  if (std::isinf(ratios[hi])) {
    for (auto it = ratios.rbegin(); it != ratios.rend(); ++it) {
      if (std::isfinite(*it)) return *it;
    }
    return S(1);
  }
  const double frac = pos - static_cast<double>(lo);
  return static_cast<S>(static_cast<double>(ratios[lo]) +
                        frac * (static_cast<double>(ratios[hi]) - static_cast<double>(ratios[lo])));
}

/// w = min(omega, b) / max over the stratum of min(omega, b). Entries with
/// the same stratum id (the tau index) are normalized together. A stratum
/// whose clipped maximum is 0 gets weight 1 throughout.
template <class S>
std::vector<S> scale_weights(const std::vector<S>& ratios, const std::vector<std::size_t>& stratum,
                             S b) {
  if (ratios.size() != stratum.size()) throw UsageError("scale_weights: size mismatch");
  if (!std::isfinite(b) || b < S(0)) throw UsageError("scale_weights: b must be finite");
  std::size_t strata = 0;
  for (auto s : stratum) strata = std::max(strata, s + 1);
  std::vector<S> denom(strata, S(0));
  std::vector<S> clipped(ratios.size());
  for (std::size_t k = 0; k < ratios.size(); ++k) {
    clipped[k] = std::min(ratios[k], b);
    denom[stratum[k]] = std::max(denom[stratum[k]], clipped[k]);
  }
  std::vector<S> w(ratios.size());
  for (std::size_t k = 0; k < ratios.size(); ++k) {
    const S d = denom[stratum[k]];
    w[k] = d > S(0) ? clipped[k] / d : S(1);
  }
  return w;
}

}  // namespace sacn::core
