#pragma once

#include <cmath>
#include <cstddef>
#include <span>

#include "sacn/errors.hpp"

namespace sacn::core {

/// Variance growth of the discounted n-step entropy sum:
/// tau when gamma = 1, else (1 - gamma^(2 tau)) / (1 - gamma^2).
inline double k_factor(std::size_t tau, double gamma) {
  if (tau < 1) throw ConfigError("k_factor: tau must be >= 1");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("k_factor: gamma must lie in (0, 1]");
  if (gamma == 1.0) return static_cast<double>(tau);
  const double lg = std::log(gamma);
  return std::expm1(2.0 * static_cast<double>(tau) * lg) / std::expm1(2.0 * lg);
}

/// Number of policy samples averaged by the tau-sampled entropy estimate.
inline std::size_t entropy_sample_count(std::size_t tau, double gamma) {
  const long k = std::lround(k_factor(tau, gamma));
  return k < 1 ? 1 : static_cast<std::size_t>(k);
}

/// -mean of the first `count` log-densities.
template <class S>
S tau_sampled_entropy(std::span<const S> log_densities, std::size_t count) {
  if (count < 1 || count > log_densities.size()) {
    throw UsageError("tau_sampled_entropy: sample count out of range");
  }
  S acc = 0;
  for (std::size_t j = 0; j < count; ++j) acc += log_densities[j];
  return -acc / static_cast<S>(count);
}

}  // namespace sacn::core
