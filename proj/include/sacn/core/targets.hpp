#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "sacn/ad/policy.hpp"
#include "sacn/core/config.hpp"
#include "sacn/core/critics.hpp"
#include "sacn/core/entropy.hpp"
#include "sacn/core/importance.hpp"
#include "sacn/replay/replay_buffer.hpp"

namespace sacn::core {

/// Per (trajectory, tau) rows, trajectory-major, tau ascending from 1.
template <class S>
struct WeightedTargets {
  std::vector<std::size_t> row_trajectory;
  std::vector<std::size_t> row_tau;
  std::vector<S> ratio;   // omega_tau, may hold +inf at 32-bit
  std::vector<S> weight;  // w_tau in [0, 1]
  std::vector<S> target;  // R^tau, detached
  S clip_bound = S(1);
  std::size_t overflow_count = 0;  // ratios that overflowed to +inf
  std::size_t clipped_count = 0;   // ratios strictly above clip_bound

  [[nodiscard]] std::size_t rows() const { return target.size(); }
};

/// Entropy samples averaged for the tau-th target.
inline std::size_t entropy_samples_for(std::size_t tau, const LearnerConfig& cfg) {
  if (!cfg.use_tau_sampled_entropy) return 1;
  return entropy_sample_count(cfg.entropy_tau > 0 ? cfg.entropy_tau : tau, cfg.gamma);
}

/// R^tau = sum_{i<tau} gamma^i (r_i + gamma alpha H_i) + gamma^tau Q_boot.
/// When the tau-th step is a true terminal the last entropy term and the
/// bootstrap are dropped.
template <class S>
S n_step_target(std::span<const S> rewards, std::span<const S> entropies, S bootstrap, S gamma,
                S alpha, bool terminal) {
  const std::size_t tau = rewards.size();
  if (entropies.size() != tau || tau == 0) throw UsageError("n_step_target: length mismatch");
  S acc = 0;
  S discount = 1;
  for (std::size_t i = 0; i < tau; ++i) {
    const bool drop_entropy = terminal && i + 1 == tau;
    acc += discount * (rewards[i] + (drop_entropy ? S(0) : gamma * alpha * entropies[i]));
    discount *= gamma;
  }
  if (!terminal) acc += discount * bootstrap;
  return acc;
}

namespace detail {

template <class S>
void copy_row(ad::Matrix<S>& m, ad::Index r, const std::vector<double>& v) {
  for (std::size_t c = 0; c < v.size(); ++c) m(r, static_cast<ad::Index>(c)) = static_cast<S>(v[c]);
}

template <class S>
ad::Matrix<S> concat(const ad::Matrix<S>& a, const ad::Matrix<S>& b) {
  ad::Matrix<S> out(a.rows(), a.cols() + b.cols());
  out << a, b;
  return out;
}

}  // namespace detail

/// Targets, raw ratios, clip bound, and scaled weights for a batch.
/// Noise is drawn from `rng` in a fixed order: entropy samples for every
/// (trajectory, step, sample) row, then one bootstrap sample per
/// (trajectory, tau).
template <class S, class Rng>
WeightedTargets<S> compute_targets(const std::vector<replay::Trajectory>& batch,
                                   ad::PolicyNetwork<S>& policy, const CriticEnsemble<S>& critics,
                                   S alpha, const LearnerConfig& cfg, Rng& rng) {
  using Mat = ad::Matrix<S>;
  const auto sd = policy.state_dim();
  const auto adim = policy.action_dim();
  const S gamma = static_cast<S>(cfg.gamma);

  std::vector<std::size_t> samples_needed(batch.size());
  std::vector<std::size_t> entropy_offset(batch.size());
  std::vector<std::size_t> row_offset(batch.size());
  ad::Index entropy_rows = 0;
  ad::Index tau_rows = 0;
  ad::Index is_rows = 0;
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const std::size_t len = batch[b].effective_length();
    if (len == 0) throw UsageError("compute_targets: empty trajectory");
    std::size_t k = 1;
    for (std::size_t tau = 1; tau <= len; ++tau) k = std::max(k, entropy_samples_for(tau, cfg));
    samples_needed[b] = k;
    entropy_offset[b] = static_cast<std::size_t>(entropy_rows);
    row_offset[b] = static_cast<std::size_t>(tau_rows);
    entropy_rows += static_cast<ad::Index>(len * k);
    tau_rows += static_cast<ad::Index>(len);
    is_rows += static_cast<ad::Index>(len - 1);
  }

  // The policy network runs once per successor state; entropy and bootstrap
  // samples only replicate its output rows.
  Mat succ_states(tau_rows, sd);
  {
    ad::Index r = 0;
    for (const auto& tr : batch) {
      for (const auto& step : tr.steps) detail::copy_row(succ_states, r++, step.next_state);
    }
  }
  const Mat raw = policy.net().evaluate(succ_states);
  const auto& head = policy.head();

  Mat entropy_logp;
  {
    std::vector<ad::Index> rows;
    rows.reserve(static_cast<std::size_t>(entropy_rows));
    for (std::size_t b = 0; b < batch.size(); ++b) {
      for (std::size_t i = 0; i < batch[b].steps.size(); ++i) {
        for (std::size_t j = 0; j < samples_needed[b]; ++j) {
          rows.push_back(static_cast<ad::Index>(row_offset[b] + i));
        }
      }
    }
    const Mat noise = ad::standard_normal<S>(entropy_rows, adim, rng);
    ad::Tape<S> tape;
    const auto params = head.split(tape.constant(raw(rows, Eigen::all)));
    entropy_logp = head.sample(params, noise).log_density.value();
  }

  // one bootstrap action per (trajectory, tau)
  Mat boot_q;
  {
    const Mat noise = ad::standard_normal<S>(tau_rows, adim, rng);
    ad::Tape<S> tape;
    const Mat actions = head.sample(head.split(tape.constant(raw)), noise).action.value();
    boot_q = critics.target_min(detail::concat(succ_states, actions));
  }

  // current-policy log-densities of the stored follow-up actions
  Mat is_logp;
  if (is_rows > 0) {
    Mat states(is_rows, sd);
    Mat actions(is_rows, adim);
    ad::Index r = 0;
    for (const auto& tr : batch) {
      for (std::size_t i = 1; i < tr.steps.size(); ++i, ++r) {
        detail::copy_row(states, r, tr.steps[i].state);
        detail::copy_row(actions, r, tr.steps[i].action);
      }
    }
    is_logp = policy.log_density_values(states, actions);
  }

  WeightedTargets<S> out;
  out.row_trajectory.reserve(static_cast<std::size_t>(tau_rows));
  ad::Index is_r = 0;
  std::vector<S> rewards;
  std::vector<S> entropies;
  std::vector<S> log_ratios;
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const auto& steps = batch[b].steps;
    const std::size_t len = steps.size();
    log_ratios.clear();
    for (std::size_t i = 1; i < len; ++i, ++is_r) {
      log_ratios.push_back(is_logp(is_r, 0) - static_cast<S>(steps[i].behavior_log_density));
    }
    const std::vector<S> omega = is_ratios(log_ratios);
    rewards.clear();
    for (const auto& st : steps) rewards.push_back(static_cast<S>(st.reward));
    for (std::size_t tau = 1; tau <= len; ++tau) {
      const std::size_t k = entropy_samples_for(tau, cfg);
      entropies.assign(tau, S(0));
      for (std::size_t i = 0; i < tau; ++i) {
        const std::size_t base = entropy_offset[b] + i * samples_needed[b];
        const auto* p = entropy_logp.data() + base;  // column vector: contiguous rows
        entropies[i] = tau_sampled_entropy<S>(std::span<const S>(p, samples_needed[b]), k);
      }
      const S boot = boot_q(static_cast<ad::Index>(row_offset[b] + tau - 1), 0);
      out.row_trajectory.push_back(b);
      out.row_tau.push_back(tau);
      out.ratio.push_back(omega[tau - 1]);
      out.target.push_back(n_step_target<S>(std::span<const S>(rewards.data(), tau),
                                            std::span<const S>(entropies), boot, gamma, alpha,
                                            steps[tau - 1].terminal));
    }
  }

  out.clip_bound = clip_bound(out.ratio, cfg.q_b);
  std::vector<std::size_t> stratum(out.row_tau.size());
  for (std::size_t k = 0; k < stratum.size(); ++k) stratum[k] = out.row_tau[k] - 1;
  out.weight = scale_weights(out.ratio, stratum, out.clip_bound);
  for (S r : out.ratio) {
    if (std::isinf(r)) ++out.overflow_count;
    if (r > out.clip_bound) ++out.clipped_count;
  }
  return out;
}

}  // namespace sacn::core
