#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "sacn/ad/adam.hpp"
#include "sacn/ad/policy.hpp"
#include "sacn/core/config.hpp"
#include "sacn/core/critics.hpp"
#include "sacn/core/losses.hpp"
#include "sacn/core/targets.hpp"
#include "sacn/replay/replay_buffer.hpp"

namespace sacn::core {

struct StepMetrics {
  double critic_loss = 0.0;
  double actor_loss = 0.0;
  double temperature_loss = 0.0;
  double alpha = 0.0;
  double clip_bound = 1.0;
  double max_w = 0.0;
  double min_w = 0.0;
  double mean_w = 0.0;
  double clipped_fraction = 0.0;  // ratios strictly above the clip bound
  double grad_norm = 0.0;         // L2 norm of the critic gradient
  std::size_t ratio_count = 0;
  std::size_t overflow_count = 0;
  std::vector<double> max_w_per_tau;  // index tau - 1; NaN when the stratum is empty
};

/// SAC / SACn learner: twin critics with Polyak targets, squashed-Gaussian
/// actor, optional auto-tuned temperature. Not copyable (optimizers hold
/// pointers into the networks).
template <class S>
class SacnLearner {
 public:
  template <class Rng>
  SacnLearner(LearnerConfig cfg, std::size_t state_dim, ad::ActionBox box, Rng& init_rng)
      : cfg_(std::move(cfg)),
        state_dim_(state_dim),
        action_dim_(box.dim()) {
    cfg_.validate();
    policy_ = ad::PolicyNetwork<S>(static_cast<ad::Index>(state_dim), cfg_.actor_hidden,
                                   std::move(box), init_rng);
    critics_ = CriticEnsemble<S>(static_cast<ad::Index>(state_dim + action_dim_),
                                 cfg_.critic_hidden, init_rng);
    log_alpha_ = ad::Parameter<S>(ad::Matrix<S>::Constant(1, 1, static_cast<S>(std::log(cfg_.alpha))));
    entropy_target_ = static_cast<S>(cfg_.resolved_entropy_target(state_dim, action_dim_));
    bind_optimizers();
  }

  SacnLearner(const SacnLearner&) = delete;
  SacnLearner& operator=(const SacnLearner&) = delete;

  /// Samples a batch from `buffer` and applies one update.
  template <class Rng>
  StepMetrics train_step(const replay::ReplayBuffer& buffer, Rng& replay_rng, Rng& noise_rng) {
    return update(buffer.sample_trajectories(cfg_.batch_size, cfg_.n, replay_rng), noise_rng);
  }

  /// Critic update, actor update, temperature update (auto mode), Polyak blend.
  template <class Rng>
  StepMetrics update(const std::vector<replay::Trajectory>& batch, Rng& noise_rng) {
    const S alpha = this->alpha();
    const auto targets = compute_targets(batch, policy_, critics_, alpha, cfg_, noise_rng);

    ad::Matrix<S> states(static_cast<ad::Index>(batch.size()), static_cast<ad::Index>(state_dim_));
    ad::Matrix<S> actions(static_cast<ad::Index>(batch.size()), static_cast<ad::Index>(action_dim_));
    std::vector<std::size_t> lengths(batch.size());
    for (std::size_t b = 0; b < batch.size(); ++b) {
      detail::copy_row(states, static_cast<ad::Index>(b), batch[b].steps.front().state);
      detail::copy_row(actions, static_cast<ad::Index>(b), batch[b].steps.front().action);
      lengths[b] = batch[b].effective_length();
    }

    StepMetrics m;
    {
      critics_.q1.zero_grad();
      critics_.q2.zero_grad();
      ad::Tape<S> tape;
      const auto loss = critic_loss(tape, critics_, detail::concat(states, actions), targets, lengths);
      m.critic_loss = static_cast<double>(loss.value()(0, 0));
      if (!std::isfinite(m.critic_loss)) throw NonFiniteError("critic loss is not finite");
      tape.backward(loss);
      double sq = 0.0;
      for (auto* p : critics_.online_parameters()) sq += static_cast<double>(p->grad.squaredNorm());
      m.grad_norm = std::sqrt(sq);
      critic_opt_.step();
    }

    ad::Matrix<S> log_density;
    {
      const ad::Matrix<S> noise =
          ad::standard_normal<S>(states.rows(), static_cast<ad::Index>(action_dim_), noise_rng);
      policy_.net().zero_grad();
      ad::Tape<S> tape;
      auto al = actor_loss(tape, policy_, critics_, states, noise, alpha);
      m.actor_loss = static_cast<double>(al.loss.value()(0, 0));
      if (!std::isfinite(m.actor_loss)) throw NonFiniteError("actor loss is not finite");
      tape.backward(al.loss);
      actor_opt_.step();
      log_density = std::move(al.log_density);
    }

    if (cfg_.alpha_mode == AlphaMode::Auto) {
      log_alpha_.zero_grad();
      ad::Tape<S> tape;
      const auto loss = temperature_loss(tape, log_alpha_, log_density, entropy_target_);
      m.temperature_loss = static_cast<double>(loss.value()(0, 0));
      tape.backward(loss);
      alpha_opt_.step();
    }

    critics_.polyak_update(static_cast<S>(cfg_.polyak));

    m.alpha = static_cast<double>(this->alpha());
    fill_weight_metrics(targets, m);
    return m;
  }

  /// Current-policy log-densities of the anchor actions (batch x 1).
  ad::Matrix<S> anchor_log_densities(const std::vector<replay::Trajectory>& batch) {
    ad::Matrix<S> states(static_cast<ad::Index>(batch.size()), static_cast<ad::Index>(state_dim_));
    ad::Matrix<S> actions(static_cast<ad::Index>(batch.size()), static_cast<ad::Index>(action_dim_));
    for (std::size_t b = 0; b < batch.size(); ++b) {
      detail::copy_row(states, static_cast<ad::Index>(b), batch[b].steps.front().state);
      detail::copy_row(actions, static_cast<ad::Index>(b), batch[b].steps.front().action);
    }
    return policy_.log_density_values(states, actions);
  }

  [[nodiscard]] S alpha() const {
    return cfg_.alpha_mode == AlphaMode::Auto ? std::exp(log_alpha_.value(0, 0))
                                              : static_cast<S>(cfg_.alpha);
  }
  [[nodiscard]] S entropy_target() const { return entropy_target_; }
  [[nodiscard]] const LearnerConfig& config() const { return cfg_; }
  [[nodiscard]] ad::PolicyNetwork<S>& policy() { return policy_; }
  [[nodiscard]] CriticEnsemble<S>& critics() { return critics_; }
  [[nodiscard]] ad::Parameter<S>& log_alpha() { return log_alpha_; }

 private:
  void bind_optimizers() {
    ad::AdamConfig ac;
    ac.learning_rate = cfg_.learning_rate;
    critic_opt_ = ad::AdamState<S>(critics_.online_parameters(), ac);
    actor_opt_ = ad::AdamState<S>(policy_.net().parameters(), ac);
    alpha_opt_ = ad::AdamState<S>({&log_alpha_}, ac);
  }

  void fill_weight_metrics(const WeightedTargets<S>& t, StepMetrics& m) const {
    m.ratio_count = t.rows();
    m.overflow_count = t.overflow_count;
    m.clip_bound = static_cast<double>(t.clip_bound);
    m.clipped_fraction = t.rows() ? static_cast<double>(t.clipped_count) / static_cast<double>(t.rows()) : 0.0;
    m.max_w_per_tau.assign(cfg_.n, std::numeric_limits<double>::quiet_NaN());
    double sum = 0.0;
    m.max_w = 0.0;
    m.min_w = t.rows() ? 1.0 : 0.0;
    for (std::size_t k = 0; k < t.rows(); ++k) {
      const double w = static_cast<double>(t.weight[k]);
      sum += w;
      m.max_w = std::max(m.max_w, w);
      m.min_w = std::min(m.min_w, w);
      double& slot = m.max_w_per_tau[t.row_tau[k] - 1];
      slot = std::isnan(slot) ? w : std::max(slot, w);
    }
    m.mean_w = t.rows() ? sum / static_cast<double>(t.rows()) : 0.0;
  }

  LearnerConfig cfg_;
  std::size_t state_dim_;
  std::size_t action_dim_;
  ad::PolicyNetwork<S> policy_;
  CriticEnsemble<S> critics_;
  ad::Parameter<S> log_alpha_;
  S entropy_target_ = S(0);
  ad::AdamState<S> critic_opt_;
  ad::AdamState<S> actor_opt_;
  ad::AdamState<S> alpha_opt_;
};

}  // namespace sacn::core
