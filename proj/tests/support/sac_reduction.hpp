#pragma once

#include <algorithm>
#include <cmath>
#include <random>

#include "sacn/core/learner.hpp"
#include "support/loss_fd.hpp"
#include "support/reference_sac.hpp"

namespace sacn::testing {

struct ReductionError {
  double targets = 0.0;     // max |R_learner - y_reference|
  double parameters = 0.0;  // max |theta_learner - theta_reference| after one update
};

inline double max_abs_diff(const ad::Mlp<double>& a, const ad::Mlp<double>& b) {
  double m = 0.0;
  for (std::size_t l = 0; l < a.layers().size(); ++l) {
    m = std::max(m, (a.layers()[l].weight.value - b.layers()[l].weight.value).cwiseAbs().maxCoeff());
    m = std::max(m, (a.layers()[l].bias.value - b.layers()[l].bias.value).cwiseAbs().maxCoeff());
  }
  return m;
}

inline SacBatch to_sac_batch(const std::vector<replay::Trajectory>& batch, std::size_t sd,
                             std::size_t adim) {
  const auto B = static_cast<ad::Index>(batch.size());
  SacBatch out{ad::Matrix<double>(B, static_cast<ad::Index>(sd)),
               ad::Matrix<double>(B, static_cast<ad::Index>(adim)), ad::Matrix<double>(B, 1),
               ad::Matrix<double>(B, static_cast<ad::Index>(sd)), ad::Matrix<double>(B, 1)};
  for (ad::Index b = 0; b < B; ++b) {
    const auto& t = batch[static_cast<std::size_t>(b)].steps.front();
    for (std::size_t k = 0; k < sd; ++k) {
      out.s(b, static_cast<ad::Index>(k)) = t.state[k];
      out.s2(b, static_cast<ad::Index>(k)) = t.next_state[k];
    }
    for (std::size_t k = 0; k < adim; ++k) out.a(b, static_cast<ad::Index>(k)) = t.action[k];
    out.r(b, 0) = t.reward;
    out.done(b, 0) = t.terminal ? 1.0 : 0.0;
  }
  return out;
}

/// n = 1 learner without tau-sampled entropy against the reference SAC on
/// one random batch: targets, then one full update.
inline ReductionError sac_reduction_error(std::uint64_t seed, std::size_t batch_size = 16) {
  std::mt19937_64 rng(seed);
  core::LearnerConfig cfg;
  cfg.n = 1;
  cfg.use_tau_sampled_entropy = false;
  cfg.gamma = 0.99;
  cfg.batch_size = batch_size;
  cfg.actor_hidden = {16, 16};
  cfg.critic_hidden = {16, 16};
  cfg.alpha = 0.2;
  cfg.learning_rate = 1e-2;  // large enough for the update to move every parameter visibly
  core::SacnLearner<double> learner(cfg, 3, ad::ActionBox::symmetric(1, 2.0), rng);
  // desynchronize targets from online critics so the blend is exercised
  learner.critics().target1 = ad::Mlp<double>::random(learner.critics().q1.sizes(), rng);
  learner.critics().target2 = ad::Mlp<double>::random(learner.critics().q2.sizes(), rng);
  const auto batch = random_batch(learner.policy(), batch_size, 1, rng);

  auto& c = learner.critics();
  ReferenceSac ref(learner.policy(), c.q1, c.q2, c.target1, c.target2,
                   learner.log_alpha().value(0, 0), cfg.gamma, cfg.polyak, cfg.learning_rate,
                   learner.entropy_target(), true);
  const SacBatch sb = to_sac_batch(batch, 3, 1);

  ReductionError err;
  {
    std::mt19937_64 r1(seed ^ 0xabcdefULL);
    std::mt19937_64 r2(seed ^ 0xabcdefULL);
    const auto wt = core::compute_targets(batch, learner.policy(), c, learner.alpha(), cfg, r1);
    const ad::Matrix<double> y = ref.targets(sb, r2);
    for (std::size_t k = 0; k < wt.rows(); ++k) {
      err.targets = std::max(err.targets, std::abs(wt.target[k] - y(static_cast<ad::Index>(k), 0)));
      if (wt.weight[k] != 1.0) err.targets = std::max(err.targets, 1.0);
    }
  }
  {
    std::mt19937_64 r1(seed + 17);
    std::mt19937_64 r2(seed + 17);
    learner.update(batch, r1);
    ref.step(sb, r2);
    err.parameters = std::max({max_abs_diff(learner.policy().net(), ref.policy().net()),
                               max_abs_diff(c.q1, ref.q1()), max_abs_diff(c.q2, ref.q2()),
                               max_abs_diff(c.target1, ref.t1()), max_abs_diff(c.target2, ref.t2()),
                               std::abs(learner.log_alpha().value(0, 0) - ref.log_alpha())});
  }
  return err;
}

}  // namespace sacn::testing
