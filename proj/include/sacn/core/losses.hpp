#pragma once

#include <type_traits>
#include <vector>

#include "sacn/ad/ops.hpp"
#include "sacn/ad/policy.hpp"
#include "sacn/core/critics.hpp"
#include "sacn/core/targets.hpp"

namespace sacn::core {

/// (1/B) sum_b (1/L_b) sum_tau w_tau sum_i (Q_i(s_t, a_t) - R^tau)^2.
/// `state_action` holds one row per trajectory; gradients reach q1 and q2.
template <class S>
ad::Var<S> critic_loss(ad::Tape<S>& tape, CriticEnsemble<S>& critics,
                       const std::type_identity_t<ad::Matrix<S>>& state_action,
                       const WeightedTargets<S>& targets,
                       const std::vector<std::size_t>& lengths) {
  const auto rows = static_cast<ad::Index>(targets.rows());
  const auto batch = static_cast<S>(lengths.size());
  std::vector<ad::Index> index(targets.rows());
  ad::Matrix<S> r(rows, 1);
  ad::Matrix<S> coef(rows, 1);
  for (std::size_t k = 0; k < targets.rows(); ++k) {
    const std::size_t b = targets.row_trajectory[k];
    index[k] = static_cast<ad::Index>(b);
    r(static_cast<ad::Index>(k), 0) = targets.target[k];
    coef(static_cast<ad::Index>(k), 0) =
        targets.weight[k] / (batch * static_cast<S>(lengths[b]));
  }
  const auto sa = tape.constant(state_action);
  const auto rv = tape.constant(r);
  const auto cv = tape.constant(coef);
  auto term = [&](ad::Mlp<S>& q) {
    const auto err = ad::sub(ad::gather_rows(q.forward(tape, sa), index), rv);
    return ad::sum(ad::mul(ad::square(err), cv));
  };
  return ad::add(term(critics.q1), term(critics.q2));
}

template <class S>
struct ActorLoss {
  ad::Var<S> loss;
  ad::Matrix<S> log_density;  // detached, batch x 1
};

/// mean(alpha log pi(beta|s) - min_i Q_i(s, beta)) with reparameterized beta;
/// critics are frozen, so gradients reach only the policy.
template <class S>
ActorLoss<S> actor_loss(ad::Tape<S>& tape, ad::PolicyNetwork<S>& policy,
                        CriticEnsemble<S>& critics, const ad::Matrix<S>& states,
                        const ad::Matrix<S>& noise, S alpha) {
  auto sample = policy.sample(tape, states, noise);
  const auto sa = ad::concat_cols(tape.constant(states), sample.action);
  const auto q = ad::minimum(critics.q1.forward(tape, sa, ad::Binding::Frozen),
                             critics.q2.forward(tape, sa, ad::Binding::Frozen));
  return {ad::mean(ad::sub(ad::scale(sample.log_density, alpha), q)), sample.log_density.value()};
}

/// -exp(log_alpha) * mean(log pi + entropy_target); log pi is detached.
template <class S>
ad::Var<S> temperature_loss(ad::Tape<S>& tape, ad::Parameter<S>& log_alpha,
                            const std::type_identity_t<ad::Matrix<S>>& log_density,
                            std::type_identity_t<S> entropy_target) {
  const S m = log_density.mean() + entropy_target;
  return ad::scale(ad::exp(tape.parameter(log_alpha)), -m);
}

}  // namespace sacn::core
