#pragma once

#include <vector>

#include "sacn/ad/mlp.hpp"

namespace sacn::core {

/// Twin Q networks over state (+) action plus their Polyak-averaged targets.
template <class S>
struct CriticEnsemble {
  ad::Mlp<S> q1;
  ad::Mlp<S> q2;
  ad::Mlp<S> target1;
  ad::Mlp<S> target2;

  CriticEnsemble() = default;

  template <class Rng>
  CriticEnsemble(ad::Index input_dim, const std::vector<ad::Index>& hidden, Rng& rng) {
    std::vector<ad::Index> sizes{input_dim};
    sizes.insert(sizes.end(), hidden.begin(), hidden.end());
    sizes.push_back(1);
    q1 = ad::Mlp<S>::random(sizes, rng);
    q2 = ad::Mlp<S>::random(sizes, rng);
    target1 = q1;
    target2 = q2;
  }

  /// min_i Q_T,i on rows of state (+) action, batch x 1.
  [[nodiscard]] ad::Matrix<S> target_min(const ad::Matrix<S>& state_action) const {
    return target1.evaluate(state_action).cwiseMin(target2.evaluate(state_action));
  }

  void polyak_update(S coefficient) {
    ad::polyak_blend(target1, q1, coefficient);
    ad::polyak_blend(target2, q2, coefficient);
  }

  std::vector<ad::Parameter<S>*> online_parameters() {
    auto p = q1.parameters();
    auto p2 = q2.parameters();
    p.insert(p.end(), p2.begin(), p2.end());
    return p;
  }
};

}  // namespace sacn::core
