#pragma once

#include <vector>

#include "sacn/ad/mlp.hpp"
#include "sacn/ad/squashed_gaussian.hpp"

namespace sacn::ad {

/// Squashed-Gaussian actor: an Mlp from states to (mean, log-std) followed
/// by a SquashedGaussianHead.
template <class S>
class PolicyNetwork {
 public:
  using Head = SquashedGaussianHead<S>;

  PolicyNetwork() = default;

  template <class Rng>
  PolicyNetwork(Index state_dim, const std::vector<Index>& hidden, ActionBox box, Rng& rng)
      : head_(std::move(box)) {
    std::vector<Index> sizes{state_dim};
    sizes.insert(sizes.end(), hidden.begin(), hidden.end());
    sizes.push_back(2 * head_.dim());
    net_ = Mlp<S>::random(std::move(sizes), rng);
  }

  PolicyNetwork(Mlp<S> net, ActionBox box) : net_(std::move(net)), head_(std::move(box)) {
    if (net_.output_size() != 2 * head_.dim()) {
      throw ConfigError("PolicyNetwork: network output must be 2 * action dim");
    }
  }

  typename Head::Params params(Tape<S>& tape, const Matrix<S>& states,
                               Binding binding = Binding::Trainable) {
    return head_.split(net_.forward(tape, tape.constant(states), binding));
  }

  typename Head::Sample sample(Tape<S>& tape, const Matrix<S>& states, const Matrix<S>& noise,
                               Binding binding = Binding::Trainable) {
    return head_.sample(params(tape, states, binding), noise);
  }

  Var<S> log_density(Tape<S>& tape, const Matrix<S>& states, const Matrix<S>& actions,
                     Binding binding = Binding::Trainable) {
    return head_.log_density(params(tape, states, binding), actions);
  }

  /// Log-densities without gradient tracking (batch x 1).
  Matrix<S> log_density_values(const Matrix<S>& states, const Matrix<S>& actions) {
    Tape<S> tape;
    return log_density(tape, states, actions, Binding::Frozen).value();
  }

  /// Deterministic evaluation action tanh(mean), mapped into the box.
  Matrix<S> mean_action(const Matrix<S>& states) const {
    const Matrix<S> raw = net_.evaluate(states);
    return head_.mean_action(raw.leftCols(head_.dim()));
  }

  [[nodiscard]] Mlp<S>& net() { return net_; }
  [[nodiscard]] const Mlp<S>& net() const { return net_; }
  [[nodiscard]] const Head& head() const { return head_; }
  [[nodiscard]] Index action_dim() const { return head_.dim(); }
  [[nodiscard]] Index state_dim() const { return net_.input_size(); }

 private:
  Mlp<S> net_;
  Head head_;
};

}  // namespace sacn::ad
