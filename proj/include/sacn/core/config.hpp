#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "sacn/ad/tape.hpp"
#include "sacn/errors.hpp"

namespace sacn::core {

enum class AlphaMode { Fixed, Auto };
enum class EntropyTargetMode { ActionDim, StateDim, Value };

struct LearnerConfig {
  std::size_t n = 1;
  double q_b = 0.75;
  double gamma = 0.99;
  AlphaMode alpha_mode = AlphaMode::Auto;
  double alpha = 1.0;  // fixed value, or the initial value when auto-tuned
  EntropyTargetMode entropy_target_mode = EntropyTargetMode::ActionDim;
  double entropy_target = 0.0;  // used only with EntropyTargetMode::Value
  double polyak = 0.005;
  double learning_rate = 3e-4;
  std::size_t batch_size = 256;
  std::vector<ad::Index> actor_hidden{256, 256};
  std::vector<ad::Index> critic_hidden{256, 256};
  bool use_tau_sampled_entropy = true;
  // > 0 pins the entropy sample count to round(k(entropy_tau)) for every tau
  std::size_t entropy_tau = 0;
  std::size_t learning_start = 10000;
  std::size_t train_frequency = 1;

  void validate() const {
    if (n < 1) throw ConfigError("n must be >= 1");
    if (!(q_b > 0.0 && q_b <= 1.0)) throw ConfigError("q_b must lie in (0, 1]");
    if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("gamma must lie in (0, 1]");
    if (!(alpha > 0.0)) throw ConfigError("alpha must be > 0");
    if (!(polyak > 0.0 && polyak <= 1.0)) throw ConfigError("polyak must lie in (0, 1]");
    if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (train_frequency < 1) throw ConfigError("train_frequency must be >= 1");
    for (auto h : actor_hidden) {
      if (h < 1) throw ConfigError("actor hidden sizes must be >= 1");
    }
    for (auto h : critic_hidden) {
      if (h < 1) throw ConfigError("critic hidden sizes must be >= 1");
    }
  }

  [[nodiscard]] double resolved_entropy_target(std::size_t state_dim,
                                               std::size_t action_dim) const {
    switch (entropy_target_mode) {
      case EntropyTargetMode::ActionDim: return -static_cast<double>(action_dim);
      case EntropyTargetMode::StateDim: return -static_cast<double>(state_dim);
      case EntropyTargetMode::Value: return entropy_target;
    }
    return -static_cast<double>(action_dim);
  }
};

}  // namespace sacn::core
