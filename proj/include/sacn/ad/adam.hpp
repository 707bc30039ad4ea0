#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "sacn/ad/tape.hpp"

namespace sacn::ad {

struct AdamConfig {
  double learning_rate = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Bias-corrected Adam over a fixed list of parameters. Moments are sized
/// from the parameters at construction and must keep matching shapes.
template <class S>
class AdamState {
 public:
  AdamState() = default;

  AdamState(std::vector<Parameter<S>*> params, AdamConfig config)
      : params_(std::move(params)), config_(config) {
    for (const auto* p : params_) {
      first_.push_back(Matrix<S>::Zero(p->value.rows(), p->value.cols()));
      second_.push_back(Matrix<S>::Zero(p->value.rows(), p->value.cols()));
    }
  }

  /// Applies one update using the gradients currently stored in the
  /// parameters. Throws NonFiniteError (leaving everything untouched) when
  /// any gradient entry is NaN or infinite.
  void step() {
    for (std::size_t i = 0; i < params_.size(); ++i) {
      const auto& g = params_[i]->grad;
      if (g.rows() != first_[i].rows() || g.cols() != first_[i].cols()) {
        throw ConfigError("adam_step: gradient shape does not match parameter " +
                          std::to_string(i));
      }
      if (!g.allFinite()) {
        throw NonFiniteError("adam_step: non-finite gradient in parameter " +
                             std::to_string(i));
      }
    }
    ++steps_;
    const double t = static_cast<double>(steps_);
    const S b1 = static_cast<S>(config_.beta1);
    const S b2 = static_cast<S>(config_.beta2);
    const S correction1 = static_cast<S>(1.0 - std::pow(config_.beta1, t));
    const S correction2 = static_cast<S>(1.0 - std::pow(config_.beta2, t));
    const S lr = static_cast<S>(config_.learning_rate);
    const S eps = static_cast<S>(config_.epsilon);
    for (std::size_t i = 0; i < params_.size(); ++i) {
      const auto& g = params_[i]->grad;
      first_[i] = b1 * first_[i] + (S(1) - b1) * g;
      second_[i] = b2 * second_[i] + (S(1) - b2) * g.cwiseProduct(g);
      const auto m_hat = first_[i].array() / correction1;
      const auto v_hat = second_[i].array() / correction2;
      params_[i]->value.array() -= lr * m_hat / (v_hat.sqrt() + eps);
    }
  }

  [[nodiscard]] std::int64_t step_count() const { return steps_; }
  [[nodiscard]] const AdamConfig& config() const { return config_; }
  [[nodiscard]] const std::vector<Matrix<S>>& first_moments() const { return first_; }
  [[nodiscard]] const std::vector<Matrix<S>>& second_moments() const { return second_; }

  /// Rebinds to a new set of parameters with identical shapes (used after
  /// the owning object is copied).
  void rebind(std::vector<Parameter<S>*> params) {
    if (params.size() != params_.size()) {
      throw ConfigError("AdamState::rebind: parameter count mismatch");
    }
    params_ = std::move(params);
  }

 private:
  std::vector<Parameter<S>*> params_;
  std::vector<Matrix<S>> first_;
  std::vector<Matrix<S>> second_;
  AdamConfig config_;
  std::int64_t steps_ = 0;
};

}  // namespace sacn::ad
