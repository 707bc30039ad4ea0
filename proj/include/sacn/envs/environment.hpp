#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "sacn/ad/squashed_gaussian.hpp"
#include "sacn/errors.hpp"

namespace sacn::envs {

using ad::ActionBox;
using Rng = std::mt19937_64;

struct EnvSpec {
  std::string name;
  std::size_t state_dim = 0;
  std::size_t action_dim = 0;
  ActionBox action_box;
  int max_episode_steps = 1;
  double dt = 0.05;
  std::map<std::string, double> physics;
};

struct StepResult {
  std::vector<double> next_state;
  double reward = 0.0;
  bool terminal = false;   // true environment termination: no bootstrap
  bool truncated = false;  // time-limit cut; never set together with terminal
};

/// Internal environment state plus the episode step counter, enough to
/// replay a step from the same point.
struct EnvSnapshot {
  std::vector<double> physical;
  int episode_step = 0;
  bool done = false;
};

/// Deterministic continuous-control environment with a time limit.
class Environment {
 public:
  virtual ~Environment() = default;

  [[nodiscard]] virtual const EnvSpec& spec() const = 0;

  /// Samples an initial state and zeroes the episode step counter.
  std::vector<double> reset(Rng& rng) {
    physical_ = sample_initial(rng);
    episode_step_ = 0;
    done_ = false;
    return observe();
  }

  /// Advances one step. Actions outside the box are clamped with a warning.
  StepResult step(const std::vector<double>& action) {
    if (done_) {
      throw UsageError(spec().name + ": step called after the episode ended; call reset()");
    }
    if (action.size() != spec().action_dim) {
      throw ConfigError(spec().name + ": action has wrong dimension");
    }
    std::vector<double> a = action;
    const auto& box = spec().action_box;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (!(a[i] >= box.low[i] && a[i] <= box.high[i])) {
        log_warning(spec().name + ": action " + std::to_string(a[i]) + " clamped to box");
        a[i] = std::min(std::max(a[i], box.low[i]), box.high[i]);
      }
    }
    StepResult r;
    r.reward = advance(a);
    ++episode_step_;
    r.next_state = observe();
    r.terminal = is_terminal(r.next_state);
    r.truncated = !r.terminal && episode_step_ >= spec().max_episode_steps;
    done_ = r.terminal || r.truncated;
    return r;
  }

  /// Pure predicate on an observation.
  [[nodiscard]] virtual bool is_terminal(const std::vector<double>& state) const = 0;

  [[nodiscard]] EnvSnapshot snapshot() const { return {physical_, episode_step_, done_}; }
  void restore(const EnvSnapshot& s) {
    physical_ = s.physical;
    episode_step_ = s.episode_step;
    done_ = s.done;
  }

  [[nodiscard]] std::vector<double> observation() const { return observe(); }
  [[nodiscard]] int episode_step() const { return episode_step_; }
  [[nodiscard]] bool done() const { return done_; }

 protected:
  virtual std::vector<double> sample_initial(Rng& rng) = 0;
  // Applies an in-box action to physical_ and returns the reward.
  virtual double advance(const std::vector<double>& action) = 0;
  [[nodiscard]] virtual std::vector<double> observe() const { return physical_; }

  std::vector<double> physical_;
  int episode_step_ = 0;
  bool done_ = false;
};

}  // namespace sacn::envs
