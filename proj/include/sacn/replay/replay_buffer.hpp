#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "sacn/errors.hpp"

namespace sacn::replay {

struct Transition {
  std::vector<double> state;
  std::vector<double> action;
  double reward = 0.0;
  std::vector<double> next_state;
  bool terminal = false;
  bool truncated = false;
  double behavior_log_density = 0.0;  // log pi_t(a|s) at collection time
  std::int64_t episode_id = 0;
  std::int64_t step_index = 0;

  friend bool operator==(const Transition&, const Transition&) = default;
};

/// Up to n consecutive transitions of one episode starting at an anchor.
struct Trajectory {
  std::vector<Transition> steps;
  std::size_t anchor = 0;  // logical index, 0 = oldest resident transition

  [[nodiscard]] std::size_t effective_length() const { return steps.size(); }
  [[nodiscard]] bool ends_terminal() const { return !steps.empty() && steps.back().terminal; }
};

/// FIFO ring of transitions stored flat in double precision.
class ReplayBuffer {
 public:
  ReplayBuffer(std::size_t state_dim, std::size_t action_dim, std::size_t capacity)
      : sd_(state_dim), ad_(action_dim), capacity_(capacity) {
    if (capacity == 0) throw ConfigError("replay capacity must be >= 1");
    if (state_dim == 0 || action_dim == 0) throw ConfigError("replay dimensions must be >= 1");
    states_.resize(capacity * sd_);
    next_states_.resize(capacity * sd_);
    actions_.resize(capacity * ad_);
    rewards_.resize(capacity);
    log_densities_.resize(capacity);
    terminal_.resize(capacity);
    truncated_.resize(capacity);
    episode_.resize(capacity);
    step_.resize(capacity);
  }

  void push(const Transition& t) {
    if (t.state.size() != sd_ || t.next_state.size() != sd_ || t.action.size() != ad_) {
      throw ConfigError("transition dimensions do not match the buffer");
    }
    auto finite = [](const std::vector<double>& v) {
      return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
    };
    if (!finite(t.state) || !finite(t.next_state) || !finite(t.action) ||
        !std::isfinite(t.reward) || !std::isfinite(t.behavior_log_density)) {
      throw NonFiniteError("transition rejected: non-finite field (episode " +
                           std::to_string(t.episode_id) + ", step " +
                           std::to_string(t.step_index) + ")");
    }
    const std::size_t slot = head_;
    std::copy(t.state.begin(), t.state.end(), states_.begin() + slot * sd_);
    std::copy(t.next_state.begin(), t.next_state.end(), next_states_.begin() + slot * sd_);
    std::copy(t.action.begin(), t.action.end(), actions_.begin() + slot * ad_);
    rewards_[slot] = t.reward;
    log_densities_[slot] = t.behavior_log_density;
    terminal_[slot] = t.terminal ? 1 : 0;
    truncated_[slot] = t.truncated ? 1 : 0;
    episode_[slot] = t.episode_id;
    step_[slot] = t.step_index;
    if (t.terminal || t.truncated) {
      last_end_ = total_;
      has_end_ = true;
    }
    head_ = (head_ + 1) % capacity_;
    size_ = std::min(size_ + 1, capacity_);
    ++total_;
  }

  [[nodiscard]] std::size_t size() const { return size_; }
  [[nodiscard]] std::size_t capacity() const { return capacity_; }
  [[nodiscard]] std::uint64_t total_pushed() const { return total_; }
  [[nodiscard]] std::size_t state_dim() const { return sd_; }
  [[nodiscard]] std::size_t action_dim() const { return ad_; }

  /// Transition at logical index i (0 = oldest).
  [[nodiscard]] Transition at(std::size_t i) const {
    if (i >= size_) throw UsageError("replay index out of range");
    const std::size_t s = slot(i);
    Transition t;
    t.state.assign(states_.begin() + s * sd_, states_.begin() + (s + 1) * sd_);
    t.next_state.assign(next_states_.begin() + s * sd_, next_states_.begin() + (s + 1) * sd_);
    t.action.assign(actions_.begin() + s * ad_, actions_.begin() + (s + 1) * ad_);
    t.reward = rewards_[s];
    t.behavior_log_density = log_densities_[s];
    t.terminal = terminal_[s] != 0;
    t.truncated = truncated_[s] != 0;
    t.episode_id = episode_[s];
    t.step_index = step_[s];
    return t;
  }

  /// Anchors are logical indices [0, valid_anchor_count(n)). The newest n-1
  /// entries are excluded unless an episode end lies at or after them, so a
  /// trajectory is never cut short by the write cursor.
  [[nodiscard]] std::size_t valid_anchor_count(std::size_t n) const {
    if (n == 0) throw ConfigError("trajectory length n must be >= 1");
    std::size_t v = size_ >= n ? size_ - n + 1 : 0;
    if (has_end_ && last_end_ + size_ >= total_) {
      // logical index of the latest episode end still resident
      const std::size_t e = static_cast<std::size_t>(last_end_ - (total_ - size_));
      v = std::max(v, e + 1);
    }
    return v;
  }

  /// Trajectory from a logical anchor: stops after a terminal or truncated
  /// step, at an episode change, or after n steps.
  [[nodiscard]] Trajectory trajectory(std::size_t anchor, std::size_t n) const {
    Trajectory tr;
    tr.anchor = anchor;
    for (std::size_t k = 0; k < n && anchor + k < size_; ++k) {
      const std::size_t s = slot(anchor + k);
      if (k > 0) {
        const std::size_t p = slot(anchor + k - 1);
        if (episode_[s] != episode_[p] || step_[s] != step_[p] + 1) break;
      }
      tr.steps.push_back(at(anchor + k));
      if (terminal_[s] || truncated_[s]) break;
    }
    return tr;
  }

  template <class Rng>
  std::vector<Trajectory> sample_trajectories(std::size_t batch_size, std::size_t n,
                                              Rng& rng) const {
    const std::size_t v = valid_anchor_count(n);
    if (v == 0) {
      throw NotReadyError("replay buffer not ready: " + std::to_string(size_) +
                          " transitions, no valid anchor for n = " + std::to_string(n));
    }
    std::uniform_int_distribution<std::size_t> pick(0, v - 1);
    std::vector<Trajectory> out;
    out.reserve(batch_size);
    for (std::size_t b = 0; b < batch_size; ++b) out.push_back(trajectory(pick(rng), n));
    return out;
  }

  void clear() {
    head_ = 0;
    size_ = 0;
    total_ = 0;
    last_end_ = 0;
    has_end_ = false;
  }

 private:
  friend struct SnapshotAccess;

  [[nodiscard]] std::size_t slot(std::size_t logical) const {
    const std::size_t oldest = size_ < capacity_ ? 0 : head_;
    return (oldest + logical) % capacity_;
  }

  std::size_t sd_;
  std::size_t ad_;
  std::size_t capacity_;
  std::size_t head_ = 0;
  std::size_t size_ = 0;
  std::uint64_t total_ = 0;
  std::uint64_t last_end_ = 0;  // push count index of the latest terminal/truncated step
  bool has_end_ = false;

  std::vector<double> states_;
  std::vector<double> next_states_;
  std::vector<double> actions_;
  std::vector<double> rewards_;
  std::vector<double> log_densities_;
  std::vector<std::uint8_t> terminal_;
  std::vector<std::uint8_t> truncated_;
  std::vector<std::int64_t> episode_;
  std::vector<std::int64_t> step_;
};

}  // namespace sacn::replay
