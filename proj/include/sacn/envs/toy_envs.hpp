#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include "sacn/envs/environment.hpp"

namespace sacn::envs {

/// Torque-limited pendulum swing-up. Angle 0 is upright.
/// Observation (cos th, sin th, th_dot); reward -(th^2 + 0.1 th_dot^2 + 0.001 u^2)
/// with th wrapped to [-pi, pi). Never terminates, only truncates.
class Pendulum final : public Environment {
 public:
  static constexpr double kGravity = 10.0;
  static constexpr double kMass = 1.0;
  static constexpr double kLength = 1.0;
  static constexpr double kMaxSpeed = 8.0;
  static constexpr double kMaxTorque = 2.0;

  explicit Pendulum(int max_episode_steps = 200, double dt = 0.05) {
    spec_.name = "pendulum";
    spec_.state_dim = 3;
    spec_.action_dim = 1;
    spec_.action_box = ActionBox::symmetric(1, kMaxTorque);
    spec_.max_episode_steps = max_episode_steps;
    spec_.dt = dt;
    spec_.physics = {{"gravity", kGravity}, {"mass", kMass}, {"length", kLength},
                     {"max_speed", kMaxSpeed}};
  }

  [[nodiscard]] const EnvSpec& spec() const override { return spec_; }
  [[nodiscard]] bool is_terminal(const std::vector<double>&) const override { return false; }

  void set_physical(double angle, double velocity) { physical_ = {angle, velocity}; }
  [[nodiscard]] double angle() const { return physical_[0]; }
  [[nodiscard]] double velocity() const { return physical_[1]; }

  /// Mechanical energy per unit inertia, conserved by the torque-free flow.
  [[nodiscard]] static double energy(double angle, double velocity) {
    return 0.5 * velocity * velocity + 1.5 * kGravity / kLength * std::cos(angle);
  }

  static double wrap_angle(double th) {
    return std::remainder(th, 2.0 * std::numbers::pi);
  }

 protected:
  std::vector<double> sample_initial(Rng& rng) override {
    std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
    std::uniform_real_distribution<double> vel(-1.0, 1.0);
    const double th = angle(rng);
    return {th, vel(rng)};
  }

  double advance(const std::vector<double>& action) override {
    const double u = action[0];
    const double th = physical_[0];
    const double thdot = physical_[1];
    const double wrapped = wrap_angle(th);
    const double reward = -(wrapped * wrapped + 0.1 * thdot * thdot + 0.001 * u * u);
    double next_thdot = thdot + (1.5 * kGravity / kLength * std::sin(th) +
                                 3.0 / (kMass * kLength * kLength) * u) *
                                    spec_.dt;
    next_thdot = std::clamp(next_thdot, -kMaxSpeed, kMaxSpeed);
    physical_ = {th + next_thdot * spec_.dt, next_thdot};
    return reward;
  }

  [[nodiscard]] std::vector<double> observe() const override {
    return {std::cos(physical_[0]), std::sin(physical_[0]), physical_[1]};
  }

 private:
  EnvSpec spec_;
};

/// 1-D double integrator: (x, v) -> (x + v dt, v + a dt), reward -x^2 - 0.01 a^2.
/// Terminates when |x| > 5.
class DoubleIntegrator final : public Environment {
 public:
  static constexpr double kDivergence = 5.0;

  explicit DoubleIntegrator(int max_episode_steps = 200, double dt = 0.05) {
    spec_.name = "double_integrator";
    spec_.state_dim = 2;
    spec_.action_dim = 1;
    spec_.action_box = ActionBox::symmetric(1, 1.0);
    spec_.max_episode_steps = max_episode_steps;
    spec_.dt = dt;
    spec_.physics = {{"divergence_bound", kDivergence}};
  }

  [[nodiscard]] const EnvSpec& spec() const override { return spec_; }
  [[nodiscard]] bool is_terminal(const std::vector<double>& s) const override {
    return std::abs(s[0]) > kDivergence;
  }

  void set_physical(double x, double v) { physical_ = {x, v}; }

 protected:
  std::vector<double> sample_initial(Rng& rng) override {
    std::uniform_real_distribution<double> pos(-1.0, 1.0);
    return {pos(rng), 0.0};
  }

  double advance(const std::vector<double>& action) override {
    const double a = action[0];
    const double x = physical_[0];
    const double v = physical_[1];
    physical_ = {x + v * spec_.dt, v + a * spec_.dt};
    return -x * x - 0.01 * a * a;
  }

 private:
  EnvSpec spec_;
};

/// Planar point mass reaching the origin. State (px, py, vx, vy); force
/// action in [-1, 1]^2 with linear drag, semi-implicit Euler. Reward is the
/// negative distance to the goal minus 0.01 |a|^2, plus a +10 bonus on the
/// step that enters the goal radius, which terminates the episode.
class PointMass final : public Environment {
 public:
  static constexpr double kGoalRadius = 0.1;
  static constexpr double kGoalBonus = 10.0;
  static constexpr double kDrag = 0.5;

  explicit PointMass(int max_episode_steps = 200, double dt = 0.05) {
    spec_.name = "point_mass";
    spec_.state_dim = 4;
    spec_.action_dim = 2;
    spec_.action_box = ActionBox::symmetric(2, 1.0);
    spec_.max_episode_steps = max_episode_steps;
    spec_.dt = dt;
    spec_.physics = {{"goal_radius", kGoalRadius}, {"goal_bonus", kGoalBonus}, {"drag", kDrag}};
  }

  [[nodiscard]] const EnvSpec& spec() const override { return spec_; }
  [[nodiscard]] bool is_terminal(const std::vector<double>& s) const override {
    return std::hypot(s[0], s[1]) < kGoalRadius;
  }

  void set_physical(double px, double py, double vx, double vy) { physical_ = {px, py, vx, vy}; }

 protected:
  std::vector<double> sample_initial(Rng& rng) override {
    std::uniform_real_distribution<double> pos(-1.0, 1.0);
    std::vector<double> s;
    do {
      s = {pos(rng), pos(rng), 0.0, 0.0};
    } while (is_terminal(s));
    return s;
  }

  double advance(const std::vector<double>& action) override {
    const double dt = spec_.dt;
    const double vx = physical_[2] + (action[0] - kDrag * physical_[2]) * dt;
    const double vy = physical_[3] + (action[1] - kDrag * physical_[3]) * dt;
    const double px = physical_[0] + vx * dt;
    const double py = physical_[1] + vy * dt;
    physical_ = {px, py, vx, vy};
    const double dist = std::hypot(px, py);
    double reward = -dist - 0.01 * (action[0] * action[0] + action[1] * action[1]);
    if (dist < kGoalRadius) reward += kGoalBonus;
    return reward;
  }

 private:
  EnvSpec spec_;
};

inline const std::vector<std::string>& environment_names() {
  static const std::vector<std::string> names{"pendulum", "double_integrator", "point_mass"};
  return names;
}

inline std::unique_ptr<Environment> make_environment(const std::string& name,
                                                     int max_episode_steps = 200) {
  if (max_episode_steps < 1) {
    throw ConfigError("max episode length must be >= 1");
  }
  if (name == "pendulum") return std::make_unique<Pendulum>(max_episode_steps);
  if (name == "double_integrator") return std::make_unique<DoubleIntegrator>(max_episode_steps);
  if (name == "point_mass") return std::make_unique<PointMass>(max_episode_steps);
  throw ConfigError("unknown environment '" + name +
                    "' (known: pendulum, double_integrator, point_mass)");
}

}  // namespace sacn::envs
