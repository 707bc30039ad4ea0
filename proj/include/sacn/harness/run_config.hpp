#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "sacn/core/config.hpp"
#include "sacn/diagnostics/density.hpp"
#include "sacn/errors.hpp"
#include "sacn/util/csv.hpp"

namespace sacn::harness {

enum class Variant { Sac, Sacn, SacnNoTauEntropy, SacTauEntropy, Random };

inline std::string to_string(Variant v) {
  switch (v) {
    case Variant::Sac: return "sac";
    case Variant::Sacn: return "sacn";
    case Variant::SacnNoTauEntropy: return "sacn_no_tau_entropy";
    case Variant::SacTauEntropy: return "sac_tau_entropy";
    case Variant::Random: return "random";
  }
  return "?";
}

inline Variant parse_variant(const std::string& s) {
  for (auto v : {Variant::Sac, Variant::Sacn, Variant::SacnNoTauEntropy, Variant::SacTauEntropy,
                 Variant::Random}) {
    if (to_string(v) == s) return v;
  }
  throw ConfigError("unknown variant '" + s +
                    "' (known: sac, sacn, sacn_no_tau_entropy, sac_tau_entropy, random)");
}

struct RunConfig {
  std::string env = "pendulum";
  Variant variant = Variant::Sacn;
  std::size_t tau = 0;  // sac_tau_entropy only
  std::int64_t total_steps = 1000000;
  std::int64_t eval_interval = 10000;
  int eval_episodes = 5;
  std::uint64_t seed = 0;
  std::size_t buffer_capacity = 1000000;
  int precision = 32;
  std::int64_t tail_window = 30000;
  std::string run_id;  // empty: derived from the other fields
  std::int64_t metrics_interval = 100;
  std::vector<double> density_thresholds = diagnostics::default_thresholds();
  int max_episode_steps = 200;
  core::LearnerConfig learner;

  /// Table label; sac_tau_entropy carries its tau, e.g. sac_tau_entropy_tau4.
  [[nodiscard]] std::string variant_label() const {
    if (variant == Variant::SacTauEntropy) return "sac_tau_entropy_tau" + std::to_string(tau);
    return to_string(variant);
  }

  [[nodiscard]] std::string resolved_run_id() const {
    if (!run_id.empty()) return run_id;
    return env + "_" + variant_label() + "_n" + std::to_string(learner.n) + "_q" +
           util::format_double(learner.q_b) + "_s" + std::to_string(seed);
  }

  /// Learner settings implied by the variant.
  [[nodiscard]] core::LearnerConfig learner_config() const {
    core::LearnerConfig c = learner;
    switch (variant) {
      case Variant::Sac:
      case Variant::Random:
        c.use_tau_sampled_entropy = false;
        c.entropy_tau = 0;
        break;
      case Variant::Sacn:
        c.use_tau_sampled_entropy = true;
        c.entropy_tau = 0;
        break;
      case Variant::SacnNoTauEntropy:
        c.use_tau_sampled_entropy = false;
        c.entropy_tau = 0;
        break;
      case Variant::SacTauEntropy:
        c.use_tau_sampled_entropy = true;
        c.entropy_tau = tau;
        break;
    }
    return c;
  }

  void validate() const {
    learner.validate();
    if (total_steps < 1) throw ConfigError("total_steps must be >= 1");
    if (eval_interval < 1 || total_steps % eval_interval != 0) {
      throw ConfigError("eval_interval must divide total_steps");
    }
    if (eval_episodes < 1) throw ConfigError("eval_episodes must be >= 1");
    if (precision != 32 && precision != 64) throw ConfigError("precision must be 32 or 64");
    if (buffer_capacity < 1) throw ConfigError("buffer_capacity must be >= 1");
    if (tail_window < 1) throw ConfigError("tail_window must be >= 1");
    if (metrics_interval < 1) throw ConfigError("metrics_interval must be >= 1");
    if (max_episode_steps < 1) throw ConfigError("max_episode_steps must be >= 1");
    if ((variant == Variant::Sac || variant == Variant::SacTauEntropy) && learner.n != 1) {
      throw ConfigError(to_string(variant) + " requires n = 1");
    }
    if (variant == Variant::SacTauEntropy && tau < 1) {
      throw ConfigError("sac_tau_entropy requires tau >= 1");
    }
    if (variant != Variant::SacTauEntropy && tau != 0) {
      throw ConfigError("tau is only valid with variant sac_tau_entropy");
    }
    if (!std::is_sorted(density_thresholds.begin(), density_thresholds.end())) {
      throw ConfigError("density_thresholds must be ascending");
    }
  }
};

inline const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"paper", "desk-pendulum"};
  return names;
}

inline bool is_swimmer(const std::string& env) {
  std::string lower = env;
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  return lower.find("swimmer") != std::string::npos;
}

/// Named configurations. "paper" carries the reference hyperparameters
/// (discount 0.999 for swimmer environments); "desk-pendulum" is a
/// one-core-sized pendulum run.
inline RunConfig preset(const std::string& name, const std::string& env = "") {
  RunConfig c;
  if (name == "paper") {
    c.env = env.empty() ? "pendulum" : env;
    c.variant = Variant::Sacn;
    c.total_steps = 1000000;
    c.eval_interval = 10000;
    c.eval_episodes = 5;
    c.buffer_capacity = 1000000;
    c.tail_window = 30000;
    c.learner.n = 4;
    c.learner.q_b = 0.75;
    c.learner.gamma = is_swimmer(c.env) ? 0.999 : 0.99;
    c.learner.batch_size = 256;
    c.learner.learning_rate = 3e-4;
    c.learner.actor_hidden = {256, 256};
    c.learner.critic_hidden = {256, 256};
    c.learner.polyak = 0.005;
    c.learner.learning_start = 10000;
    c.learner.train_frequency = 1;
    c.learner.alpha_mode = core::AlphaMode::Auto;
    return c;
  }
  if (name == "desk-pendulum") {
    c.env = env.empty() ? "pendulum" : env;
    c.variant = Variant::Sacn;
    c.total_steps = 50000;
    c.eval_interval = 5000;
    c.eval_episodes = 5;
    c.buffer_capacity = 50000;
    c.tail_window = 15000;
    c.precision = 32;
    c.learner.n = 4;
    c.learner.q_b = 0.75;
    c.learner.gamma = 0.99;
    c.learner.batch_size = 256;
    c.learner.learning_rate = 3e-4;
    c.learner.actor_hidden = {64, 64};
    c.learner.critic_hidden = {64, 64};
    c.learner.polyak = 0.005;
    c.learner.learning_start = 500;
    c.learner.train_frequency = 1;
    c.learner.alpha_mode = core::AlphaMode::Auto;
    return c;
  }
  std::string known;
  for (const auto& n : preset_names()) known += (known.empty() ? "" : ", ") + n;
  throw ConfigError("unknown preset '" + name + "' (known: " + known + ")");
}

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::int64_t parse_int(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size() || d != std::floor(d)) throw std::invalid_argument(v);
    return static_cast<std::int64_t>(d);
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': expected an integer, got '" + v + "'");
  }
}

inline std::size_t parse_count(const std::string& key, const std::string& v) {
  const auto i = parse_int(key, v);
  if (i < 0) throw ConfigError("key '" + key + "' must be >= 0");
  return static_cast<std::size_t>(i);
}

inline double parse_real(const std::string& key, const std::string& v) {
  try {
    return util::parse_double(v);
  } catch (const ConfigError&) {
    throw ConfigError("key '" + key + "': expected a number, got '" + v + "'");
  }
}

inline std::vector<ad::Index> parse_sizes(const std::string& key, const std::string& v) {
  std::vector<ad::Index> out;
  for (const auto& part : util::split(v)) {
    out.push_back(static_cast<ad::Index>(parse_count(key, trim(part))));
  }
  return out;
}

}  // namespace detail

/// Applies one `key = value` setting.
inline void apply_setting(RunConfig& c, const std::string& key, const std::string& value) {
  using namespace detail;
  auto& l = c.learner;
  if (key == "env") c.env = value;
  else if (key == "variant") c.variant = parse_variant(value);
  else if (key == "n") l.n = parse_count(key, value);
  else if (key == "q_b") l.q_b = parse_real(key, value);
  else if (key == "tau") c.tau = parse_count(key, value);
  else if (key == "total_steps") c.total_steps = parse_int(key, value);
  else if (key == "eval_interval") c.eval_interval = parse_int(key, value);
  else if (key == "eval_episodes") c.eval_episodes = static_cast<int>(parse_int(key, value));
  else if (key == "seed") c.seed = static_cast<std::uint64_t>(parse_count(key, value));
  else if (key == "gamma") l.gamma = parse_real(key, value);
  else if (key == "alpha_mode") {
    if (value == "auto") l.alpha_mode = core::AlphaMode::Auto;
    else if (value == "fixed") l.alpha_mode = core::AlphaMode::Fixed;
    else throw ConfigError("alpha_mode must be 'auto' or 'fixed'");
  } else if (key == "alpha") l.alpha = parse_real(key, value);
  else if (key == "entropy_target_mode") {
    if (value == "action") l.entropy_target_mode = core::EntropyTargetMode::ActionDim;
    else if (value == "state") l.entropy_target_mode = core::EntropyTargetMode::StateDim;
    else if (value == "value") l.entropy_target_mode = core::EntropyTargetMode::Value;
    else throw ConfigError("entropy_target_mode must be 'action', 'state' or 'value'");
  } else if (key == "entropy_target") {
    l.entropy_target = parse_real(key, value);
    l.entropy_target_mode = core::EntropyTargetMode::Value;
  } else if (key == "polyak") l.polyak = parse_real(key, value);
  else if (key == "learning_rate") l.learning_rate = parse_real(key, value);
  else if (key == "batch_size") l.batch_size = parse_count(key, value);
  else if (key == "actor_hidden") l.actor_hidden = parse_sizes(key, value);
  else if (key == "critic_hidden") l.critic_hidden = parse_sizes(key, value);
  else if (key == "learning_start") l.learning_start = parse_count(key, value);
  else if (key == "train_frequency") l.train_frequency = parse_count(key, value);
  else if (key == "buffer_capacity") c.buffer_capacity = parse_count(key, value);
  else if (key == "precision") c.precision = static_cast<int>(parse_int(key, value));
  else if (key == "tail_window") c.tail_window = parse_int(key, value);
  else if (key == "run_id") c.run_id = value;
  else if (key == "metrics_interval") c.metrics_interval = parse_int(key, value);
  else if (key == "max_episode_steps") c.max_episode_steps = static_cast<int>(parse_int(key, value));
  else if (key == "density_thresholds") {
    c.density_thresholds.clear();
    for (const auto& part : util::split(value)) c.density_thresholds.push_back(parse_real(key, trim(part)));
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

/// Parses a flat `key = value` document. '#' starts a comment. A `preset`
/// key is applied first (using the document's `env`, if any); every other
/// key then overrides it in order.
inline RunConfig parse_config(std::istream& is) {
  std::vector<std::pair<std::string, std::string>> entries;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + ": expected 'key = value'");
    }
    entries.emplace_back(detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
  }
  RunConfig c;
  std::string preset_name;
  std::string env;
  for (const auto& [k, v] : entries) {
    if (k == "preset") preset_name = v;
    if (k == "env") env = v;
  }
  if (!preset_name.empty()) c = preset(preset_name, env);
  for (const auto& [k, v] : entries) {
    if (k != "preset") apply_setting(c, k, v);
  }
  c.validate();
  return c;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config '" + path + "'");
  return parse_config(is);
}

/// Config document that parses back to `c`.
inline std::string to_config_text(const RunConfig& c) {
  auto sizes = [](const std::vector<ad::Index>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
    return s;
  };
  const auto& l = c.learner;
  std::ostringstream os;
  os << "env = " << c.env << "\n";
  os << "variant = " << to_string(c.variant) << "\n";
  os << "n = " << l.n << "\n";
  os << "q_b = " << util::format_double(l.q_b) << "\n";
  if (c.variant == Variant::SacTauEntropy) os << "tau = " << c.tau << "\n";
  os << "total_steps = " << c.total_steps << "\n";
  os << "eval_interval = " << c.eval_interval << "\n";
  os << "eval_episodes = " << c.eval_episodes << "\n";
  os << "seed = " << c.seed << "\n";
  os << "gamma = " << util::format_double(l.gamma) << "\n";
  os << "alpha_mode = " << (l.alpha_mode == core::AlphaMode::Auto ? "auto" : "fixed") << "\n";
  os << "alpha = " << util::format_double(l.alpha) << "\n";
  switch (l.entropy_target_mode) {
    case core::EntropyTargetMode::ActionDim: os << "entropy_target_mode = action\n"; break;
    case core::EntropyTargetMode::StateDim: os << "entropy_target_mode = state\n"; break;
    case core::EntropyTargetMode::Value:
      os << "entropy_target = " << util::format_double(l.entropy_target) << "\n";
      break;
  }
  os << "polyak = " << util::format_double(l.polyak) << "\n";
  os << "learning_rate = " << util::format_double(l.learning_rate) << "\n";
  os << "batch_size = " << l.batch_size << "\n";
  os << "actor_hidden = " << sizes(l.actor_hidden) << "\n";
  os << "critic_hidden = " << sizes(l.critic_hidden) << "\n";
  os << "learning_start = " << l.learning_start << "\n";
  os << "train_frequency = " << l.train_frequency << "\n";
  os << "buffer_capacity = " << c.buffer_capacity << "\n";
  os << "precision = " << c.precision << "\n";
  os << "tail_window = " << c.tail_window << "\n";
  if (!c.run_id.empty()) os << "run_id = " << c.run_id << "\n";
  os << "metrics_interval = " << c.metrics_interval << "\n";
  os << "max_episode_steps = " << c.max_episode_steps << "\n";
  os << "density_thresholds = ";
  for (std::size_t i = 0; i < c.density_thresholds.size(); ++i) {
    os << (i ? "," : "") << util::format_double(c.density_thresholds[i]);
  }
  os << "\n";
  return os.str();
}

}  // namespace sacn::harness
