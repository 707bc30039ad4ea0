#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "sacn/core/learner.hpp"
#include "sacn/diagnostics/density.hpp"
#include "sacn/envs/toy_envs.hpp"
#include "sacn/harness/run_config.hpp"
#include "sacn/harness/seeds.hpp"
#include "sacn/harness/stats.hpp"
#include "sacn/replay/replay_buffer.hpp"
#include "sacn/util/csv.hpp"

namespace sacn::harness {

inline constexpr const char* kEvalHeader =
    "run_id,env,variant,n,q_b,seed,timestep,episode_index,return,episode_length";
inline constexpr const char* kMetricsHeader =
    "run_id,timestep,critic_loss,actor_loss,alpha,max_w,mean_w,clipped_fraction,grad_norm";

struct EvalRecord {
  std::int64_t timestep = 0;
  std::vector<double> returns;
  std::vector<int> lengths;

  [[nodiscard]] double mean_return() const {
    double acc = 0.0;
    for (double r : returns) acc += r;
    return returns.empty() ? 0.0 : acc / static_cast<double>(returns.size());
  }
};

struct RunResult {
  std::string run_id;
  std::string status = "ok";  // "ok" or "failed: <reason>"
  std::vector<EvalRecord> evals;
  std::vector<diagnostics::RatioWindowStats> density;
  std::string eval_csv;
  std::string metrics_csv;
  std::string density_csv;
  std::int64_t train_steps = 0;

  [[nodiscard]] bool ok() const { return status == "ok"; }
  [[nodiscard]] std::vector<EvalPoint> eval_points() const {
    std::vector<EvalPoint> out;
    for (const auto& e : evals) out.push_back({e.timestep, e.mean_return()});
    return out;
  }
};

/// Called after every learner update with the environment step and metrics.
using MetricsHook = std::function<void(std::int64_t, const core::StepMetrics&)>;

namespace detail {

template <class S>
ad::Matrix<S> row_matrix(const std::vector<double>& v) {
  ad::Matrix<S> m(1, static_cast<ad::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) m(0, static_cast<ad::Index>(i)) = static_cast<S>(v[i]);
  return m;
}

template <class S>
std::vector<double> row_vector(const ad::Matrix<S>& m) {
  std::vector<double> v(static_cast<std::size_t>(m.cols()));
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<double>(m(0, static_cast<ad::Index>(i)));
  return v;
}

inline std::vector<double> uniform_action(const ad::ActionBox& box, std::mt19937_64& rng) {
  std::vector<double> a(box.dim());
  for (std::size_t i = 0; i < a.size(); ++i) {
    a[i] = std::uniform_real_distribution<double>(box.low[i], box.high[i])(rng);
  }
  return a;
}

inline double uniform_log_density(const ad::ActionBox& box) {
  double acc = 0.0;
  for (std::size_t i = 0; i < box.dim(); ++i) acc -= std::log(box.high[i] - box.low[i]);
  return acc;
}

template <class Policy>
EvalRecord evaluate(envs::Environment& env, std::mt19937_64& eval_rng, std::mt19937_64& action_rng,
                    int episodes, std::int64_t timestep, Policy&& act) {
  EvalRecord rec;
  rec.timestep = timestep;
  for (int e = 0; e < episodes; ++e) {
    auto obs = env.reset(eval_rng);
    double ret = 0.0;
    int len = 0;
    while (true) {
      const auto r = env.step(act(obs, action_rng));
      ret += r.reward;
      ++len;
      obs = r.next_state;
      if (r.terminal || r.truncated) break;
    }
    rec.returns.push_back(ret);
    rec.lengths.push_back(len);
  }
  return rec;
}

template <class S>
RunResult run_experiment_impl(const RunConfig& cfg, const MetricsHook& hook) {
  RunResult res;
  res.run_id = cfg.resolved_run_id();
  SeedStreams rng(cfg.seed);
  auto env = envs::make_environment(cfg.env, cfg.max_episode_steps);
  auto eval_env = envs::make_environment(cfg.env, cfg.max_episode_steps);
  const auto& spec = env->spec();
  const bool random = cfg.variant == Variant::Random;
  const core::LearnerConfig lc = cfg.learner_config();

  core::SacnLearner<S> learner(lc, spec.state_dim, spec.action_box, rng.init);
  replay::ReplayBuffer buffer(spec.state_dim, spec.action_dim, cfg.buffer_capacity);
  diagnostics::DensityRecorder density(diagnostics::active_windows(cfg.total_steps),
                                       cfg.density_thresholds);
  const double uniform_logp = uniform_log_density(spec.action_box);

  std::ostringstream eval_os;
  std::ostringstream metrics_os;
  eval_os << kEvalHeader << "\n";
  metrics_os << kMetricsHeader << "\n";
  const std::string eval_prefix = res.run_id + "," + cfg.env + "," + cfg.variant_label() + "," +
                                  std::to_string(lc.n) + "," + util::format_double(lc.q_b) + "," +
                                  std::to_string(cfg.seed) + ",";

  auto act_eval = [&](const std::vector<double>& obs, std::mt19937_64& arng) {
    if (random) return uniform_action(spec.action_box, arng);
    return row_vector<S>(learner.policy().mean_action(row_matrix<S>(obs)));
  };
  auto emit_eval = [&](const EvalRecord& rec) {
    for (std::size_t e = 0; e < rec.returns.size(); ++e) {
      eval_os << eval_prefix << rec.timestep << "," << e << "," << util::format_double(rec.returns[e])
              << "," << rec.lengths[e] << "\n";
    }
    res.evals.push_back(rec);
  };

  try {
    auto obs = env->reset(rng.env);
    std::int64_t episode = 0;
    for (std::int64_t t = 1; t <= cfg.total_steps; ++t) {
      replay::Transition tr;
      tr.state = obs;
      if (random) {
        tr.action = uniform_action(spec.action_box, rng.policy);
        tr.behavior_log_density = uniform_logp;
      } else {
        const ad::Matrix<S> s = row_matrix<S>(obs);
        ad::Tape<S> tape;
        const auto sample = learner.policy().sample(
            tape, s, ad::standard_normal<S>(1, static_cast<ad::Index>(spec.action_dim), rng.policy),
            ad::Binding::Frozen);
        const ad::Matrix<S> a = sample.action.value();
        tr.action = row_vector<S>(a);
        // same atanh path the learner uses when it recomputes densities
        tr.behavior_log_density = static_cast<double>(learner.policy().log_density_values(s, a)(0, 0));
      }
      const auto step = env->step(tr.action);
      tr.reward = step.reward;
      tr.next_state = step.next_state;
      tr.terminal = step.terminal;
      tr.truncated = step.truncated;
      tr.episode_id = episode;
      tr.step_index = env->episode_step() - 1;
      buffer.push(tr);
      if (step.terminal || step.truncated) {
        obs = env->reset(rng.env);
        ++episode;
      } else {
        obs = step.next_state;
      }

      if (!random && t >= static_cast<std::int64_t>(lc.learning_start) &&
          t % static_cast<std::int64_t>(lc.train_frequency) == 0 && buffer.valid_anchor_count(lc.n) > 0) {
        const auto batch = buffer.sample_trajectories(lc.batch_size, lc.n, rng.replay);
        if (density.active(t)) {
          const ad::Matrix<S> cur = learner.anchor_log_densities(batch);
          std::vector<float> ratios(batch.size());
          for (std::size_t b = 0; b < batch.size(); ++b) {
            ratios[b] = diagnostics::ratio32(static_cast<double>(cur(static_cast<ad::Index>(b), 0)),
                                             batch[b].steps.front().behavior_log_density);
          }
          density.record(t, ratios);
        }
        const auto m = learner.update(batch, rng.learner);
        ++res.train_steps;
        if (hook) hook(t, m);
        if (t % cfg.metrics_interval == 0) {
          using util::format_double;
          metrics_os << res.run_id << "," << t << "," << format_double(m.critic_loss) << ","
                     << format_double(m.actor_loss) << "," << format_double(m.alpha) << ","
                     << format_double(m.max_w) << "," << format_double(m.mean_w) << ","
                     << format_double(m.clipped_fraction) << "," << format_double(m.grad_norm) << "\n";
        }
      }

      if (t % cfg.eval_interval == 0) {
        emit_eval(evaluate(*eval_env, rng.eval, rng.policy, cfg.eval_episodes, t, act_eval));
      }
    }
  } catch (const NonFiniteError& e) {
    res.status = std::string("failed: ") + e.what();
  }

  res.eval_csv = eval_os.str();
  res.metrics_csv = metrics_os.str();
  std::ostringstream dens;
  density.write_csv(dens, res.run_id);
  res.density_csv = dens.str();
  res.density = density.stats();
  return res;
}

}  // namespace detail

/// Runs one training job. A non-finite loss or transition stops the run and
/// marks it failed; everything produced up to that point is kept.
inline RunResult run_experiment(const RunConfig& cfg, const MetricsHook& hook = {}) {
  cfg.validate();
  if (cfg.precision == 64) return detail::run_experiment_impl<double>(cfg, hook);
  return detail::run_experiment_impl<float>(cfg, hook);
}

/// Writes eval.csv, metrics.csv, density.csv, status.txt and config.txt.
inline void write_run_outputs(const std::filesystem::path& dir, const RunConfig& cfg,
                              const RunResult& res) {
  std::filesystem::create_directories(dir);
  auto put = [&](const char* name, const std::string& text) {
    std::ofstream os(dir / name, std::ios::binary);
    if (!os) throw ConfigError("cannot write " + (dir / name).string());
    os << text;
  };
  put("eval.csv", res.eval_csv);
  put("metrics.csv", res.metrics_csv);
  put("density.csv", res.density_csv);
  put("status.txt", res.status + "\n");
  put("config.txt", to_config_text(cfg));
}

}  // namespace sacn::harness
