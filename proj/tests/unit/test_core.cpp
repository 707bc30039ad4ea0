#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "sacn/core/entropy.hpp"
#include "sacn/core/importance.hpp"
#include "sacn/core/learner.hpp"
#include "support/loss_fd.hpp"
#include "support/sac_reduction.hpp"

namespace {

namespace core = sacn::core;
namespace ad = sacn::ad;
using ad::Matrix;
using sacn::replay::Trajectory;
using sacn::replay::Transition;
using Rng = std::mt19937_64;
constexpr double kInf = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------- IS ratios

TEST(IsRatios, FirstRatioIsOne) {
  EXPECT_EQ(core::is_ratios<double>({}).front(), 1.0);
  EXPECT_EQ(core::is_ratios<double>({3.0, -1.0}).front(), 1.0);
}

TEST(IsRatios, EqualPoliciesGiveOnes) {
  for (double r : core::is_ratios<double>({0.0, 0.0, 0.0})) EXPECT_EQ(r, 1.0);
}

TEST(IsRatios, ThreeStepHandProduct) {
  const auto w = core::is_ratios<double>({0.5, -0.2});
  ASSERT_EQ(w.size(), 3u);
  EXPECT_NEAR(w[1], std::exp(0.5), 1e-15);
  EXPECT_NEAR(w[2], std::exp(0.3), 1e-15);
}

TEST(IsRatios, FloatOverflowIsInfinite) {
  const auto w = core::is_ratios<float>({60.0f, 60.0f});
  EXPECT_TRUE(std::isfinite(w[1]));
  EXPECT_TRUE(std::isinf(w[2]));
}

// ------------------------------------------------------------- clip bound

TEST(ClipBound, AllOnes) { EXPECT_EQ(core::clip_bound<double>({1, 1, 1, 1}, 0.75), 1.0); }

TEST(ClipBound, LinearInterpolation) {
  EXPECT_DOUBLE_EQ(core::clip_bound<double>({4, 1, 3, 2}, 0.75), 3.25);
  EXPECT_DOUBLE_EQ(core::clip_bound<double>({4, 1, 3, 2}, 1.0), 4.0);
  EXPECT_DOUBLE_EQ(core::clip_bound<double>({5.0}, 0.3), 5.0);
}

TEST(ClipBound, InfinityFallsBackToLargestFinite) {
  EXPECT_EQ(core::clip_bound<double>({1, 1, kInf, kInf}, 0.5), 1.0);
  EXPECT_EQ(core::clip_bound<double>({1, 7, kInf}, 0.75), 7.0);
  EXPECT_EQ(core::clip_bound<double>({kInf, kInf}, 0.5), 1.0);
  EXPECT_EQ(core::clip_bound<double>({1, 2, 3, kInf}, 0.5), 2.5);
}

TEST(ClipBound, RejectsBadOrder) {
  EXPECT_THROW(core::clip_bound<double>({1.0}, 0.0), sacn::ConfigError);
  EXPECT_THROW(core::clip_bound<double>({1.0}, 1.5), sacn::ConfigError);
  EXPECT_THROW(core::clip_bound<double>({}, 0.5), sacn::UsageError);
}

// ---------------------------------------------------------------- weights

TEST(ScaleWeights, HandExample) {
  const auto w = core::scale_weights<double>({0.5, 2.0, kInf}, {0, 0, 0}, 2.0);
  EXPECT_DOUBLE_EQ(w[0], 0.25);
  EXPECT_DOUBLE_EQ(w[1], 1.0);
  EXPECT_DOUBLE_EQ(w[2], 1.0);
}

TEST(ScaleWeights, EqualRatiosAndSingleElement) {
  for (double w : core::scale_weights<double>({3, 3, 3}, {0, 0, 0}, 2.0)) EXPECT_EQ(w, 1.0);
  EXPECT_EQ(core::scale_weights<double>({0.01}, {0}, 5.0)[0], 1.0);
}

TEST(ScaleWeights, StrataNormalizeIndependently) {
  const auto w = core::scale_weights<double>({1, 1, 0.5, 0.25}, {0, 0, 1, 1}, 4.0);
  EXPECT_EQ(w[0], 1.0);
  EXPECT_EQ(w[2], 1.0);
  EXPECT_EQ(w[3], 0.5);
}

// Random batches with adversarial ratios: zeros, huge values, +inf.
TEST(WeightProperty, BoundedWithUnitStratumMaximum) {
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    Rng rng(seed);
    std::uniform_int_distribution<int> size(1, 40);
    std::uniform_int_distribution<std::size_t> strata(1, 6);
    std::uniform_int_distribution<int> kind(0, 5);
    std::lognormal_distribution<double> ln(0.0, 3.0);
    std::uniform_real_distribution<double> q(0.05, 1.0);
    const int m = size(rng);
    const std::size_t ns = strata(rng);
    std::vector<double> ratios;
    std::vector<std::size_t> stratum;
    for (int k = 0; k < m; ++k) {
      const std::size_t s = static_cast<std::size_t>(k) % ns;
      stratum.push_back(s);
      switch (s == 0 ? 0 : kind(rng)) {
        case 0: ratios.push_back(1.0); break;
        case 1: ratios.push_back(kInf); break;
        case 2: ratios.push_back(0.0); break;
        case 3: ratios.push_back(1e300); break;
        default: ratios.push_back(ln(rng)); break;
      }
    }
    const double b = core::clip_bound(ratios, q(rng));
    ASSERT_TRUE(std::isfinite(b)) << seed;
    const auto w = core::scale_weights(ratios, stratum, b);
    std::vector<double> best(ns, -1.0);
    for (int k = 0; k < m; ++k) {
      ASSERT_GE(w[k], 0.0);
      ASSERT_LE(w[k], 1.0);
      best[stratum[k]] = std::max(best[stratum[k]], w[k]);
    }
    for (std::size_t s = 0; s < ns; ++s) {
      if (best[s] >= 0.0) EXPECT_EQ(best[s], 1.0) << "seed " << seed << " stratum " << s;
    }
  }
}

TEST(ImportanceSampling, SelfNormalizedEstimateIsUnbiased) {
  // E_p[x^2] for p = N(0, 1) from q = N(0.3, 1.2^2)
  Rng rng(2024);
  std::normal_distribution<double> q(0.3, 1.2);
  auto log_normal = [](double x, double mu, double sd) {
    const double z = (x - mu) / sd;
    return -0.5 * z * z - std::log(sd) - 0.5 * std::log(2 * std::numbers::pi);
  };
  constexpr int kN = 1000000;
  std::vector<double> x(kN);
  std::vector<double> w(kN);
  double sw = 0.0;
  double swf = 0.0;
  for (int i = 0; i < kN; ++i) {
    x[i] = q(rng);
    w[i] = core::is_ratios<double>({log_normal(x[i], 0, 1) - log_normal(x[i], 0.3, 1.2)})[1];
    sw += w[i];
    swf += w[i] * x[i] * x[i];
  }
  const double est = swf / sw;
  double var = 0.0;
  for (int i = 0; i < kN; ++i) {
    const double d = w[i] * (x[i] * x[i] - est);
    var += d * d;
  }
  const double se = std::sqrt(var) / sw;
  EXPECT_NEAR(est, 1.0, 3.0 * se);
}

// ------------------------------------------------------------------ k factor

TEST(KFactor, ClosedFormValues) {
  EXPECT_EQ(core::k_factor(5, 1.0), 5.0);
  EXPECT_NEAR(core::k_factor(1, 0.37), 1.0, 1e-15);
  EXPECT_NEAR(core::k_factor(2, 0.99), 1.9801, 1e-4);
  EXPECT_NEAR(core::k_factor(4, 0.99), 3.8822, 1e-4);
  EXPECT_NEAR(core::k_factor(8, 0.99), 7.4644, 1e-4);
  // independent oracle: sum_{i<tau} gamma^(2i)
  for (std::size_t tau = 1; tau <= 40; ++tau) {
    double s = 0.0;
    for (std::size_t i = 0; i < tau; ++i) s += std::pow(0.99, 2.0 * static_cast<double>(i));
    EXPECT_NEAR(core::k_factor(tau, 0.99), s, 1e-12);
  }
  EXPECT_EQ(core::entropy_sample_count(2, 0.99), 2u);
  EXPECT_EQ(core::entropy_sample_count(4, 0.99), 4u);
  EXPECT_EQ(core::entropy_sample_count(8, 0.99), 7u);
}

TEST(KFactor, Properties) {
  for (double g : {0.1, 0.5, 0.9, 0.99, 0.999, 1.0}) {
    EXPECT_NEAR(core::k_factor(1, g), 1.0, 1e-12);
    for (std::size_t tau = 1; tau < 64; ++tau) {
      EXPECT_LE(core::k_factor(tau, g), core::k_factor(tau + 1, g) + 1e-12);
    }
  }
  for (std::size_t tau : {1u, 2u, 5u, 32u}) {
    EXPECT_NEAR(core::k_factor(tau, 1.0 - 1e-8), static_cast<double>(tau), 1e-5);
  }
}

// ------------------------------------------------------ tau-sampled entropy

using Head = ad::SquashedGaussianHead<double>;

Matrix<double> log_densities(const Head& head, double mu, double log_std, ad::Index rows,
                             ad::Index k, Rng& rng) {
  ad::Tape<double> tape;
  Head::Params p{tape.constant(Matrix<double>::Constant(rows * k, 1, mu)),
                 tape.constant(Matrix<double>::Constant(rows * k, 1, log_std))};
  Matrix<double> lp = head.sample(p, ad::standard_normal<double>(rows * k, 1, rng)).log_density.value();
  lp.resize(k, rows);  // column r holds draw r's k samples
  return lp;
}

TEST(TauEntropy, SingleSampleIsPlainEstimator) {
  const std::vector<double> lp{-1.5, 0.3};
  EXPECT_EQ(core::tau_sampled_entropy<double>(lp, 1), 1.5);
  EXPECT_EQ(core::tau_sampled_entropy<double>(lp, 2), 0.6);
}

TEST(TauEntropy, DeterministicLimitMatchesQuadrature) {
  Head head(ad::ActionBox::symmetric(1, 1.0));
  const double mu = 0.4;
  const double ls = Head::kLogStdMin;
  const double sigma = std::exp(ls);
  // H = -int phi(z) [log phi(z) - log sigma - log(1 - tanh^2(mu + sigma z))] dz
  const int pts = 20001;
  const double h = 20.0 / (pts - 1);
  double analytic = 0.0;
  for (int i = 0; i < pts; ++i) {
    const double z = -10.0 + i * h;
    const double lphi = -0.5 * z * z - 0.5 * std::log(2 * std::numbers::pi);
    const double t = std::tanh(mu + sigma * z);
    const double wgt = (i == 0 || i == pts - 1) ? 0.5 : 1.0;
    analytic -= wgt * h * std::exp(lphi) * (lphi - ls - std::log(1 - t * t));
  }
  Rng rng(6);
  const auto k = static_cast<ad::Index>(core::entropy_sample_count(4, 0.99));
  const Matrix<double> lp = log_densities(head, mu, ls, 10000, k, rng);
  double mean = 0.0;
  for (ad::Index r = 0; r < lp.cols(); ++r) {
    mean += core::tau_sampled_entropy<double>(std::span<const double>(lp.col(r).data(), k), k);
  }
  mean /= lp.cols();
  EXPECT_NEAR(mean, analytic, 0.05 * std::abs(analytic));
}

TEST(TauEntropy, UnbiasedRelativeToSingleSample) {
  Head head(ad::ActionBox::symmetric(1, 1.0));
  Rng rng(7);
  constexpr ad::Index kDraws = 100000;
  const Matrix<double> one = log_densities(head, 0.2, -0.4, kDraws, 1, rng);
  const Matrix<double> four = log_densities(head, 0.2, -0.4, kDraws, 4, rng);
  auto stats = [](const Matrix<double>& lp) {
    std::vector<double> v;
    for (ad::Index r = 0; r < lp.cols(); ++r) {
      v.push_back(core::tau_sampled_entropy<double>(
          std::span<const double>(lp.col(r).data(), static_cast<std::size_t>(lp.rows())),
          static_cast<std::size_t>(lp.rows())));
    }
    double m = 0.0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::pair{m, s / static_cast<double>(v.size() - 1) / static_cast<double>(v.size())};
  };
  const auto [m1, se1] = stats(one);
  const auto [m4, se4] = stats(four);
  EXPECT_LT(std::abs(m1 - m4), 3.0 * std::sqrt(se1 + se4));
}

TEST(TauEntropy, VarianceLaw) {
  Head head(ad::ActionBox::symmetric(1, 1.0));
  for (std::size_t tau : {2u, 4u, 8u}) {
    Rng rng(100 + tau);
    const std::size_t k = core::entropy_sample_count(tau, 0.99);
    constexpr ad::Index kDraws = 100000;
    const Matrix<double> lp = log_densities(head, 0.1, -0.6, kDraws, static_cast<ad::Index>(k), rng);
    std::vector<double> single;
    std::vector<double> multi;
    for (ad::Index r = 0; r < kDraws; ++r) {
      const std::span<const double> col(lp.col(r).data(), k);
      single.push_back(core::tau_sampled_entropy<double>(col, 1));
      multi.push_back(core::tau_sampled_entropy<double>(col, k));
    }
    auto var = [](const std::vector<double>& v) {
      double m = 0.0;
      for (double x : v) m += x;
      m /= static_cast<double>(v.size());
      double s = 0.0;
      for (double x : v) s += (x - m) * (x - m);
      return s / static_cast<double>(v.size() - 1);
    };
    const double ratio = var(multi) / var(single);
    const double expected = 1.0 / static_cast<double>(k);
    EXPECT_GE(ratio, 0.85 * expected) << "tau " << tau;
    EXPECT_LE(ratio, 1.15 * expected) << "tau " << tau;
  }
}

// ------------------------------------------------------------------ targets

TEST(NStepTarget, HandExamples) {
  const std::vector<double> r{1.0, 1.0};
  const std::vector<double> h{0.0, 0.0};
  EXPECT_EQ(core::n_step_target<double>(r, h, 10.0, 0.5, 0.0, false), 4.0);
  const std::vector<double> r1{2.5};
  const std::vector<double> h1{3.0};
  EXPECT_EQ(core::n_step_target<double>(r1, h1, 10.0, 0.9, 0.2, true), 2.5);
  // one step, non-terminal: r + gamma (alpha H + Q)
  EXPECT_DOUBLE_EQ(core::n_step_target<double>(r1, h1, 10.0, 0.9, 0.2, false),
                   2.5 + 0.9 * (0.2 * 3.0 + 10.0));
}

// Policy with all-zero weights: mean 0, log-std 0 everywhere. Critics
// return the bias of their output layer.
struct Fixture {
  core::LearnerConfig cfg;
  ad::PolicyNetwork<double> policy;
  core::CriticEnsemble<double> critics;

  explicit Fixture(double q_value, std::size_t n = 8) {
    cfg.n = n;
    cfg.gamma = 0.5;
    cfg.actor_hidden = {4};
    cfg.critic_hidden = {4};
    policy = ad::PolicyNetwork<double>(ad::Mlp<double>({2, 4, 2}), ad::ActionBox::symmetric(1, 1.0));
    ad::Mlp<double> q({3, 4, 1});
    q.layers().back().bias.value(0, 0) = q_value;
    critics.q1 = critics.q2 = critics.target1 = critics.target2 = q;
  }
};

Trajectory episode(int length, bool terminal_end, bool truncated_end, double reward = 1.0) {
  Trajectory tr;
  for (int i = 0; i < length; ++i) {
    Transition t;
    t.state = {0.1 * i, 0.0};
    t.next_state = {0.1 * (i + 1), 0.0};
    t.action = {0.2};
    t.reward = reward;
    t.behavior_log_density = -0.3;
    t.step_index = i;
    t.terminal = terminal_end && i + 1 == length;
    t.truncated = truncated_end && i + 1 == length;
    tr.steps.push_back(t);
  }
  return tr;
}

TEST(ComputeTargets, TwoStepHandExample) {
  Fixture f(10.0);
  Rng rng(1);
  const auto wt = core::compute_targets({episode(2, false, false)}, f.policy, f.critics, 0.0, f.cfg, rng);
  ASSERT_EQ(wt.rows(), 2u);
  EXPECT_EQ(wt.target[0], 1.0 + 0.5 * 10.0);
  EXPECT_EQ(wt.target[1], 4.0);
}

TEST(ComputeTargets, TerminalDropsBootstrapTruncationKeepsIt) {
  Fixture f(10.0);
  Rng rng(2);
  const auto term = core::compute_targets({episode(3, true, false)}, f.policy, f.critics, 0.0, f.cfg, rng);
  EXPECT_EQ(term.target[0], 1.0 + 0.5 * 10.0);
  EXPECT_EQ(term.target[1], 1.0 + 0.5 + 0.25 * 10.0);
  EXPECT_EQ(term.target[2], 1.0 + 0.5 + 0.25);
  const auto trunc = core::compute_targets({episode(3, false, true)}, f.policy, f.critics, 0.0, f.cfg, rng);
  EXPECT_EQ(trunc.target[2], 1.0 + 0.5 + 0.25 + 0.125 * 10.0);
  const auto first = core::compute_targets({episode(1, true, false, 2.5)}, f.policy, f.critics, 0.7, f.cfg, rng);
  EXPECT_EQ(first.target[0], 2.5);
}

// With alpha > 0 the entropy terms are reproduced by replaying the same
// noise through the policy, then summed by hand.
TEST(ComputeTargets, EntropyTermsMatchReplayedNoise) {
  Fixture f(3.0, 4);
  f.cfg.gamma = 0.9;
  const double alpha = 0.4;
  const auto tr = episode(3, true, false, 0.5);
  Rng rng(99);
  Rng replay_rng = rng;
  const auto wt = core::compute_targets({tr}, f.policy, f.critics, alpha, f.cfg, rng);

  const std::size_t kmax = core::entropy_sample_count(3, 0.9);
  Matrix<double> states(static_cast<ad::Index>(3 * kmax), 2);
  for (ad::Index i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < kmax; ++j) {
      states.row(i * static_cast<ad::Index>(kmax) + static_cast<ad::Index>(j)) << 0.1 * (i + 1), 0.0;
    }
  }
  Matrix<double> lp;
  {
    ad::Tape<double> tape;
    lp = f.policy.sample(tape, states, ad::standard_normal<double>(states.rows(), 1, replay_rng)).log_density.value();
  }
  auto entropy = [&](int i, std::size_t k) {
    double s = 0.0;
    for (std::size_t j = 0; j < k; ++j) s -= lp(i * static_cast<ad::Index>(kmax) + static_cast<ad::Index>(j), 0);
    return s / static_cast<double>(k);
  };
  for (std::size_t tau = 1; tau <= 3; ++tau) {
    const std::size_t k = core::entropy_sample_count(tau, 0.9);
    double expected = 0.0;
    double disc = 1.0;
    for (std::size_t i = 0; i < tau; ++i) {
      const bool at_terminal = tau == 3 && i == 2;
      expected += disc * (0.5 + (at_terminal ? 0.0 : 0.9 * alpha * entropy(static_cast<int>(i), k)));
      disc *= 0.9;
    }
    if (tau < 3) expected += disc * 3.0;
    EXPECT_NEAR(wt.target[tau - 1], expected, 1e-12) << "tau " << tau;
  }
}

TEST(ComputeTargets, RatiosAreOneUnderBehaviorPolicy) {
  Rng rng(5);
  core::LearnerConfig cfg;
  cfg.n = 5;
  cfg.actor_hidden = {8};
  cfg.critic_hidden = {8};
  core::SacnLearner<double> learner(cfg, 2, ad::ActionBox::symmetric(1, 1.0), rng);
  auto batch = sacn::testing::random_batch(learner.policy(), 32, 5, rng);
  for (auto& tr : batch) {
    for (auto& t : tr.steps) {
      Matrix<double> s(1, 2);
      s << t.state[0], t.state[1];
      Matrix<double> a(1, 1);
      a << t.action[0];
      t.behavior_log_density = learner.policy().log_density_values(s, a)(0, 0);
    }
  }
  const auto wt = core::compute_targets(batch, learner.policy(), learner.critics(), 0.2, cfg, rng);
  for (std::size_t k = 0; k < wt.rows(); ++k) {
    EXPECT_NEAR(wt.ratio[k], 1.0, 1e-6);
    EXPECT_NEAR(wt.weight[k], 1.0, 1e-6);
    if (wt.row_tau[k] == 1) EXPECT_EQ(wt.ratio[k], 1.0);
  }
}

// ------------------------------------------------------------------- losses

TEST(CriticLoss, FourTermHandSum) {
  Fixture f(0.0);
  f.critics.q1.layers().back().bias.value(0, 0) = 2.0;
  f.critics.q2.layers().back().bias.value(0, 0) = -1.0;
  core::WeightedTargets<double> wt;
  wt.row_trajectory = {0, 0};
  wt.row_tau = {1, 2};
  wt.target = {1.5, 0.5};
  wt.weight = {1.0, 0.4};
  wt.ratio = {1.0, 3.0};
  ad::Tape<double> tape;
  const auto loss = core::critic_loss(tape, f.critics, Matrix<double>::Zero(1, 3), wt, {2});
  const double expected =
      0.5 * (1.0 * ((2.0 - 1.5) * (2.0 - 1.5) + (-1.0 - 1.5) * (-1.0 - 1.5)) +
             0.4 * ((2.0 - 0.5) * (2.0 - 0.5) + (-1.0 - 0.5) * (-1.0 - 0.5)));
  EXPECT_NEAR(loss.value()(0, 0), expected, 1e-15);
}

TEST(CriticLoss, ZeroWhenCriticsMatchTargets) {
  Fixture f(1.25);
  core::WeightedTargets<double> wt;
  wt.row_trajectory = {0, 0, 1};
  wt.row_tau = {1, 2, 1};
  wt.target = {1.25, 1.25, 1.25};
  wt.weight = {1.0, 0.3, 1.0};
  wt.ratio = {1.0, 1.0, 1.0};
  ad::Tape<double> tape;
  EXPECT_EQ(core::critic_loss(tape, f.critics, Matrix<double>::Zero(2, 3), wt, {2, 1}).value()(0, 0), 0.0);
}

TEST(ActorLoss, ZeroCriticsUnitAlphaIsMeanLogDensity) {
  Fixture f(0.0);
  Rng rng(3);
  std::mt19937_64 init(4);
  f.policy = ad::PolicyNetwork<double>(2, {5}, ad::ActionBox::symmetric(1, 1.0), init);
  Matrix<double> s = Matrix<double>::Random(7, 2);
  const Matrix<double> noise = ad::standard_normal<double>(7, 1, rng);
  ad::Tape<double> tape;
  auto al = core::actor_loss(tape, f.policy, f.critics, s, noise, 1.0);
  EXPECT_NEAR(al.loss.value()(0, 0), al.log_density.mean(), 1e-15);
}

TEST(ActorLoss, ConstantCriticsZeroAlphaGiveZeroGradient) {
  Fixture f(5.0);
  std::mt19937_64 init(8);
  f.policy = ad::PolicyNetwork<double>(2, {5}, ad::ActionBox::symmetric(1, 1.0), init);
  Rng rng(9);
  Matrix<double> s = Matrix<double>::Random(1000, 2);
  ad::Tape<double> tape;
  auto al = core::actor_loss(tape, f.policy, f.critics, s, ad::standard_normal<double>(1000, 1, rng), 0.0);
  f.policy.net().zero_grad();
  tape.backward(al.loss);
  for (auto* p : f.policy.net().parameters()) EXPECT_EQ(p->grad.cwiseAbs().maxCoeff(), 0.0);
}

TEST(TemperatureLoss, HandValueAndGradientSign) {
  ad::Parameter<double> la(Matrix<double>::Constant(1, 1, std::log(0.5)));
  {
    ad::Tape<double> tape;
    auto loss = core::temperature_loss(tape, la, Matrix<double>::Constant(4, 1, -3.0), -2.0);
    EXPECT_NEAR(loss.value()(0, 0), 2.5, 1e-15);
  }
  {
    la.zero_grad();
    ad::Tape<double> tape;
    tape.backward(core::temperature_loss(tape, la, Matrix<double>::Constant(4, 1, 2.0), -2.0));
    EXPECT_EQ(la.grad(0, 0), 0.0);
  }
  {
    // entropy (= -log pi) far below the target: descent must raise alpha
    la.zero_grad();
    ad::Tape<double> tape;
    tape.backward(core::temperature_loss(tape, la, Matrix<double>::Constant(4, 1, 6.0), -1.0));
    EXPECT_LT(la.grad(0, 0), 0.0);
  }
}

TEST(LossGradients, MatchFiniteDifferences) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto r = sacn::testing::loss_gradient_errors(seed);
    EXPECT_LT(r.critic, 1e-5) << seed;
    EXPECT_LT(r.actor, 1e-5) << seed;
    EXPECT_LT(r.temperature, 1e-5) << seed;
  }
}

// ------------------------------------------------------------------- polyak

TEST(Polyak, OneStepAndGeometricDecay) {
  core::CriticEnsemble<double> c;
  c.q1 = ad::Mlp<double>({1, 1}, ad::Activation::Identity);
  c.q1.layers()[0].weight.value.setOnes();
  c.q1.layers()[0].bias.value.setOnes();
  c.q2 = c.q1;
  c.target1 = ad::Mlp<double>({1, 1}, ad::Activation::Identity);
  c.target2 = c.target1;
  c.polyak_update(0.005);
  EXPECT_NEAR(c.target1.layers()[0].weight.value(0, 0), 0.005, 1e-15);
  for (int i = 1; i < 500; ++i) c.polyak_update(0.005);
  EXPECT_NEAR(1.0 - c.target2.layers()[0].bias.value(0, 0), std::pow(0.995, 500), 1e-12);
}

TEST(Polyak, FixedPoint) {
  Rng rng(1);
  core::CriticEnsemble<double> c(4, {5}, rng);
  const auto before = c.target1.flat();
  c.polyak_update(0.005);
  EXPECT_EQ(c.target1.flat(), before);
}

// --------------------------------------------------------------- train step

TEST(TrainStep, ReducesToReferenceSac) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto e = sacn::testing::sac_reduction_error(seed);
    EXPECT_LT(e.targets, 1e-12) << seed;
    EXPECT_LT(e.parameters, 1e-12) << seed;
  }
}

TEST(TrainStep, DeterministicAndUnitStratumMaxima) {
  auto run = [](std::uint64_t seed) {
    Rng rng(seed);
    core::LearnerConfig cfg;
    cfg.n = 4;
    cfg.batch_size = 32;
    cfg.actor_hidden = {8, 8};
    cfg.critic_hidden = {8, 8};
    core::SacnLearner<double> learner(cfg, 3, ad::ActionBox::symmetric(2, 1.0), rng);
    std::vector<core::StepMetrics> out;
    for (int i = 0; i < 3; ++i) {
      const auto batch = sacn::testing::random_batch(learner.policy(), 32, 4, rng);
      out.push_back(learner.update(batch, rng));
    }
    return out;
  };
  const auto a = run(11);
  const auto b = run(11);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].critic_loss, b[i].critic_loss);
    EXPECT_EQ(a[i].actor_loss, b[i].actor_loss);
    EXPECT_EQ(a[i].alpha, b[i].alpha);
    for (double m : a[i].max_w_per_tau) {
      if (!std::isnan(m)) EXPECT_EQ(m, 1.0);
    }
    EXPECT_LE(a[i].max_w, 1.0);
    EXPECT_GE(a[i].min_w, 0.0);
    EXPECT_TRUE(std::isfinite(a[i].clip_bound));
  }
}

TEST(TrainStep, FloatPrecisionRuns) {
  Rng rng(3);
  core::LearnerConfig cfg;
  cfg.n = 2;
  cfg.batch_size = 16;
  cfg.actor_hidden = {8};
  cfg.critic_hidden = {8};
  core::SacnLearner<float> learner(cfg, 3, ad::ActionBox::symmetric(1, 2.0), rng);
  sacn::replay::ReplayBuffer buf(3, 1, 100);
  for (int i = 0; i < 50; ++i) {
    Transition t;
    t.state = {0.01 * i, 0.0, 1.0};
    t.next_state = {0.01 * (i + 1), 0.0, 1.0};
    t.action = {0.5};
    t.reward = -1.0;
    t.behavior_log_density = -1.0;
    t.step_index = i;
    buf.push(t);
  }
  const auto m = learner.train_step(buf, rng, rng);
  EXPECT_TRUE(std::isfinite(m.critic_loss));
  EXPECT_GT(m.alpha, 0.0);
}

TEST(LearnerConfig, Validation) {
  core::LearnerConfig cfg;
  cfg.q_b = 0.0;
  EXPECT_THROW(cfg.validate(), sacn::ConfigError);
  cfg.q_b = 0.5;
  cfg.gamma = 1.5;
  EXPECT_THROW(cfg.validate(), sacn::ConfigError);
  cfg.gamma = 1.0;
  cfg.n = 0;
  EXPECT_THROW(cfg.validate(), sacn::ConfigError);
}

}  // namespace
