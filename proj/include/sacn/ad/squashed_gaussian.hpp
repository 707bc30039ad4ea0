#pragma once

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "sacn/ad/ops.hpp"

namespace sacn::ad {

/// Per-dimension action bounds.
struct ActionBox {
  std::vector<double> low;
  std::vector<double> high;

  ActionBox() = default;
  ActionBox(std::vector<double> lo, std::vector<double> hi) : low(std::move(lo)), high(std::move(hi)) {
    if (low.size() != high.size() || low.empty()) {
      throw ConfigError("ActionBox: low/high size mismatch");
    }
    for (std::size_t i = 0; i < low.size(); ++i) {
      if (!(low[i] < high[i])) {
        throw ConfigError("ActionBox: low must be < high in every dimension");
      }
    }
  }

  static ActionBox symmetric(std::size_t dim, double bound) {
    return ActionBox(std::vector<double>(dim, -bound), std::vector<double>(dim, bound));
  }

  [[nodiscard]] std::size_t dim() const { return low.size(); }
  [[nodiscard]] double center(std::size_t i) const { return 0.5 * (low[i] + high[i]); }
  [[nodiscard]] double half_range(std::size_t i) const { return 0.5 * (high[i] - low[i]); }
  [[nodiscard]] bool contains_strictly(const std::vector<double>& a) const {
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (!(a[i] > low[i] && a[i] < high[i])) return false;
    }
    return a.size() == dim();
  }
};

/// Draws a rows x cols standard-normal matrix, filled row by row.
template <class S, class Rng>
Matrix<S> standard_normal(Index rows, Index cols, Rng& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Matrix<S> out(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    for (Index c = 0; c < cols; ++c) {
      out(r, c) = static_cast<S>(dist(rng));
    }
  }
  return out;
}

/// Gaussian in pre-squash space, tanh squashing, affine map to the action box.
///
///   a = center + half_range * tanh(u),  u ~ N(mean, exp(log_std)^2)
///   log pi(a) = log N(u; mean, std) - sum log(1 - tanh(u)^2) - sum log(half_range)
///
/// log-std is clamped to [kLogStdMin, kLogStdMax]. The squashed value is kept
/// inside [-kSquashLimit, kSquashLimit] so emitted actions stay strictly in
/// the box and atanh recovery stays finite.
template <class S>
class SquashedGaussianHead {
 public:
  static constexpr double kLogStdMin = -20.0;
  static constexpr double kLogStdMax = 2.0;
  static constexpr double kSquashLimit = 1.0 - 1e-6;

  struct Params {
    Var<S> mean;     // batch x dim
    Var<S> log_std;  // batch x dim, clamped
  };

  struct Sample {
    Var<S> action;       // batch x dim, in the box
    Var<S> log_density;  // batch x 1
  };

  SquashedGaussianHead() = default;
  explicit SquashedGaussianHead(ActionBox box) : box_(std::move(box)) {
    const auto d = static_cast<Index>(box_.dim());
    center_.resize(1, d);
    half_range_.resize(1, d);
    log_scale_sum_ = 0.0;
    for (Index i = 0; i < d; ++i) {
      center_(0, i) = static_cast<S>(box_.center(static_cast<std::size_t>(i)));
      half_range_(0, i) = static_cast<S>(box_.half_range(static_cast<std::size_t>(i)));
      log_scale_sum_ += std::log(box_.half_range(static_cast<std::size_t>(i)));
    }
  }

  [[nodiscard]] Index dim() const { return static_cast<Index>(box_.dim()); }
  [[nodiscard]] const ActionBox& box() const { return box_; }

  /// Splits a raw (batch x 2*dim) network output into mean and clamped log-std.
  Params split(const Var<S>& raw) const {
    if (raw.cols() != 2 * dim()) {
      throw ConfigError("SquashedGaussianHead: expected 2*dim outputs");
    }
    return {slice_cols(raw, 0, dim()),
            clamp(slice_cols(raw, dim(), dim()), static_cast<S>(kLogStdMin),
                  static_cast<S>(kLogStdMax))};
  }

  /// Reparameterized sample with the supplied standard-normal noise
  /// (batch x dim); gradients flow into mean and log-std.
  Sample sample(const Params& p, const Matrix<S>& noise) const {
    auto& tape = *p.mean.tape();
    const Var<S> eps = tape.constant(noise);
    const Var<S> u = add(p.mean, mul(exp(p.log_std), eps));
    const S limit = static_cast<S>(kSquashLimit);
    const Var<S> y = clamp(tanh(u), -limit, limit);
    // density from the pre-squash draw: (u - mean) / std is eps exactly, so
    // saturated samples keep a finite, correct log-density
    const Var<S> gaussian = sub(scale(square(eps), S(-0.5)), p.log_std);
    return {to_box(y), shift(row_sum(sub(gaussian, log1m_tanh_sq(u))), static_cast<S>(log_constant()))};
  }

  /// Log-density of given actions (batch x dim). Actions on or outside the
  /// box are pulled to the atanh-safe range before inversion.
  Var<S> log_density(const Params& p, const Matrix<S>& actions) const {
    auto& tape = *p.mean.tape();
    const S limit = static_cast<S>(kSquashLimit);
    Matrix<S> y = ((actions.rowwise() - center_.row(0)).array().rowwise() /
                   half_range_.row(0).array())
                      .matrix()
                      .cwiseMax(-limit)
                      .cwiseMin(limit);
    return log_density_squashed(p, tape.constant(std::move(y)));
  }

  /// tanh(mean) mapped into the box.
  [[nodiscard]] Matrix<S> mean_action(const Matrix<S>& mean) const {
    const S limit = static_cast<S>(kSquashLimit);
    Matrix<S> y = mean.array().tanh().matrix().cwiseMax(-limit).cwiseMin(limit);
    return ((y.array().rowwise() * half_range_.row(0).array()).rowwise() + center_.row(0).array())
        .matrix();
  }

 private:
  Var<S> to_box(const Var<S>& y) const {
    auto& tape = *y.tape();
    const Var<S> scaled = mul_row(y, half_range_);
    return add(scaled, tape.constant(center_));
  }

  // Multiplies each row of `a` by the constant row vector `row`.
  static Var<S> mul_row(const Var<S>& a, const Matrix<S>& row) {
    auto& tape = *a.tape();
    Matrix<S> full = row.replicate(a.rows(), 1);
    return mul(a, tape.constant(std::move(full)));
  }

  Var<S> log_density_squashed(const Params& p, const Var<S>& y) const {
    const Var<S> u = atanh(y);
    const Var<S> z = mul(sub(u, p.mean), exp(neg(p.log_std)));
    // -0.5 z^2 - log_std per dimension
    const Var<S> gaussian = sub(scale(square(z), S(-0.5)), p.log_std);
    // log(1 - y^2) per dimension
    const Var<S> jacobian = log(shift(neg(square(y)), S(1)));
    return shift(row_sum(sub(gaussian, jacobian)), static_cast<S>(log_constant()));
  }

  [[nodiscard]] double log_constant() const {
    return -0.5 * std::log(2.0 * std::numbers::pi) * static_cast<double>(dim()) - log_scale_sum_;
  }

  ActionBox box_;
  Matrix<S> center_;
  Matrix<S> half_range_;
  double log_scale_sum_ = 0.0;
};

}  // namespace sacn::ad
