#pragma once

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "sacn/ad/ops.hpp"

namespace sacn::ad {

enum class Activation { Identity, Relu, Tanh };

/// Whether a network's weights enter a tape as trainable leaves or as
/// constants (no gradient is propagated into them).
enum class Binding { Trainable, Frozen };

/// Fully connected network: hidden layers use one activation, the output
/// layer is linear. Weights are (fan_in x fan_out), biases (1 x fan_out),
/// and inputs are row batches (batch x fan_in).
template <class S>
class Mlp {
 public:
  struct Layer {
    Parameter<S> weight;
    Parameter<S> bias;
    Activation activation = Activation::Identity;
  };

  Mlp() = default;

  /// `sizes` = {input, hidden..., output}; weights start at zero.
  explicit Mlp(std::vector<Index> sizes, Activation hidden = Activation::Relu)
      : sizes_(std::move(sizes)) {
    if (sizes_.size() < 2) {
      throw ConfigError("Mlp needs at least input and output sizes");
    }
    for (std::size_t i = 0; i + 1 < sizes_.size(); ++i) {
      if (sizes_[i] <= 0 || sizes_[i + 1] <= 0) {
        throw ConfigError("Mlp layer sizes must be positive");
      }
      Layer layer;
      layer.weight = Parameter<S>(Matrix<S>::Zero(sizes_[i], sizes_[i + 1]));
      layer.bias = Parameter<S>(Matrix<S>::Zero(1, sizes_[i + 1]));
      layer.activation = (i + 2 < sizes_.size()) ? hidden : Activation::Identity;
      layers_.push_back(std::move(layer));
    }
  }

  /// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) initialization of all weights
  /// and biases, drawn layer by layer, row-major.
  template <class Rng>
  static Mlp random(std::vector<Index> sizes, Rng& rng, Activation hidden = Activation::Relu) {
    Mlp net(std::move(sizes), hidden);
    for (auto& layer : net.layers_) {
      const double bound = 1.0 / std::sqrt(static_cast<double>(layer.weight.value.rows()));
      std::uniform_real_distribution<double> dist(-bound, bound);
      fill(layer.weight.value, dist, rng);
      fill(layer.bias.value, dist, rng);
    }
    return net;
  }

  static std::size_t parameter_count(const std::vector<Index>& sizes) {
    std::size_t total = 0;
    for (std::size_t i = 0; i + 1 < sizes.size(); ++i) {
      total += static_cast<std::size_t>(sizes[i] * sizes[i + 1] + sizes[i + 1]);
    }
    return total;
  }

  [[nodiscard]] std::size_t parameter_count() const { return parameter_count(sizes_); }
  [[nodiscard]] Index input_size() const { return sizes_.front(); }
  [[nodiscard]] Index output_size() const { return sizes_.back(); }
  [[nodiscard]] const std::vector<Index>& sizes() const { return sizes_; }
  [[nodiscard]] std::vector<Layer>& layers() { return layers_; }
  [[nodiscard]] const std::vector<Layer>& layers() const { return layers_; }

  Var<S> forward(Tape<S>& tape, const Var<S>& input, Binding binding = Binding::Trainable) {
    if (input.cols() != input_size()) {
      throw ConfigError("Mlp::forward: input has " + std::to_string(input.cols()) +
                        " columns, expected " + std::to_string(input_size()));
    }
    Var<S> h = input;
    for (auto& layer : layers_) {
      Var<S> w = bind(tape, layer.weight, binding);
      Var<S> b = bind(tape, layer.bias, binding);
      h = add(matmul(h, w), b);
      switch (layer.activation) {
        case Activation::Relu: h = relu(h); break;
        case Activation::Tanh: h = tanh(h); break;
        case Activation::Identity: break;
      }
    }
    return h;
  }

  /// Tape-free evaluation, numerically identical to forward().
  [[nodiscard]] Matrix<S> evaluate(const Matrix<S>& input) const {
    if (input.cols() != input_size()) {
      throw ConfigError("Mlp::evaluate: input column mismatch");
    }
    Matrix<S> h = input;
    for (const auto& layer : layers_) {
      Matrix<S> z = h * layer.weight.value;
      z.rowwise() += layer.bias.value.row(0);
      switch (layer.activation) {
        case Activation::Relu: h = z.cwiseMax(S(0)); break;
        case Activation::Tanh: h = z.array().tanh().matrix(); break;
        case Activation::Identity: h = std::move(z); break;
      }
    }
    return h;
  }

  std::vector<Parameter<S>*> parameters() {
    std::vector<Parameter<S>*> out;
    for (auto& layer : layers_) {
      out.push_back(&layer.weight);
      out.push_back(&layer.bias);
    }
    return out;
  }

  void zero_grad() {
    for (auto* p : parameters()) p->zero_grad();
  }

  /// Flattened parameter vector (layer order, weight then bias, column-major).
  [[nodiscard]] std::vector<S> flat() const {
    std::vector<S> out;
    out.reserve(parameter_count());
    for (const auto& layer : layers_) {
      out.insert(out.end(), layer.weight.value.data(),
                 layer.weight.value.data() + layer.weight.value.size());
      out.insert(out.end(), layer.bias.value.data(),
                 layer.bias.value.data() + layer.bias.value.size());
    }
    return out;
  }

 private:
  static Var<S> bind(Tape<S>& tape, Parameter<S>& p, Binding binding) {
    return binding == Binding::Trainable ? tape.parameter(p) : tape.constant(p.value);
  }

  template <class Dist, class Rng>
  static void fill(Matrix<S>& m, Dist& dist, Rng& rng) {
    for (Index r = 0; r < m.rows(); ++r) {
      for (Index c = 0; c < m.cols(); ++c) {
        m(r, c) = static_cast<S>(dist(rng));
      }
    }
  }

  std::vector<Index> sizes_;
  std::vector<Layer> layers_;
};

/// Target <- target + c * (source - target), elementwise. With equal
/// arguments the difference is exactly zero, so blend(x, x, c) == x.
template <class S>
void polyak_blend(Mlp<S>& target, const Mlp<S>& source, S coefficient) {
  auto& tl = target.layers();
  const auto& sl = source.layers();
  if (tl.size() != sl.size()) {
    throw ConfigError("polyak_blend: architecture mismatch");
  }
  for (std::size_t i = 0; i < tl.size(); ++i) {
    tl[i].weight.value += coefficient * (sl[i].weight.value - tl[i].weight.value);
    tl[i].bias.value += coefficient * (sl[i].bias.value - tl[i].bias.value);
  }
}

}  // namespace sacn::ad
