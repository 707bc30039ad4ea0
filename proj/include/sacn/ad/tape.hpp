#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "sacn/errors.hpp"

namespace sacn::ad {

template <class S>
using Matrix = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;

using Index = Eigen::Index;

/// A trainable dense tensor together with its gradient accumulator.
///
/// Values are stored as 2-D matrices; a rank-1 quantity is a 1 x n row.
/// Gradients produced by Tape::backward are *added* to `grad`, so callers
/// zero them explicitly between updates.
template <class S>
struct Parameter {
  Matrix<S> value;
  Matrix<S> grad;

  Parameter() = default;
  explicit Parameter(Matrix<S> v)
      : value(std::move(v)), grad(Matrix<S>::Zero(value.rows(), value.cols())) {}

  void zero_grad() { grad.setZero(); }
  [[nodiscard]] Index size() const { return value.size(); }
};

template <class S>
class Tape;

/// Handle to a node recorded on a Tape.
template <class S>
class Var {
 public:
  Var() = default;

  [[nodiscard]] const Matrix<S>& value() const { return tape_->value(id_); }
  [[nodiscard]] Index rows() const { return value().rows(); }
  [[nodiscard]] Index cols() const { return value().cols(); }
  [[nodiscard]] bool requires_grad() const { return tape_->requires_grad(id_); }
  [[nodiscard]] Tape<S>* tape() const { return tape_; }
  [[nodiscard]] std::size_t id() const { return id_; }
  [[nodiscard]] bool valid() const { return tape_ != nullptr; }

 private:
  friend class Tape<S>;
  Var(Tape<S>* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape<S>* tape_ = nullptr;
  std::size_t id_ = 0;
};

/// Append-only record of primitive operations for reverse-mode
/// differentiation. Nodes are stored in creation order, so parents always
/// precede children and a single reverse sweep visits each node once.
template <class S>
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, std::size_t)>;

  Tape() { nodes_.reserve(256); }
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var<S> constant(Matrix<S> value) {
    nodes_.push_back(Node{std::move(value), {}, {}, nullptr, false, false});
    return Var<S>(this, nodes_.size() - 1);
  }

  Var<S> parameter(Parameter<S>& p) {
    nodes_.push_back(Node{p.value, {}, {}, &p, true, false});
    return Var<S>(this, nodes_.size() - 1);
  }

  /// Records a derived node. `fn` is only kept when some parent needs a
  /// gradient; otherwise the node is a constant.
  Var<S> record(Matrix<S> value, std::initializer_list<Var<S>> parents, BackwardFn fn) {
    bool needs = false;
    for (const auto& p : parents) {
      check_owner(p);
      needs = needs || requires_grad(p.id());
    }
    nodes_.push_back(Node{std::move(value), {}, needs ? std::move(fn) : BackwardFn{}, nullptr,
                          needs, false});
    return Var<S>(this, nodes_.size() - 1);
  }

  /// Reverse sweep from a scalar node. Parameter gradients are accumulated
  /// into Parameter::grad.
  void backward(const Var<S>& loss) {
    check_owner(loss);
    const auto& v = value(loss.id());
    if (v.rows() != 1 || v.cols() != 1) {
      throw UsageError("backward: loss must be a 1x1 scalar, got " + std::to_string(v.rows()) +
                       "x" + std::to_string(v.cols()));
    }
    for (auto& n : nodes_) {
      n.has_grad = false;
    }
    if (!nodes_[loss.id()].requires_grad) {
      return;
    }
    accumulate(loss.id(), Matrix<S>::Ones(1, 1));
    for (std::size_t i = loss.id() + 1; i-- > 0;) {
      Node& n = nodes_[i];
      if (!n.has_grad || !n.requires_grad) {
        continue;
      }
      if (n.backward) {
        n.backward(*this, i);
      }
      if (n.param != nullptr) {
        n.param->grad += nodes_[i].grad;
      }
    }
  }

  [[nodiscard]] const Matrix<S>& value(std::size_t id) const { return nodes_[id].value; }
  [[nodiscard]] bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }

  /// Gradient of the last backward() loss w.r.t. `v`; zeros if unreached.
  [[nodiscard]] Matrix<S> grad(const Var<S>& v) const {
    const Node& n = nodes_[v.id()];
    if (!n.has_grad) {
      return Matrix<S>::Zero(n.value.rows(), n.value.cols());
    }
    return n.grad;
  }

  // Used by backward closures.
  [[nodiscard]] const Matrix<S>& upstream(std::size_t id) const { return nodes_[id].grad; }

  template <class Derived>
  void accumulate(std::size_t id, const Eigen::MatrixBase<Derived>& g) {
    Node& n = nodes_[id];
    if (!n.requires_grad) {
      return;
    }
    if (!n.has_grad) {
      n.grad = g;
      n.has_grad = true;
    } else {
      n.grad += g;
    }
  }

  [[nodiscard]] std::size_t size() const { return nodes_.size(); }

  void check_owner(const Var<S>& v) const {
    if (v.tape() != this) {
      throw UsageError("variable belongs to a different tape");
    }
  }

 private:
  struct Node {
    Matrix<S> value;
    Matrix<S> grad;
    BackwardFn backward;
    Parameter<S>* param;
    bool requires_grad;
    bool has_grad;
  };

  std::vector<Node> nodes_;
};

}  // namespace sacn::ad
