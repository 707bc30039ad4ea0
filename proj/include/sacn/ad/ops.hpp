#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "sacn/ad/tape.hpp"

// Differentiable primitives over 2-D tensors. Every function records one
// node on the tape shared by its arguments.
namespace sacn::ad {

namespace detail {

template <class S>
Tape<S>& tape_of(const Var<S>& a) {
  if (!a.valid()) {
    throw UsageError("operation on an unbound variable");
  }
  return *a.tape();
}

inline std::string shape_str(Index r, Index c) {
  return std::to_string(r) + "x" + std::to_string(c);
}

template <class S>
void require_same_shape(const char* op, const Var<S>& a, const Var<S>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ConfigError(std::string(op) + ": shape mismatch " + shape_str(a.rows(), a.cols()) +
                      " vs " + shape_str(b.rows(), b.cols()));
  }
}

}  // namespace detail

template <class S>
Var<S> matmul(const Var<S>& a, const Var<S>& b) {
  auto& t = detail::tape_of(a);
  if (a.cols() != b.rows()) {
    throw ConfigError("matmul: inner dimension mismatch " +
                      detail::shape_str(a.rows(), a.cols()) + " * " +
                      detail::shape_str(b.rows(), b.cols()));
  }
  Matrix<S> out = a.value() * b.value();
  const auto ia = a.id();
  const auto ib = b.id();
  return t.record(std::move(out), {a, b}, [ia, ib](Tape<S>& tp, std::size_t self) {
    const auto& g = tp.upstream(self);
    if (tp.requires_grad(ia)) {
      tp.accumulate(ia, g * tp.value(ib).transpose());
    }
    if (tp.requires_grad(ib)) {
      tp.accumulate(ib, tp.value(ia).transpose() * g);
    }
  });
}

/// a + b where b has a's shape, is a 1 x cols row (broadcast down rows),
/// or is a 1 x 1 scalar.
template <class S>
Var<S> add(const Var<S>& a, const Var<S>& b) {
  auto& t = detail::tape_of(a);
  const auto ia = a.id();
  const auto ib = b.id();
  if (a.rows() == b.rows() && a.cols() == b.cols()) {
    Matrix<S> out = a.value() + b.value();
    return t.record(std::move(out), {a, b}, [ia, ib](Tape<S>& tp, std::size_t self) {
      tp.accumulate(ia, tp.upstream(self));
      tp.accumulate(ib, tp.upstream(self));
    });
  }
  if (b.rows() == 1 && b.cols() == 1) {
    Matrix<S> out = a.value().array() + b.value()(0, 0);
    return t.record(std::move(out), {a, b}, [ia, ib](Tape<S>& tp, std::size_t self) {
      tp.accumulate(ia, tp.upstream(self));
      tp.accumulate(ib, Matrix<S>::Constant(1, 1, tp.upstream(self).sum()));
    });
  }
  if (b.rows() == 1 && b.cols() == a.cols()) {
    Matrix<S> out = a.value().rowwise() + b.value().row(0);
    return t.record(std::move(out), {a, b}, [ia, ib](Tape<S>& tp, std::size_t self) {
      tp.accumulate(ia, tp.upstream(self));
      tp.accumulate(ib, tp.upstream(self).colwise().sum());
    });
  }
  detail::require_same_shape("add", a, b);
  return {};
}

template <class S>
Var<S> neg(const Var<S>& a) {
  auto& t = detail::tape_of(a);
  const auto ia = a.id();
  Matrix<S> out = -a.value();
  return t.record(std::move(out), {a}, [ia](Tape<S>& tp, std::size_t self) {
    tp.accumulate(ia, -tp.upstream(self));
  });
}

template <class S>
Var<S> sub(const Var<S>& a, const Var<S>& b) {
  return add(a, neg(b));
}

/// Elementwise product. b may match a's shape, be an r x 1 column
/// (broadcast across columns) or a 1 x 1 scalar.
template <class S>
Var<S> mul(const Var<S>& a, const Var<S>& b) {
  auto& t = detail::tape_of(a);
  const auto ia = a.id();
  const auto ib = b.id();
  if (a.rows() == b.rows() && a.cols() == b.cols()) {
    Matrix<S> out = a.value().cwiseProduct(b.value());
    return t.record(std::move(out), {a, b}, [ia, ib](Tape<S>& tp, std::size_t self) {
      const auto& g = tp.upstream(self);
      if (tp.requires_grad(ia)) tp.accumulate(ia, g.cwiseProduct(tp.value(ib)));
      if (tp.requires_grad(ib)) tp.accumulate(ib, g.cwiseProduct(tp.value(ia)));
    });
  }
  if (b.rows() == 1 && b.cols() == 1) {
    Matrix<S> out = a.value() * b.value()(0, 0);
    return t.record(std::move(out), {a, b}, [ia, ib](Tape<S>& tp, std::size_t self) {
      const auto& g = tp.upstream(self);
      if (tp.requires_grad(ia)) tp.accumulate(ia, g * tp.value(ib)(0, 0));
      if (tp.requires_grad(ib)) {
        tp.accumulate(ib, Matrix<S>::Constant(1, 1, g.cwiseProduct(tp.value(ia)).sum()));
      }
    });
  }
  if (b.rows() == a.rows() && b.cols() == 1) {
    Matrix<S> out = (a.value().array().colwise() * b.value().col(0).array()).matrix();
    return t.record(std::move(out), {a, b}, [ia, ib](Tape<S>& tp, std::size_t self) {
      const auto& g = tp.upstream(self);
      if (tp.requires_grad(ia)) {
        tp.accumulate(ia, (g.array().colwise() * tp.value(ib).col(0).array()).matrix());
      }
      if (tp.requires_grad(ib)) {
        tp.accumulate(ib, g.cwiseProduct(tp.value(ia)).rowwise().sum());
      }
    });
  }
  detail::require_same_shape("mul", a, b);
  return {};
}

template <class S>
Var<S> scale(const Var<S>& a, S c) {
  auto& t = detail::tape_of(a);
  const auto ia = a.id();
  Matrix<S> out = a.value() * c;
  return t.record(std::move(out), {a}, [ia, c](Tape<S>& tp, std::size_t self) {
    tp.accumulate(ia, tp.upstream(self) * c);
  });
}

template <class S>
Var<S> shift(const Var<S>& a, S c) {
  auto& t = detail::tape_of(a);
  const auto ia = a.id();
  Matrix<S> out = a.value().array() + c;
  return t.record(std::move(out), {a}, [ia](Tape<S>& tp, std::size_t self) {
    tp.accumulate(ia, tp.upstream(self));
  });
}

template <class S>
Var<S> relu(const Var<S>& a) {
  auto& t = detail::tape_of(a);
  const auto ia = a.id();
  Matrix<S> out = a.value().cwiseMax(S(0));
  return t.record(std::move(out), {a}, [ia](Tape<S>& tp, std::size_t self) {
    const auto& x = tp.value(ia);
    tp.accumulate(ia, (x.array() > S(0)).select(tp.upstream(self).array(), S(0)).matrix());
  });
}

template <class S>
Var<S> tanh(const Var<S>& a) {
  auto& t = detail::tape_of(a);
  const auto ia = a.id();
  Matrix<S> out = a.value().array().tanh().matrix();
  return t.record(std::move(out), {a}, [ia](Tape<S>& tp, std::size_t self) {
    const auto& y = tp.value(self);
    tp.accumulate(ia, (tp.upstream(self).array() * (S(1) - y.array().square())).matrix());
  });
}

/// Inverse hyperbolic tangent; the argument must lie in (-1, 1).
template <class S>
Var<S> atanh(const Var<S>& a) {
  auto& t = detail::tape_of(a);
  const auto ia = a.id();
  Matrix<S> out = a.value().unaryExpr([](S x) { return std::atanh(x); });
  return t.record(std::move(out), {a}, [ia](Tape<S>& tp, std::size_t self) {
    const auto& x = tp.value(ia);
    tp.accumulate(ia, (tp.upstream(self).array() / (S(1) - x.array().square())).matrix());
  });
}

/// log(1 - tanh(a)^2) as 2 (log 2 - |a| - log1p(exp(-2|a|))), finite for any a.
template <class S>
Var<S> log1m_tanh_sq(const Var<S>& a) {
  auto& t = detail::tape_of(a);
  const auto ia = a.id();
  const S log2 = static_cast<S>(std::numbers::ln2);
  Matrix<S> out = a.value().unaryExpr([log2](S x) {
    const S ax = std::abs(x);
    return S(2) * (log2 - ax - std::log1p(std::exp(S(-2) * ax)));
  });
  return t.record(std::move(out), {a}, [ia](Tape<S>& tp, std::size_t self) {
    const auto& x = tp.value(ia);
    tp.accumulate(ia, (S(-2) * tp.upstream(self).array() * x.array().tanh()).matrix());
  });
}

template <class S>
Var<S> exp(const Var<S>& a) {
  auto& t = detail::tape_of(a);
  const auto ia = a.id();
  Matrix<S> out = a.value().array().exp().matrix();
  return t.record(std::move(out), {a}, [ia](Tape<S>& tp, std::size_t self) {
    tp.accumulate(ia, tp.upstream(self).cwiseProduct(tp.value(self)));
  });
}

template <class S>
Var<S> log(const Var<S>& a) {
  auto& t = detail::tape_of(a);
  const auto ia = a.id();
  Matrix<S> out = a.value().array().log().matrix();
  return t.record(std::move(out), {a}, [ia](Tape<S>& tp, std::size_t self) {
    tp.accumulate(ia, tp.upstream(self).cwiseQuotient(tp.value(ia)));
  });
}

template <class S>
Var<S> square(const Var<S>& a) {
  auto& t = detail::tape_of(a);
  const auto ia = a.id();
  Matrix<S> out = a.value().array().square().matrix();
  return t.record(std::move(out), {a}, [ia](Tape<S>& tp, std::size_t self) {
    tp.accumulate(ia, (S(2) * tp.upstream(self).array() * tp.value(ia).array()).matrix());
  });
}

/// Clamp into [lo, hi]; gradient is zero where the clamp is active.
template <class S>
Var<S> clamp(const Var<S>& a, S lo, S hi) {
  auto& t = detail::tape_of(a);
  const auto ia = a.id();
  Matrix<S> out = a.value().cwiseMax(lo).cwiseMin(hi);
  return t.record(std::move(out), {a}, [ia, lo, hi](Tape<S>& tp, std::size_t self) {
    const auto& x = tp.value(ia);
    tp.accumulate(
        ia, ((x.array() >= lo) && (x.array() <= hi)).select(tp.upstream(self).array(), S(0)).matrix());
  });
}

/// Elementwise minimum; ties route the gradient to `a`.
template <class S>
Var<S> minimum(const Var<S>& a, const Var<S>& b) {
  detail::require_same_shape("minimum", a, b);
  auto& t = detail::tape_of(a);
  const auto ia = a.id();
  const auto ib = b.id();
  Matrix<S> out = a.value().cwiseMin(b.value());
  return t.record(std::move(out), {a, b}, [ia, ib](Tape<S>& tp, std::size_t self) {
    const auto& g = tp.upstream(self);
    const auto pick_a = (tp.value(ia).array() <= tp.value(ib).array());
    tp.accumulate(ia, pick_a.select(g.array(), S(0)).matrix());
    tp.accumulate(ib, pick_a.select(S(0), g.array()).matrix());
  });
}

template <class S>
Var<S> sum(const Var<S>& a) {
  auto& t = detail::tape_of(a);
  const auto ia = a.id();
  const Index r = a.rows();
  const Index c = a.cols();
  Matrix<S> out = Matrix<S>::Constant(1, 1, a.value().sum());
  return t.record(std::move(out), {a}, [ia, r, c](Tape<S>& tp, std::size_t self) {
    tp.accumulate(ia, Matrix<S>::Constant(r, c, tp.upstream(self)(0, 0)));
  });
}

template <class S>
Var<S> mean(const Var<S>& a) {
  return scale(sum(a), S(1) / static_cast<S>(a.value().size()));
}

/// Sum across columns: r x c -> r x 1.
template <class S>
Var<S> row_sum(const Var<S>& a) {
  auto& t = detail::tape_of(a);
  const auto ia = a.id();
  const Index c = a.cols();
  Matrix<S> out = a.value().rowwise().sum();
  return t.record(std::move(out), {a}, [ia, c](Tape<S>& tp, std::size_t self) {
    tp.accumulate(ia, tp.upstream(self).replicate(1, c));
  });
}

/// Replicate an r x 1 column into r x n.
template <class S>
Var<S> repeat_cols(const Var<S>& a, Index n) {
  if (a.cols() != 1) {
    throw ConfigError("repeat_cols: expected a column vector");
  }
  auto& t = detail::tape_of(a);
  const auto ia = a.id();
  Matrix<S> out = a.value().replicate(1, n);
  return t.record(std::move(out), {a}, [ia](Tape<S>& tp, std::size_t self) {
    tp.accumulate(ia, tp.upstream(self).rowwise().sum());
  });
}

template <class S>
Var<S> concat_cols(const Var<S>& a, const Var<S>& b) {
  if (a.rows() != b.rows()) {
    throw ConfigError("concat_cols: row mismatch " + std::to_string(a.rows()) + " vs " +
                      std::to_string(b.rows()));
  }
  auto& t = detail::tape_of(a);
  const auto ia = a.id();
  const auto ib = b.id();
  const Index ca = a.cols();
  const Index cb = b.cols();
  Matrix<S> out(a.rows(), ca + cb);
  out << a.value(), b.value();
  return t.record(std::move(out), {a, b}, [ia, ib, ca, cb](Tape<S>& tp, std::size_t self) {
    const auto& g = tp.upstream(self);
    tp.accumulate(ia, g.leftCols(ca));
    tp.accumulate(ib, g.rightCols(cb));
  });
}

template <class S>
Var<S> slice_cols(const Var<S>& a, Index start, Index count) {
  if (start < 0 || count < 0 || start + count > a.cols()) {
    throw ConfigError("slice_cols: range out of bounds");
  }
  auto& t = detail::tape_of(a);
  const auto ia = a.id();
  const Index r = a.rows();
  const Index c = a.cols();
  Matrix<S> out = a.value().middleCols(start, count);
  return t.record(std::move(out), {a}, [ia, r, c, start, count](Tape<S>& tp, std::size_t self) {
    Matrix<S> g = Matrix<S>::Zero(r, c);
    g.middleCols(start, count) = tp.upstream(self);
    tp.accumulate(ia, g);
  });
}

/// Row gather: out.row(k) = a.row(rows[k]); repeated indices accumulate.
template <class S>
Var<S> gather_rows(const Var<S>& a, std::vector<Index> rows) {
  auto& t = detail::tape_of(a);
  const auto ia = a.id();
  const Index r = a.rows();
  Matrix<S> out(static_cast<Index>(rows.size()), a.cols());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (rows[k] < 0 || rows[k] >= r) {
      throw ConfigError("gather_rows: index out of range");
    }
    out.row(static_cast<Index>(k)) = a.value().row(rows[k]);
  }
  return t.record(std::move(out), {a}, [ia, r, rows = std::move(rows)](Tape<S>& tp,
                                                                        std::size_t self) {
    const auto& g = tp.upstream(self);
    Matrix<S> acc = Matrix<S>::Zero(r, g.cols());
    for (std::size_t k = 0; k < rows.size(); ++k) {
      acc.row(rows[k]) += g.row(static_cast<Index>(k));
    }
    tp.accumulate(ia, acc);
  });
}

template <class S>
Var<S> operator+(const Var<S>& a, const Var<S>& b) { return add(a, b); }
template <class S>
Var<S> operator-(const Var<S>& a, const Var<S>& b) { return sub(a, b); }
template <class S>
Var<S> operator*(const Var<S>& a, const Var<S>& b) { return mul(a, b); }
template <class S>
Var<S> operator-(const Var<S>& a) { return neg(a); }

}  // namespace sacn::ad
