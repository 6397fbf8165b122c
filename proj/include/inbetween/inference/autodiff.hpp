#pragma once

// Matrix-level reverse-mode differentiation. A Tape records every operation
// of one objective evaluation; Tape::backward seeds a scalar (1 x 1) output
// and accumulates gradients into every leaf created with leaf().

#include <cstddef>
#include <functional>
#include <vector>

#include "inbetween/core/matrix.hpp"

namespace inbetween::ad {

class Tape;

/// Handle to a tape node. Cheap to copy; valid while its tape lives.
struct Var {
  Tape* tape = nullptr;
  std::size_t id = 0;

  [[nodiscard]] const Matrix& value() const;
  [[nodiscard]] const Matrix& grad() const;
  [[nodiscard]] std::size_t rows() const { return value().rows(); }
  [[nodiscard]] std::size_t cols() const { return value().cols(); }
  /// Value of a 1 x 1 node.
  [[nodiscard]] double scalar() const;
};

class Tape {
 public:
  Tape() { nodes_.reserve(256); }
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Differentiable input.
  Var leaf(Matrix value);
  /// Non-differentiable input.
  Var constant(Matrix value);
  Var scalar_constant(double v) { return constant(Matrix(1, 1, v)); }

  /// Backpropagates d(out)/d(node) for every node reachable from out.
  void backward(Var out);

  [[nodiscard]] const Matrix& value(std::size_t id) const { return nodes_[id].value; }
  [[nodiscard]] const Matrix& grad(std::size_t id) const { return nodes_[id].grad; }
  [[nodiscard]] bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
  [[nodiscard]] std::size_t size() const noexcept { return nodes_.size(); }

  // Used by op implementations.
  using Backward = std::function<void(Tape&, std::size_t self)>;
  Var push(Matrix value, bool requires_grad, Backward back);
  /// Gradient buffer of `id`, zero-initialised on first use.
  Matrix& grad_buffer(std::size_t id);

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    Backward back;
    bool requires_grad = false;
  };
  std::vector<Node> nodes_;
};

// Elementwise and structural ops. Binary elementwise ops need equal shapes.
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var matmul(Var a, Var b);
/// a (n x m) + row (1 x m) on every row.
Var add_row(Var a, Var row);
/// a (n x m) * row (1 x m) on every row.
Var mul_row(Var a, Var row);
Var scale(Var a, double c);
Var add_scalar(Var a, double c);
Var relu(Var a);
Var square(Var a);
Var sqrt(Var a);
Var exp(Var a);
Var log(Var a);
/// 1 x 1 sum of all entries.
Var sum(Var a);
/// Stacks `times` copies of a vertically.
Var tile_rows(Var a, std::size_t times);
/// Same data, new shape (row-major).
Var reshape(Var a, std::size_t rows, std::size_t cols);
/// 1 x m column means.
Var col_mean(Var a);

inline Var operator+(Var a, Var b) { return add(a, b); }
inline Var operator-(Var a, Var b) { return sub(a, b); }
inline Var operator*(Var a, Var b) { return mul(a, b); }

}  // namespace inbetween::ad
