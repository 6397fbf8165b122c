#include "inbetween/inference/autodiff.hpp"

#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

#include "inbetween/core/kernels.hpp"

namespace inbetween::ad {
namespace {

Tape& tape_of(Var a, Var b) {
  if (a.tape == nullptr || a.tape != b.tape) throw std::logic_error("vars from different tapes");
  return *a.tape;
}

bool needs(Tape& t, Var a) { return t.requires_grad(a.id); }
bool needs(Tape& t, Var a, Var b) { return t.requires_grad(a.id) || t.requires_grad(b.id); }

template <class F>
Var unary(Var a, Matrix value, F&& local_grad) {
  Tape& t = *a.tape;
  return t.push(std::move(value), needs(t, a),
                [ai = a.id, g = std::forward<F>(local_grad)](Tape& tp, std::size_t self) {
                  if (!tp.requires_grad(ai)) return;
                  const Matrix& up = tp.grad(self);
                  Matrix& ga = tp.grad_buffer(ai);
                  g(tp, self, up, ga);
                });
}

}  // namespace

const Matrix& Var::value() const { return tape->value(id); }
const Matrix& Var::grad() const { return tape->grad(id); }

double Var::scalar() const {
  const Matrix& v = value();
  if (v.size() != 1) throw ShapeError(fmt::format("scalar() on {} node", v.shape_string()));
  return v[0];
}

Var Tape::push(Matrix value, bool requires_grad, Backward back) {
  nodes_.push_back({std::move(value), Matrix(), requires_grad ? std::move(back) : Backward(),
                    requires_grad});
  return {this, nodes_.size() - 1};
}

Var Tape::leaf(Matrix value) { return push(std::move(value), true, {}); }

Var Tape::constant(Matrix value) { return push(std::move(value), false, {}); }

Matrix& Tape::grad_buffer(std::size_t id) {
  Node& n = nodes_[id];
  if (n.grad.empty() && !n.value.empty()) n.grad = Matrix(n.value.rows(), n.value.cols());
  return n.grad;
}

void Tape::backward(Var out) {
  if (out.tape != this) throw std::logic_error("backward on foreign var");
  if (nodes_[out.id].value.size() != 1) {
    throw ShapeError("backward needs a scalar output");
  }
  for (auto& n : nodes_) n.grad = Matrix();
  grad_buffer(out.id)[0] = 1.0;
  for (std::size_t i = out.id + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (n.back && !n.grad.empty()) n.back(*this, i);
  }
}

Var add(Var a, Var b) {
  Tape& t = tape_of(a, b);
  require_same_shape(a.value(), b.value(), "add");
  Matrix v = a.value();
  kernels::axpy(1.0, b.value().data(), v.data(), v.size());
  return t.push(std::move(v), needs(t, a, b), [ai = a.id, bi = b.id](Tape& tp, std::size_t s) {
    const Matrix& up = tp.grad(s);
    for (std::size_t id : {ai, bi}) {
      if (tp.requires_grad(id)) kernels::axpy(1.0, up.data(), tp.grad_buffer(id).data(), up.size());
    }
  });
}

Var sub(Var a, Var b) {
  Tape& t = tape_of(a, b);
  require_same_shape(a.value(), b.value(), "sub");
  Matrix v = a.value();
  kernels::axpy(-1.0, b.value().data(), v.data(), v.size());
  return t.push(std::move(v), needs(t, a, b), [ai = a.id, bi = b.id](Tape& tp, std::size_t s) {
    const Matrix& up = tp.grad(s);
    if (tp.requires_grad(ai)) kernels::axpy(1.0, up.data(), tp.grad_buffer(ai).data(), up.size());
    if (tp.requires_grad(bi)) kernels::axpy(-1.0, up.data(), tp.grad_buffer(bi).data(), up.size());
  });
}

Var mul(Var a, Var b) {
  Tape& t = tape_of(a, b);
  require_same_shape(a.value(), b.value(), "mul");
  Matrix v(a.rows(), a.cols());
  const auto& k = kernels::active();
  k.hadamard(a.value().data(), b.value().data(), v.data(), v.size());
  return t.push(std::move(v), needs(t, a, b), [ai = a.id, bi = b.id](Tape& tp, std::size_t s) {
    const auto& kk = kernels::active();
    const Matrix& up = tp.grad(s);
    if (tp.requires_grad(ai)) {
      kk.hadamard_acc(up.data(), tp.value(bi).data(), tp.grad_buffer(ai).data(), up.size());
    }
    if (tp.requires_grad(bi)) {
      kk.hadamard_acc(up.data(), tp.value(ai).data(), tp.grad_buffer(bi).data(), up.size());
    }
  });
}

Var matmul(Var a, Var b) {
  Tape& t = tape_of(a, b);
  Matrix v = inbetween::matmul(a.value(), b.value());
  return t.push(std::move(v), needs(t, a, b), [ai = a.id, bi = b.id](Tape& tp, std::size_t s) {
    const Matrix& up = tp.grad(s);
    const Matrix& av = tp.value(ai);
    const Matrix& bv = tp.value(bi);
    if (tp.requires_grad(ai)) {
      // dA = dC B^T
      kernels::gemm_nt(up.data(), bv.data(), tp.grad_buffer(ai).data(), up.rows(), up.cols(),
                       bv.rows(), 1.0);
    }
    if (tp.requires_grad(bi)) {
      // dB = A^T dC
      kernels::gemm_tn(av.data(), up.data(), tp.grad_buffer(bi).data(), av.rows(), av.cols(),
                       up.cols(), 1.0);
    }
  });
}

Var add_row(Var a, Var row) {
  Tape& t = tape_of(a, row);
  const Matrix& r = row.value();
  if (r.rows() != 1 || r.cols() != a.cols()) {
    throw ShapeError(fmt::format("add_row: {} onto {}", r.shape_string(), a.value().shape_string()));
  }
  Matrix v = a.value();
  for (std::size_t i = 0; i < v.rows(); ++i) kernels::axpy(1.0, r.data(), v.row(i).data(), v.cols());
  return t.push(std::move(v), needs(t, a, row),
                [ai = a.id, ri = row.id](Tape& tp, std::size_t s) {
                  const Matrix& up = tp.grad(s);
                  if (tp.requires_grad(ai)) {
                    kernels::axpy(1.0, up.data(), tp.grad_buffer(ai).data(), up.size());
                  }
                  if (tp.requires_grad(ri)) {
                    Matrix& g = tp.grad_buffer(ri);
                    for (std::size_t i = 0; i < up.rows(); ++i) {
                      kernels::axpy(1.0, up.row(i).data(), g.data(), up.cols());
                    }
                  }
                });
}

Var mul_row(Var a, Var row) {
  Tape& t = tape_of(a, row);
  const Matrix& r = row.value();
  if (r.rows() != 1 || r.cols() != a.cols()) {
    throw ShapeError(fmt::format("mul_row: {} onto {}", r.shape_string(), a.value().shape_string()));
  }
  Matrix v(a.rows(), a.cols());
  const auto& k = kernels::active();
  for (std::size_t i = 0; i < v.rows(); ++i) {
    k.hadamard(a.value().row(i).data(), r.data(), v.row(i).data(), v.cols());
  }
  return t.push(std::move(v), needs(t, a, row),
                [ai = a.id, ri = row.id](Tape& tp, std::size_t s) {
                  const auto& kk = kernels::active();
                  const Matrix& up = tp.grad(s);
                  const Matrix& av = tp.value(ai);
                  const Matrix& rv = tp.value(ri);
                  if (tp.requires_grad(ai)) {
                    Matrix& g = tp.grad_buffer(ai);
                    for (std::size_t i = 0; i < up.rows(); ++i) {
                      kk.hadamard_acc(up.row(i).data(), rv.data(), g.row(i).data(), up.cols());
                    }
                  }
                  if (tp.requires_grad(ri)) {
                    Matrix& g = tp.grad_buffer(ri);
                    for (std::size_t i = 0; i < up.rows(); ++i) {
                      kk.hadamard_acc(up.row(i).data(), av.row(i).data(), g.data(), up.cols());
                    }
                  }
                });
}

Var scale(Var a, double c) {
  Matrix v = a.value();
  for (double& x : v.flat()) x *= c;
  return unary(a, std::move(v), [c](Tape&, std::size_t, const Matrix& up, Matrix& ga) {
    kernels::axpy(c, up.data(), ga.data(), up.size());
  });
}

Var add_scalar(Var a, double c) {
  Matrix v = a.value();
  for (double& x : v.flat()) x += c;
  return unary(a, std::move(v), [](Tape&, std::size_t, const Matrix& up, Matrix& ga) {
    kernels::axpy(1.0, up.data(), ga.data(), up.size());
  });
}

Var relu(Var a) {
  Matrix v(a.rows(), a.cols());
  kernels::active().relu(a.value().data(), v.data(), v.size());
  return unary(a, std::move(v), [ai = a.id](Tape& tp, std::size_t, const Matrix& up, Matrix& ga) {
    Matrix g = up;
    kernels::active().relu_mask(tp.value(ai).data(), g.data(), g.size());
    kernels::axpy(1.0, g.data(), ga.data(), g.size());
  });
}

Var square(Var a) {
  Matrix v(a.rows(), a.cols());
  kernels::active().hadamard(a.value().data(), a.value().data(), v.data(), v.size());
  return unary(a, std::move(v), [ai = a.id](Tape& tp, std::size_t, const Matrix& up, Matrix& ga) {
    const Matrix& av = tp.value(ai);
    for (std::size_t i = 0; i < up.size(); ++i) ga[i] += 2.0 * av[i] * up[i];
  });
}

Var sqrt(Var a) {
  Matrix v = a.value();
  for (double& x : v.flat()) x = std::sqrt(x);
  return unary(a, std::move(v), [](Tape& tp, std::size_t s, const Matrix& up, Matrix& ga) {
    const Matrix& out = tp.value(s);
    for (std::size_t i = 0; i < up.size(); ++i) ga[i] += 0.5 * up[i] / out[i];
  });
}

Var exp(Var a) {
  Matrix v = a.value();
  for (double& x : v.flat()) x = std::exp(x);
  return unary(a, std::move(v), [](Tape& tp, std::size_t s, const Matrix& up, Matrix& ga) {
    kernels::active().hadamard_acc(up.data(), tp.value(s).data(), ga.data(), up.size());
  });
}

Var log(Var a) {
  Matrix v = a.value();
  for (double& x : v.flat()) x = std::log(x);
  return unary(a, std::move(v), [ai = a.id](Tape& tp, std::size_t, const Matrix& up, Matrix& ga) {
    const Matrix& av = tp.value(ai);
    for (std::size_t i = 0; i < up.size(); ++i) ga[i] += up[i] / av[i];
  });
}

Var sum(Var a) {
  double s = 0.0;
  for (double x : a.value().flat()) s += x;
  return unary(a, Matrix(1, 1, s), [](Tape&, std::size_t, const Matrix& up, Matrix& ga) {
    const double u = up[0];
    for (double& g : ga.flat()) g += u;
  });
}

Var tile_rows(Var a, std::size_t times) {
  const Matrix& av = a.value();
  Matrix v(av.rows() * times, av.cols());
  for (std::size_t t = 0; t < times; ++t) {
    std::copy(av.data(), av.data() + av.size(), v.data() + t * av.size());
  }
  return unary(a, std::move(v), [times](Tape&, std::size_t, const Matrix& up, Matrix& ga) {
    for (std::size_t t = 0; t < times; ++t) {
      kernels::axpy(1.0, up.data() + t * ga.size(), ga.data(), ga.size());
    }
  });
}

Var reshape(Var a, std::size_t rows, std::size_t cols) {
  const Matrix& av = a.value();
  if (rows * cols != av.size()) {
    throw ShapeError(fmt::format("reshape {} to {}x{}", av.shape_string(), rows, cols));
  }
  Matrix v(rows, cols, std::vector<double>(av.flat().begin(), av.flat().end()));
  return unary(a, std::move(v), [](Tape&, std::size_t, const Matrix& up, Matrix& ga) {
    kernels::axpy(1.0, up.data(), ga.data(), up.size());
  });
}

Var col_mean(Var a) {
  const Matrix& av = a.value();
  if (av.rows() == 0) throw ShapeError("col_mean of empty matrix");
  const double inv = 1.0 / static_cast<double>(av.rows());
  Matrix v(1, av.cols());
  for (std::size_t i = 0; i < av.rows(); ++i) kernels::axpy(inv, av.row(i).data(), v.data(), v.cols());
  return unary(a, std::move(v), [inv](Tape&, std::size_t, const Matrix& up, Matrix& ga) {
    for (std::size_t i = 0; i < ga.rows(); ++i) kernels::axpy(inv, up.data(), ga.row(i).data(), ga.cols());
  });
}

}  // namespace inbetween::ad
