#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fpt/error.hpp"
#include "fpt/numeric/ops.hpp"
#include "fpt/numeric/tensor.hpp"

// Minimal reverse-mode tape over dense matrices. Nodes are appended in
// evaluation order, so a reverse sweep over the node list is a valid
// topological order for back-propagation.
namespace fpt::ad {

template <typename Scalar>
class Tape;

template <typename Scalar>
struct Var {
  Tape<Scalar>* tape = nullptr;
  int id = -1;

  const Tensor<Scalar>& value() const { return tape->value(*this); }
  Index rows() const { return value().rows(); }
  Index cols() const { return value().cols(); }
  Scalar scalar() const { return value()(0, 0); }
};

template <typename Scalar>
class Tape {
 public:
  using Matrix = Tensor<Scalar>;
  using Backward = std::function<void(Tape&, const Matrix&)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var<Scalar> constant(Matrix value) { return push(std::move(value), false, {}); }

  /// Leaf that receives a gradient but is not tied to a named parameter.
  Var<Scalar> variable(Matrix value) { return push(std::move(value), true, {}); }

  /// Named trainable leaf. Repeated requests for the same name return the same
  /// node so that gradient contributions accumulate.
  Var<Scalar> parameter(const std::string& name, const TensorD& value) {
    if (auto it = params_.find(name); it != params_.end()) return Var<Scalar>{this, it->second};
    Var<Scalar> v = push(value.template cast<Scalar>(), true, {});
    params_.emplace(name, v.id);
    return v;
  }

  /// Appends an op result. `backward` receives the output gradient and is only
  /// kept when some input needs a gradient.
  Var<Scalar> record(Matrix value, std::initializer_list<Var<Scalar>> inputs, Backward backward) {
    bool needs = false;
    for (const auto& in : inputs) needs = needs || nodes_[in.id].needs_grad;
    return push(std::move(value), needs, needs ? std::move(backward) : Backward{});
  }

  Var<Scalar> record(Matrix value, std::span<const Var<Scalar>> inputs, Backward backward) {
    bool needs = false;
    for (const auto& in : inputs) needs = needs || nodes_[in.id].needs_grad;
    return push(std::move(value), needs, needs ? std::move(backward) : Backward{});
  }

  const Matrix& value(Var<Scalar> v) const { return nodes_[v.id].value; }

  /// Gradient of the last backward root w.r.t. `v`; empty if none reached it.
  const Matrix& grad(Var<Scalar> v) const { return nodes_[v.id].grad; }

  bool needs_grad(Var<Scalar> v) const { return nodes_[v.id].needs_grad; }

  void accumulate(Var<Scalar> v, const Matrix& g) {
    Node& node = nodes_[v.id];
    if (!node.needs_grad) return;
    if (node.grad.size() == 0 && node.value.size() != 0) {
      node.grad = g;
    } else {
      node.grad += g;
    }
  }

  void backward(Var<Scalar> root) {
    if (root.rows() != 1 || root.cols() != 1) {
      throw DimensionError("backward: root must be 1x1, got " + shape_string(root.value()));
    }
    for (auto& node : nodes_) node.grad.resize(0, 0);
    nodes_[root.id].grad = Matrix::Ones(1, 1);
    for (int i = root.id; i >= 0; --i) {
      Node& node = nodes_[i];
      if (!node.backward || node.grad.size() == 0) continue;
      const Matrix g = node.grad;
      node.backward(*this, g);
    }
  }

  /// Gradients of all named parameters reached by the last backward sweep.
  std::map<std::string, TensorD> gradients() const {
    std::map<std::string, TensorD> out;
    for (const auto& [name, id] : params_) {
      const Node& node = nodes_[id];
      if (node.grad.size() != 0) out.emplace(name, node.grad.template cast<double>());
    }
    return out;
  }

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    Backward backward;
    bool needs_grad = false;
  };

  Var<Scalar> push(Matrix value, bool needs_grad, Backward backward) {
    nodes_.push_back(Node{std::move(value), Matrix(), std::move(backward), needs_grad});
    return Var<Scalar>{this, static_cast<int>(nodes_.size() - 1)};
  }

  std::vector<Node> nodes_;
  std::map<std::string, int> params_;
};

// ---------------------------------------------------------------------------
// Ops

template <typename S>
Var<S> matmul(Var<S> a, Var<S> b) {
  Tensor<S> out = fpt::matmul(a.value(), b.value());
  return a.tape->record(std::move(out), {a, b}, [a, b](Tape<S>& t, const Tensor<S>& g) {
    if (t.needs_grad(a)) t.accumulate(a, g * b.value().transpose());
    if (t.needs_grad(b)) t.accumulate(b, a.value().transpose() * g);
  });
}

template <typename S>
Var<S> transpose(Var<S> a) {
  Tensor<S> out = a.value().transpose();
  return a.tape->record(std::move(out), {a}, [a](Tape<S>& t, const Tensor<S>& g) {
    t.accumulate(a, g.transpose());
  });
}

template <typename S>
void require_same_shape(const char* op, Var<S> a, Var<S> b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(std::string(op) + ": shapes differ, " + shape_string(a.value()) + " vs " +
                         shape_string(b.value()));
  }
}

template <typename S>
Var<S> add(Var<S> a, Var<S> b) {
  require_same_shape("add", a, b);
  Tensor<S> out = a.value() + b.value();
  return a.tape->record(std::move(out), {a, b}, [a, b](Tape<S>& t, const Tensor<S>& g) {
    t.accumulate(a, g);
    t.accumulate(b, g);
  });
}

template <typename S>
Var<S> sub(Var<S> a, Var<S> b) {
  require_same_shape("sub", a, b);
  Tensor<S> out = a.value() - b.value();
  return a.tape->record(std::move(out), {a, b}, [a, b](Tape<S>& t, const Tensor<S>& g) {
    t.accumulate(a, g);
    t.accumulate(b, -g);
  });
}

/// Adds a 1 x n row to every row of `a`.
template <typename S>
Var<S> add_row(Var<S> a, Var<S> row) {
  if (row.rows() != 1 || row.cols() != a.cols()) {
    throw DimensionError("add_row: row " + shape_string(row.value()) + " does not fit " +
                         shape_string(a.value()));
  }
  Tensor<S> out = a.value().rowwise() + row.value().row(0);
  return a.tape->record(std::move(out), {a, row}, [a, row](Tape<S>& t, const Tensor<S>& g) {
    t.accumulate(a, g);
    if (t.needs_grad(row)) t.accumulate(row, g.colwise().sum());
  });
}

/// Elementwise product.
template <typename S>
Var<S> mul(Var<S> a, Var<S> b) {
  require_same_shape("mul", a, b);
  Tensor<S> out = a.value().cwiseProduct(b.value());
  return a.tape->record(std::move(out), {a, b}, [a, b](Tape<S>& t, const Tensor<S>& g) {
    if (t.needs_grad(a)) t.accumulate(a, g.cwiseProduct(b.value()));
    if (t.needs_grad(b)) t.accumulate(b, g.cwiseProduct(a.value()));
  });
}

template <typename S>
Var<S> scale(Var<S> a, S c) {
  Tensor<S> out = a.value() * c;
  return a.tape->record(std::move(out), {a}, [a, c](Tape<S>& t, const Tensor<S>& g) {
    t.accumulate(a, g * c);
  });
}

template <typename S>
Var<S> tanh(Var<S> a) {
  Tensor<S> out = a.value().array().tanh().matrix();
  Var<S> result = a.tape->record(out, {a}, [a, out](Tape<S>& t, const Tensor<S>& g) {
    t.accumulate(a, (g.array() * (S(1) - out.array().square())).matrix());
  });
  return result;
}

/// GELU, tanh approximation.
template <typename S>
Var<S> gelu(Var<S> a) {
  using std::sqrt;
  const S k = sqrt(S(2) / S(3.14159265358979323846264338327950288L));
  const S c = S(0.044715);
  const auto& x = a.value().array();
  Tensor<S> th = (k * (x + c * x.cube())).tanh().matrix();
  Tensor<S> out = (S(0.5) * x * (S(1) + th.array())).matrix();
  return a.tape->record(std::move(out), {a}, [a, th, k, c](Tape<S>& t, const Tensor<S>& g) {
    const auto& x = a.value().array();
    const auto& tt = th.array();
    auto d = S(0.5) * (S(1) + tt) +
             S(0.5) * x * (S(1) - tt.square()) * k * (S(1) + S(3) * c * x.square());
    t.accumulate(a, (g.array() * d).matrix());
  });
}

/// Row-wise layer normalization with gain and bias rows.
template <typename S>
Var<S> layer_norm(Var<S> x, Var<S> gain, Var<S> bias, S eps = S(1e-5)) {
  using std::sqrt;
  const Index n = x.rows();
  const Index d = x.cols();
  if (gain.cols() != d || bias.cols() != d || gain.rows() != 1 || bias.rows() != 1) {
    throw DimensionError("layer_norm: gain/bias must be 1x" + std::to_string(d));
  }
  Tensor<S> xhat(n, d);
  RowVector<S> inv_std(n);
  for (Index r = 0; r < n; ++r) {
    const S mu = x.value().row(r).mean();
    const S var = (x.value().row(r).array() - mu).square().mean();
    inv_std(r) = S(1) / sqrt(var + eps);
    xhat.row(r) = (x.value().row(r).array() - mu) * inv_std(r);
  }
  Tensor<S> out = (xhat.array().rowwise() * gain.value().row(0).array()).matrix();
  out.rowwise() += bias.value().row(0);
  return x.tape->record(
      std::move(out), {x, gain, bias},
      [x, gain, bias, xhat, inv_std](Tape<S>& t, const Tensor<S>& g) {
        if (t.needs_grad(gain)) {
          t.accumulate(gain, g.cwiseProduct(xhat).colwise().sum());
        }
        if (t.needs_grad(bias)) t.accumulate(bias, g.colwise().sum());
        if (t.needs_grad(x)) {
          Tensor<S> dxhat = (g.array().rowwise() * gain.value().row(0).array()).matrix();
          Tensor<S> dx(g.rows(), g.cols());
          for (Index r = 0; r < g.rows(); ++r) {
            const S m1 = dxhat.row(r).mean();
            const S m2 = dxhat.row(r).cwiseProduct(xhat.row(r)).mean();
            dx.row(r) = inv_std(r) * (dxhat.row(r).array() - m1 - xhat.row(r).array() * m2);
          }
          t.accumulate(x, dx);
        }
      });
}

/// Softmax applied independently to each row.
template <typename S>
Var<S> softmax_rows(Var<S> a) {
  Tensor<S> out(a.rows(), a.cols());
  for (Index r = 0; r < a.rows(); ++r) out.row(r) = fpt::softmax(a.value().row(r));
  return a.tape->record(out, {a}, [a, out](Tape<S>& t, const Tensor<S>& g) {
    Tensor<S> dx(out.rows(), out.cols());
    for (Index r = 0; r < out.rows(); ++r) {
      const S dot = g.row(r).dot(out.row(r));
      dx.row(r) = out.row(r).cwiseProduct((g.row(r).array() - dot).matrix());
    }
    t.accumulate(a, dx);
  });
}

/// Softmax of a 1 x n row (the classifier distribution).
template <typename S>
Var<S> softmax(Var<S> a) {
  if (a.rows() != 1) throw DimensionError("softmax: expected a row, got " + shape_string(a.value()));
  return softmax_rows(a);
}

/// -log softmax(logits)[label] for a 1 x n logits row, as a 1 x 1 node.
template <typename S>
Var<S> cross_entropy(Var<S> logits, Index label) {
  if (logits.rows() != 1) {
    throw DimensionError("cross_entropy: expected a logits row, got " + shape_string(logits.value()));
  }
  Tensor<S> out(1, 1);
  out(0, 0) = fpt::cross_entropy(logits.value(), label);
  return logits.tape->record(std::move(out), {logits}, [logits, label](Tape<S>& t, const Tensor<S>& g) {
    Tensor<S> d = fpt::softmax(logits.value());
    d(0, label) -= S(1);
    t.accumulate(logits, d * g(0, 0));
  });
}

/// Divides each row by max(|row|, eps).
template <typename S>
Var<S> row_normalize(Var<S> a, S eps = S(kCosineEpsilon)) {
  RowVector<S> norms(a.rows());
  Tensor<S> out(a.rows(), a.cols());
  for (Index r = 0; r < a.rows(); ++r) {
    norms(r) = std::max<S>(a.value().row(r).norm(), eps);
    out.row(r) = a.value().row(r) / norms(r);
  }
  return a.tape->record(out, {a}, [a, out, norms, eps](Tape<S>& t, const Tensor<S>& g) {
    Tensor<S> dx(out.rows(), out.cols());
    for (Index r = 0; r < out.rows(); ++r) {
      if (norms(r) > eps) {
        const S dot = out.row(r).dot(g.row(r));
        dx.row(r) = (g.row(r) - dot * out.row(r)) / norms(r);
      } else {
        dx.row(r) = g.row(r) / eps;
      }
    }
    t.accumulate(a, dx);
  });
}

/// Cosine similarity of two equally sized tensors (flattened), as 1 x 1.
template <typename S>
Var<S> cosine(Var<S> u, Var<S> v) {
  if (u.value().size() != v.value().size()) {
    throw DimensionError("cosine: lengths differ, " + shape_string(u.value()) + " vs " +
                         shape_string(v.value()));
  }
  Tensor<S> out(1, 1);
  out(0, 0) = fpt::cosine(u.value(), v.value());
  return u.tape->record(std::move(out), {u, v}, [u, v](Tape<S>& t, const Tensor<S>& g) {
    const S eps(kCosineEpsilon);
    const S nu = u.value().norm();
    const S nv = v.value().norm();
    const S cu = std::max(nu, eps);
    const S cv = std::max(nv, eps);
    const S dot = (u.value().array() * v.value().array()).sum();
    const S g0 = g(0, 0);
    if (t.needs_grad(u)) {
      Tensor<S> du = v.value() / (cu * cv);
      if (nu > eps) du -= u.value() * (dot / (cv * nu * nu * nu));
      t.accumulate(u, du * g0);
    }
    if (t.needs_grad(v)) {
      Tensor<S> dv = u.value() / (cu * cv);
      if (nv > eps) dv -= v.value() * (dot / (cu * nv * nv * nv));
      t.accumulate(v, dv * g0);
    }
  });
}

template <typename S>
Var<S> concat_rows(std::span<const Var<S>> parts) {
  if (parts.empty()) throw DimensionError("concat_rows: no inputs");
  Index rows = 0;
  const Index cols = parts.front().cols();
  for (const auto& p : parts) {
    if (p.cols() != cols) {
      throw DimensionError("concat_rows: column count " + std::to_string(p.cols()) +
                           " differs from " + std::to_string(cols));
    }
    rows += p.rows();
  }
  Tensor<S> out(rows, cols);
  Index offset = 0;
  for (const auto& p : parts) {
    out.middleRows(offset, p.rows()) = p.value();
    offset += p.rows();
  }
  std::vector<Var<S>> inputs(parts.begin(), parts.end());
  return parts.front().tape->record(
      std::move(out), std::span<const Var<S>>(inputs), [inputs](Tape<S>& t, const Tensor<S>& g) {
        Index at = 0;
        for (const auto& p : inputs) {
          const Index r = p.rows();
          if (r > 0 && t.needs_grad(p)) t.accumulate(p, g.middleRows(at, r));
          at += r;
        }
      });
}

template <typename S>
Var<S> concat_rows(std::initializer_list<Var<S>> parts) {
  std::vector<Var<S>> v(parts);
  return concat_rows(std::span<const Var<S>>(v));
}

template <typename S>
Var<S> concat_cols(std::span<const Var<S>> parts) {
  if (parts.empty()) throw DimensionError("concat_cols: no inputs");
  Index cols = 0;
  const Index rows = parts.front().rows();
  for (const auto& p : parts) {
    if (p.rows() != rows) throw DimensionError("concat_cols: row counts differ");
    cols += p.cols();
  }
  Tensor<S> out(rows, cols);
  Index offset = 0;
  for (const auto& p : parts) {
    out.middleCols(offset, p.cols()) = p.value();
    offset += p.cols();
  }
  std::vector<Var<S>> inputs(parts.begin(), parts.end());
  return parts.front().tape->record(
      std::move(out), std::span<const Var<S>>(inputs), [inputs](Tape<S>& t, const Tensor<S>& g) {
        Index at = 0;
        for (const auto& p : inputs) {
          const Index c = p.cols();
          if (c > 0 && t.needs_grad(p)) t.accumulate(p, g.middleCols(at, c));
          at += c;
        }
      });
}

template <typename S>
Var<S> slice_rows(Var<S> a, Index begin, Index count) {
  if (begin < 0 || count < 0 || begin + count > a.rows()) {
    throw DimensionError("slice_rows: [" + std::to_string(begin) + ", " +
                         std::to_string(begin + count) + ") outside " + shape_string(a.value()));
  }
  Tensor<S> out = a.value().middleRows(begin, count);
  return a.tape->record(std::move(out), {a}, [a, begin, count](Tape<S>& t, const Tensor<S>& g) {
    Tensor<S> d = Tensor<S>::Zero(a.rows(), a.cols());
    d.middleRows(begin, count) = g;
    t.accumulate(a, d);
  });
}

template <typename S>
Var<S> slice_cols(Var<S> a, Index begin, Index count) {
  if (begin < 0 || count < 0 || begin + count > a.cols()) {
    throw DimensionError("slice_cols: [" + std::to_string(begin) + ", " +
                         std::to_string(begin + count) + ") outside " + shape_string(a.value()));
  }
  Tensor<S> out = a.value().middleCols(begin, count);
  return a.tape->record(std::move(out), {a}, [a, begin, count](Tape<S>& t, const Tensor<S>& g) {
    Tensor<S> d = Tensor<S>::Zero(a.rows(), a.cols());
    d.middleCols(begin, count) = g;
    t.accumulate(a, d);
  });
}

/// Embedding lookup: row i of the result is row ids[i] of `table`.
template <typename S>
Var<S> gather_rows(Var<S> table, std::span<const int> ids) {
  Tensor<S> out(static_cast<Index>(ids.size()), table.cols());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || ids[i] >= table.rows()) {
      throw IndexError("gather_rows: id " + std::to_string(ids[i]) + " outside table of " +
                       std::to_string(table.rows()) + " rows");
    }
    out.row(static_cast<Index>(i)) = table.value().row(ids[i]);
  }
  std::vector<int> idx(ids.begin(), ids.end());
  return table.tape->record(std::move(out), {table}, [table, idx](Tape<S>& t, const Tensor<S>& g) {
    Tensor<S> d = Tensor<S>::Zero(table.rows(), table.cols());
    for (std::size_t i = 0; i < idx.size(); ++i) d.row(idx[i]) += g.row(static_cast<Index>(i));
    t.accumulate(table, d);
  });
}

/// Coordinate-wise mean over rows, giving 1 x cols.
template <typename S>
Var<S> mean_rows(Var<S> a) {
  if (a.rows() == 0) throw DimensionError("mean_rows: no rows");
  Tensor<S> out = a.value().colwise().mean();
  return a.tape->record(std::move(out), {a}, [a](Tape<S>& t, const Tensor<S>& g) {
    Tensor<S> d = g.replicate(a.rows(), 1) / S(a.rows());
    t.accumulate(a, d);
  });
}

template <typename S>
Var<S> sum(Var<S> a) {
  Tensor<S> out(1, 1);
  out(0, 0) = a.value().sum();
  return a.tape->record(std::move(out), {a}, [a](Tape<S>& t, const Tensor<S>& g) {
    t.accumulate(a, Tensor<S>::Constant(a.rows(), a.cols(), g(0, 0)));
  });
}

/// Mean of 1 x 1 nodes.
template <typename S>
Var<S> mean(std::span<const Var<S>> scalars) {
  if (scalars.empty()) throw DimensionError("mean: no inputs");
  return scale(sum(concat_rows(scalars)), S(1) / S(scalars.size()));
}

/// out(r, k) = a(order[k][r], k): column k is re-ordered by the permutation
/// order[k], listing source rows top-down.
template <typename S>
Var<S> permute_columns(Var<S> a, const std::vector<std::vector<Index>>& order) {
  const Index n = a.rows();
  if (static_cast<Index>(order.size()) != a.cols()) {
    throw DimensionError("permute_columns: " + std::to_string(order.size()) +
                         " orders for matrix " + shape_string(a.value()));
  }
  Tensor<S> out(n, a.cols());
  for (Index k = 0; k < a.cols(); ++k) {
    if (static_cast<Index>(order[k].size()) != n) {
      throw DimensionError("permute_columns: order length does not match " +
                           shape_string(a.value()));
    }
    for (Index r = 0; r < n; ++r) out(r, k) = a.value()(order[k][r], k);
  }
  return a.tape->record(std::move(out), {a}, [a, order](Tape<S>& t, const Tensor<S>& g) {
    Tensor<S> d = Tensor<S>::Zero(a.rows(), a.cols());
    for (Index k = 0; k < a.cols(); ++k) {
      for (Index r = 0; r < a.rows(); ++r) d(order[k][r], k) += g(r, k);
    }
    t.accumulate(a, d);
  });
}

/// ListMLE over columns (see fpt::listmle_loss), as 1 x 1.
template <typename S>
Var<S> listmle(Var<S> ranked) {
  Tensor<S> out(1, 1);
  out(0, 0) = fpt::listmle_loss(ranked.value());
  return ranked.tape->record(std::move(out), {ranked}, [ranked](Tape<S>& t, const Tensor<S>& g) {
    using std::exp;
    using std::log1p;
    const Tensor<S>& x = ranked.value();
    const Index n = x.rows();
    Tensor<S> d(n, x.cols());
    std::vector<S> lse(static_cast<std::size_t>(n));
    for (Index k = 0; k < x.cols(); ++k) {
      S suffix = -std::numeric_limits<S>::infinity();
      for (Index i = n - 1; i >= 0; --i) {
        const S hi = std::max(suffix, x(i, k));
        const S lo = std::min(suffix, x(i, k));
        suffix = hi + log1p(exp(lo - hi));
        lse[static_cast<std::size_t>(i)] = suffix;
      }
      for (Index j = 0; j < n; ++j) {
        S acc(-1);
        for (Index i = 0; i <= j; ++i) acc += exp(x(j, k) - lse[static_cast<std::size_t>(i)]);
        d(j, k) = acc * g(0, 0);
      }
    }
    t.accumulate(ranked, d);
  });
}

}  // namespace fpt::ad
