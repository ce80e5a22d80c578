#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

#include "fpt/error.hpp"
#include "fpt/numeric/tensor.hpp"

// Value-level kernels shared by the tape and by callers that need no gradient.
namespace fpt {

inline constexpr double kCosineEpsilon = 1e-12;

template <typename DerivedA, typename DerivedB>
auto matmul(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  using Scalar = typename DerivedA::Scalar;
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul: inner extents differ, lhs " + shape_string(a) + " rhs " +
                         shape_string(b));
  }
  Tensor<Scalar> out = a * b;
  return out;
}

/// Numerically stable log-sum-exp over all coefficients.
template <typename Derived>
typename Derived::Scalar logsumexp(const Eigen::MatrixBase<Derived>& x) {
  using std::exp;
  using std::log1p;
  using Scalar = typename Derived::Scalar;
  Index arg = 0;
  const Scalar m = x.reshaped().maxCoeff(&arg);
  // The max term contributes exactly 1; log1p keeps the remainder accurate.
  Scalar rest(0);
  for (Index i = 0; i < x.size(); ++i) {
    if (i != arg) rest += exp(x.reshaped()(i) - m);
  }
  return m + log1p(rest);
}

/// Softmax of a row vector with max subtraction.
template <typename Derived>
RowVector<typename Derived::Scalar> softmax(const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  if (x.size() == 0) throw DimensionError("softmax: empty input");
  RowVector<Scalar> e = (x.array() - x.maxCoeff()).exp().matrix().reshaped().transpose();
  return e / e.sum();
}

template <typename Derived>
RowVector<typename Derived::Scalar> log_softmax(const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  RowVector<Scalar> flat = x.reshaped().transpose();
  return flat.array() - logsumexp(flat);
}

/// -log softmax(logits)[label].
template <typename Derived>
typename Derived::Scalar cross_entropy(const Eigen::MatrixBase<Derived>& logits, Index label) {
  if (label < 0 || label >= logits.size()) {
    throw IndexError("cross_entropy: label " + std::to_string(label) + " outside [0, " +
                     std::to_string(logits.size()) + ")");
  }
  using std::exp;
  using std::log1p;
  using Scalar = typename Derived::Scalar;
  RowVector<Scalar> flat = logits.reshaped().transpose();
  Index arg = 0;
  const Scalar m = flat.maxCoeff(&arg);
  Scalar rest(0);
  for (Index i = 0; i < flat.size(); ++i) {
    if (i != arg) rest += exp(flat(i) - m);
  }
  return (m - flat(label)) + log1p(rest);
}

/// u.v / (max(|u|, eps) max(|v|, eps)); zero vectors give 0.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar cosine(const Eigen::MatrixBase<DerivedA>& u,
                                 const Eigen::MatrixBase<DerivedB>& v) {
  using Scalar = typename DerivedA::Scalar;
  if (u.size() != v.size()) {
    throw DimensionError("cosine: lengths differ, " + shape_string(u) + " vs " + shape_string(v));
  }
  const Scalar eps(kCosineEpsilon);
  const Scalar nu = std::max<Scalar>(u.norm(), eps);
  const Scalar nv = std::max<Scalar>(v.norm(), eps);
  const Scalar dot = (u.reshaped().array() * v.reshaped().array()).sum();
  return dot / (nu * nv);
}

/// Negative log Plackett-Luce likelihood of each column's top-down order,
/// summed over columns: sum_k sum_i [log sum_{j>=i} exp(x_jk) - x_ik].
template <typename Derived>
typename Derived::Scalar listmle_loss(const Eigen::MatrixBase<Derived>& ranked) {
  using Scalar = typename Derived::Scalar;
  using std::exp;
  using std::log1p;
  Scalar total(0);
  const Index n = ranked.rows();
  for (Index k = 0; k < ranked.cols(); ++k) {
    // Suffix log-sum-exp, accumulated bottom-up.
    Scalar suffix = -std::numeric_limits<Scalar>::infinity();
    for (Index i = n - 1; i >= 0; --i) {
      const Scalar x = ranked(i, k);
      const Scalar hi = std::max(suffix, x);
      const Scalar lo = std::min(suffix, x);
      suffix = hi + log1p(exp(lo - hi));
      total += suffix - x;
    }
  }
  return total;
}

}  // namespace fpt
