#pragma once

#include <Eigen/Dense>

#include <sstream>
#include <string>

namespace fpt {

using Index = Eigen::Index;

/// Dense row-major tensor. Every tensor in the project is rank 2; vectors are
/// stored as 1 x n rows so that checkpoints keep a single layout.
template <typename Scalar>
using Tensor = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar>
using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

using TensorD = Tensor<double>;
using RowVectorD = RowVector<double>;

template <typename Derived>
std::string shape_string(const Eigen::DenseBase<Derived>& m) {
  std::ostringstream os;
  os << "[" << m.rows() << "x" << m.cols() << "]";
  return os.str();
}

inline std::string shape_string(Index rows, Index cols) {
  std::ostringstream os;
  os << "[" << rows << "x" << cols << "]";
  return os.str();
}

template <typename Derived>
bool all_finite(const Eigen::DenseBase<Derived>& m) {
  return m.derived().array().isFinite().all();
}

}  // namespace fpt
