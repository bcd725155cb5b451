#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace macronet {

using Index = Eigen::Index;

/// Row-major dense matrix; rows are batch records, columns are features.
template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar>
using RowVec = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

template <typename Scalar>
using ColVec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using MatD = Mat<double>;
using RowVecD = RowVec<double>;
using ColVecD = ColVec<double>;

/// Shapes that do not line up (layer widths, batch sizes, flow dimensions).
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A non-finite value was produced or consumed.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on arguments or call order was violated.
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

inline std::string shape_string(Index rows, Index cols) {
  return "[" + std::to_string(rows) + " x " + std::to_string(cols) + "]";
}

}  // namespace macronet
