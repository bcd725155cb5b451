#pragma once

#include "macronet/diff/tensor.hpp"

#include <cmath>
#include <numeric>
#include <vector>

namespace macronet::diff {

namespace detail {

template <typename Scalar>
void require_same_shape(const Tensor<Scalar>& a, const Tensor<Scalar>& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + shape_string(a.rows(), a.cols()) +
                         " vs " + shape_string(b.rows(), b.cols()));
  }
}

}  // namespace detail

/// x * weight^T + bias, with weight [out x in] and bias [1 x out].
template <typename Scalar>
Tensor<Scalar> affine(const Tensor<Scalar>& x, const Tensor<Scalar>& weight,
                      const Tensor<Scalar>& bias) {
  if (x.cols() != weight.cols()) {
    throw DimensionError("affine: input width " + std::to_string(x.cols()) +
                         " does not match layer input width " + std::to_string(weight.cols()));
  }
  if (bias.rows() != 1 || bias.cols() != weight.rows()) {
    throw DimensionError("affine: bias shape " + shape_string(bias.rows(), bias.cols()) +
                         " inconsistent with weight " + shape_string(weight.rows(), weight.cols()));
  }
  Mat<Scalar> out = x.value() * weight.value().transpose();
  out.rowwise() += bias.value().row(0);
  return Tensor<Scalar>::from_op(
      std::move(out), {x, weight, bias},
      [](Node<Scalar>& self) {
        auto& xn = *self.parents[0];
        auto& wn = *self.parents[1];
        auto& bn = *self.parents[2];
        if (xn.requires_grad) accumulate_grad(xn, self.grad * wn.value);
        if (wn.requires_grad) accumulate_grad(wn, self.grad.transpose() * xn.value);
        if (bn.requires_grad) accumulate_grad(bn, self.grad.colwise().sum());
      },
      "affine");
}

template <typename Scalar>
Tensor<Scalar> tanh(const Tensor<Scalar>& x) {
  Mat<Scalar> out = x.value().array().tanh().matrix();
  return Tensor<Scalar>::from_op(
      std::move(out), {x},
      [](Node<Scalar>& self) {
        accumulate_grad(*self.parents[0],
                        (self.grad.array() * (1 - self.value.array().square())).matrix());
      },
      "tanh");
}

template <typename Scalar>
Tensor<Scalar> leaky_relu(const Tensor<Scalar>& x, Scalar slope = Scalar(0.01)) {
  Mat<Scalar> out = x.value().unaryExpr([slope](Scalar v) { return v > 0 ? v : slope * v; });
  return Tensor<Scalar>::from_op(
      std::move(out), {x},
      [slope](Node<Scalar>& self) {
        auto& xn = *self.parents[0];
        Mat<Scalar> g = self.grad;
        for (Index i = 0; i < g.size(); ++i) {
          if (!(xn.value.data()[i] > 0)) g.data()[i] *= slope;
        }
        accumulate_grad(xn, g);
      },
      "leaky_relu");
}

template <typename Scalar>
Tensor<Scalar> exp(const Tensor<Scalar>& x) {
  Mat<Scalar> out = x.value().array().exp().matrix();
  return Tensor<Scalar>::from_op(
      std::move(out), {x},
      [](Node<Scalar>& self) {
        accumulate_grad(*self.parents[0], (self.grad.array() * self.value.array()).matrix());
      },
      "exp");
}

template <typename Scalar>
Tensor<Scalar> square(const Tensor<Scalar>& x) {
  Mat<Scalar> out = x.value().array().square().matrix();
  return Tensor<Scalar>::from_op(
      std::move(out), {x},
      [](Node<Scalar>& self) {
        auto& xn = *self.parents[0];
        accumulate_grad(xn, (2 * self.grad.array() * xn.value.array()).matrix());
      },
      "square");
}

template <typename Scalar>
Tensor<Scalar> add(const Tensor<Scalar>& a, const Tensor<Scalar>& b) {
  detail::require_same_shape(a, b, "add");
  return Tensor<Scalar>::from_op(
      a.value() + b.value(), {a, b},
      [](Node<Scalar>& self) {
        accumulate_grad(*self.parents[0], self.grad);
        accumulate_grad(*self.parents[1], self.grad);
      },
      "add");
}

template <typename Scalar>
Tensor<Scalar> sub(const Tensor<Scalar>& a, const Tensor<Scalar>& b) {
  detail::require_same_shape(a, b, "sub");
  return Tensor<Scalar>::from_op(
      a.value() - b.value(), {a, b},
      [](Node<Scalar>& self) {
        accumulate_grad(*self.parents[0], self.grad);
        accumulate_grad(*self.parents[1], -self.grad);
      },
      "sub");
}

/// Elementwise product.
template <typename Scalar>
Tensor<Scalar> mul(const Tensor<Scalar>& a, const Tensor<Scalar>& b) {
  detail::require_same_shape(a, b, "mul");
  Mat<Scalar> out = a.value().cwiseProduct(b.value());
  return Tensor<Scalar>::from_op(
      std::move(out), {a, b},
      [](Node<Scalar>& self) {
        auto& an = *self.parents[0];
        auto& bn = *self.parents[1];
        if (an.requires_grad) accumulate_grad(an, self.grad.cwiseProduct(bn.value));
        if (bn.requires_grad) accumulate_grad(bn, self.grad.cwiseProduct(an.value));
      },
      "mul");
}

template <typename Scalar>
Tensor<Scalar> scale(const Tensor<Scalar>& x, Scalar c) {
  return Tensor<Scalar>::from_op(
      x.value() * c, {x},
      [c](Node<Scalar>& self) { accumulate_grad(*self.parents[0], self.grad * c); }, "scale");
}

template <typename Scalar>
Tensor<Scalar> add_constant(const Tensor<Scalar>& x, Scalar c) {
  Mat<Scalar> out = (x.value().array() + c).matrix();
  return Tensor<Scalar>::from_op(
      std::move(out), {x},
      [](Node<Scalar>& self) { accumulate_grad(*self.parents[0], self.grad); }, "add_constant");
}

/// Sum of all entries, as a 1 x 1 tensor.
template <typename Scalar>
Tensor<Scalar> sum(const Tensor<Scalar>& x) {
  Mat<Scalar> out = Mat<Scalar>::Constant(1, 1, x.value().sum());
  return Tensor<Scalar>::from_op(
      std::move(out), {x},
      [](Node<Scalar>& self) {
        auto& xn = *self.parents[0];
        accumulate_grad(xn, Mat<Scalar>::Constant(xn.value.rows(), xn.value.cols(), self.grad(0, 0)));
      },
      "sum");
}

template <typename Scalar>
Tensor<Scalar> mean(const Tensor<Scalar>& x) {
  if (x.value().size() == 0) throw ContractError("mean of an empty tensor");
  return scale(sum(x), Scalar(1) / static_cast<Scalar>(x.value().size()));
}

/// Per-row sum: [rows x cols] -> [rows x 1].
template <typename Scalar>
Tensor<Scalar> row_sum(const Tensor<Scalar>& x) {
  Mat<Scalar> out = x.value().rowwise().sum();
  return Tensor<Scalar>::from_op(
      std::move(out), {x},
      [](Node<Scalar>& self) {
        auto& xn = *self.parents[0];
        accumulate_grad(xn, self.grad.replicate(1, xn.value.cols()));
      },
      "row_sum");
}

template <typename Scalar>
Tensor<Scalar> slice_cols(const Tensor<Scalar>& x, Index start, Index count) {
  if (start < 0 || count < 0 || start + count > x.cols()) {
    throw DimensionError("slice_cols: range [" + std::to_string(start) + ", " +
                         std::to_string(start + count) + ") outside width " +
                         std::to_string(x.cols()));
  }
  Mat<Scalar> out = x.value().middleCols(start, count);
  return Tensor<Scalar>::from_op(
      std::move(out), {x},
      [start, count](Node<Scalar>& self) {
        auto& xn = *self.parents[0];
        Mat<Scalar> g = Mat<Scalar>::Zero(xn.value.rows(), xn.value.cols());
        g.middleCols(start, count) = self.grad;
        accumulate_grad(xn, g);
      },
      "slice_cols");
}

template <typename Scalar>
Tensor<Scalar> concat_cols(const Tensor<Scalar>& a, const Tensor<Scalar>& b) {
  if (a.rows() != b.rows()) {
    throw DimensionError("concat_cols: row counts differ " + std::to_string(a.rows()) + " vs " +
                         std::to_string(b.rows()));
  }
  Mat<Scalar> out(a.rows(), a.cols() + b.cols());
  out << a.value(), b.value();
  const Index split = a.cols();
  return Tensor<Scalar>::from_op(
      std::move(out), {a, b},
      [split](Node<Scalar>& self) {
        accumulate_grad(*self.parents[0], self.grad.leftCols(split));
        accumulate_grad(*self.parents[1], self.grad.rightCols(self.grad.cols() - split));
      },
      "concat_cols");
}

/// out(:, j) = x(:, perm[j]).
template <typename Scalar>
Tensor<Scalar> permute_cols(const Tensor<Scalar>& x, const std::vector<Index>& perm) {
  if (static_cast<Index>(perm.size()) != x.cols()) {
    throw DimensionError("permute_cols: permutation of size " + std::to_string(perm.size()) +
                         " applied to width " + std::to_string(x.cols()));
  }
  Mat<Scalar> out = x.value()(Eigen::all, perm);
  return Tensor<Scalar>::from_op(
      std::move(out), {x},
      [perm](Node<Scalar>& self) {
        auto& xn = *self.parents[0];
        Mat<Scalar> g(self.grad.rows(), self.grad.cols());
        for (std::size_t j = 0; j < perm.size(); ++j) {
          g.col(perm[j]) = self.grad.col(static_cast<Index>(j));
        }
        accumulate_grad(xn, g);
      },
      "permute_cols");
}

template <typename Scalar>
Tensor<Scalar> operator+(const Tensor<Scalar>& a, const Tensor<Scalar>& b) { return add(a, b); }
template <typename Scalar>
Tensor<Scalar> operator-(const Tensor<Scalar>& a, const Tensor<Scalar>& b) { return sub(a, b); }
template <typename Scalar>
Tensor<Scalar> operator*(const Tensor<Scalar>& a, const Tensor<Scalar>& b) { return mul(a, b); }
template <typename Scalar>
Tensor<Scalar> operator*(Scalar c, const Tensor<Scalar>& x) { return scale(x, c); }

}  // namespace macronet::diff
