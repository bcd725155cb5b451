#pragma once

#include "macronet/diff/dense.hpp"

#include <string>
#include <utility>
#include <vector>

namespace macronet::flow {

using diff::Tensor;

/// Affine coupling: the first split_index coordinates pass through and
/// condition a scale s and shift t applied to the rest,
///   y2 = x2 * exp(s(x1)) + t(x1),
/// with s soft-clamped to (-scale_clamp, scale_clamp) via c * tanh(s / c).
template <typename Scalar>
class CouplingLayer {
 public:
  CouplingLayer(Index dim, const std::vector<Index>& hidden, Scalar scale_clamp,
                const std::string& name = "coupling")
      : dim_(dim),
        split_(dim / 2),
        clamp_(scale_clamp),
        scale_net_(dim / 2, hidden, dim - dim / 2, diff::Activation::LeakyRelu, name + ".s"),
        shift_net_(dim / 2, hidden, dim - dim / 2, diff::Activation::LeakyRelu, name + ".t") {
    if (dim < 2) throw DimensionError("coupling layer needs dimension >= 2, got " + std::to_string(dim));
    if (!(scale_clamp > 0)) throw ContractError("scale clamp must be positive");
  }

  /// identity = true zeroes both output layers so the layer starts as the identity map.
  template <typename Rng>
  void init(Rng& rng, bool identity) {
    scale_net_.init(rng, identity);
    shift_net_.init(rng, identity);
  }

  /// Returns (y, log_det) with log_det of shape [batch x 1].
  std::pair<Tensor<Scalar>, Tensor<Scalar>> forward(const Tensor<Scalar>& x) const {
    check_width(x, "coupling forward");
    auto x1 = diff::slice_cols(x, 0, split_);
    auto x2 = diff::slice_cols(x, split_, dim_ - split_);
    auto s = clamped_scale(x1);
    auto y2 = diff::exp(s) * x2 + shift_net_.forward(x1);
    return {diff::concat_cols(x1, y2), diff::row_sum(s)};
  }

  Tensor<Scalar> inverse(const Tensor<Scalar>& y) const {
    check_width(y, "coupling inverse");
    auto y1 = diff::slice_cols(y, 0, split_);
    auto y2 = diff::slice_cols(y, split_, dim_ - split_);
    auto s = clamped_scale(y1);
    auto x2 = (y2 - shift_net_.forward(y1)) * diff::exp(diff::scale(s, Scalar(-1)));
    return diff::concat_cols(y1, x2);
  }

  /// Clamped scale output s(x1) for the pass-through half.
  Tensor<Scalar> clamped_scale(const Tensor<Scalar>& x1) const {
    auto raw = scale_net_.forward(x1);
    return diff::scale(diff::tanh(diff::scale(raw, Scalar(1) / clamp_)), clamp_);
  }

  Index dim() const { return dim_; }
  Index split_index() const { return split_; }
  Scalar scale_clamp() const { return clamp_; }
  diff::Mlp<Scalar>& scale_net() { return scale_net_; }
  diff::Mlp<Scalar>& shift_net() { return shift_net_; }
  const diff::Mlp<Scalar>& scale_net() const { return scale_net_; }
  const diff::Mlp<Scalar>& shift_net() const { return shift_net_; }

  std::vector<Tensor<Scalar>> parameters() const {
    auto p = scale_net_.parameters();
    auto q = shift_net_.parameters();
    p.insert(p.end(), q.begin(), q.end());
    return p;
  }

 private:
  void check_width(const Tensor<Scalar>& x, const char* what) const {
    if (x.cols() != dim_) {
      throw DimensionError(std::string(what) + ": width " + std::to_string(x.cols()) +
                           " != flow dimension " + std::to_string(dim_));
    }
  }

  Index dim_;
  Index split_;
  Scalar clamp_;
  diff::Mlp<Scalar> scale_net_;
  diff::Mlp<Scalar> shift_net_;
};

/// Fixed coordinate permutation; volume preserving, log-det 0.
class Permutation {
 public:
  explicit Permutation(std::vector<Index> perm) : perm_(std::move(perm)), inverse_(perm_.size()) {
    std::vector<bool> seen(perm_.size(), false);
    for (std::size_t j = 0; j < perm_.size(); ++j) {
      const Index p = perm_[j];
      if (p < 0 || p >= static_cast<Index>(perm_.size()) || seen[p]) {
        throw ContractError("invalid permutation");
      }
      seen[p] = true;
      inverse_[p] = static_cast<Index>(j);
    }
  }

  static Permutation reversal(Index dim) {
    std::vector<Index> p(dim);
    for (Index j = 0; j < dim; ++j) p[j] = dim - 1 - j;
    return Permutation(std::move(p));
  }

  template <typename Scalar>
  Tensor<Scalar> forward(const Tensor<Scalar>& x) const { return diff::permute_cols(x, perm_); }

  template <typename Scalar>
  Tensor<Scalar> inverse(const Tensor<Scalar>& y) const { return diff::permute_cols(y, inverse_); }

  Index dim() const { return static_cast<Index>(perm_.size()); }
  const std::vector<Index>& indices() const { return perm_; }

 private:
  std::vector<Index> perm_;
  std::vector<Index> inverse_;
};

}  // namespace macronet::flow
