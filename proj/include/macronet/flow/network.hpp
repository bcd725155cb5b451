#pragma once

#include "macronet/flow/coupling.hpp"

#include <cstdint>
#include <random>
#include <variant>

namespace macronet::flow {

struct FlowOptions {
  Index depth = 8;
  std::vector<Index> hidden = {64, 64};
  double scale_clamp = 3.0;
  /// Zero the last layer of every sub-network so the flow starts as a permutation.
  bool identity_init = true;
};

/// Invertible network: coupling layers with fixed reversals between them.
template <typename Scalar>
class FlowNetwork {
 public:
  using Step = std::variant<CouplingLayer<Scalar>, Permutation>;

  /// Empty network of the given width; steps are appended explicitly.
  explicit FlowNetwork(Index dim) : dim_(dim) {
    if (dim < 1) throw DimensionError("flow dimension must be positive");
  }

  FlowNetwork(Index dim, const FlowOptions& options, std::uint64_t seed) : FlowNetwork(dim) {
    std::mt19937_64 rng(seed);
    for (Index i = 0; i < options.depth; ++i) {
      if (i > 0) add_permutation(Permutation::reversal(dim));
      CouplingLayer<Scalar> layer(dim, options.hidden, static_cast<Scalar>(options.scale_clamp),
                                  "coupling" + std::to_string(i));
      layer.init(rng, options.identity_init);
      add_coupling(std::move(layer));
    }
  }

  void add_coupling(CouplingLayer<Scalar> layer) {
    if (layer.dim() != dim_) throw DimensionError("coupling layer width differs from flow width");
    steps_.emplace_back(std::move(layer));
  }

  void add_permutation(Permutation perm) {
    if (perm.dim() != dim_) throw DimensionError("permutation width differs from flow width");
    steps_.emplace_back(std::move(perm));
  }

  /// y = phi(x) and per-record log|det dphi/dx| as [batch x 1].
  std::pair<Tensor<Scalar>, Tensor<Scalar>> forward(const Tensor<Scalar>& x) const {
    check_width(x, "flow forward");
    Tensor<Scalar> h = x;
    Tensor<Scalar> log_det(Mat<Scalar>::Zero(x.rows(), 1));
    bool have_log_det = false;
    for (const auto& step : steps_) {
      if (const auto* c = std::get_if<CouplingLayer<Scalar>>(&step)) {
        auto [y, ld] = c->forward(h);
        h = y;
        log_det = have_log_det ? diff::add(log_det, ld) : ld;
        have_log_det = true;
      } else {
        h = std::get<Permutation>(step).template forward<Scalar>(h);
      }
    }
    return {h, log_det};
  }

  Tensor<Scalar> inverse(const Tensor<Scalar>& y) const {
    check_width(y, "flow inverse");
    Tensor<Scalar> h = y;
    for (auto it = steps_.rbegin(); it != steps_.rend(); ++it) {
      if (const auto* c = std::get_if<CouplingLayer<Scalar>>(&*it)) {
        h = c->inverse(h);
      } else {
        h = std::get<Permutation>(*it).template inverse<Scalar>(h);
      }
    }
    return h;
  }

  /// All trainable tensors in a fixed order (used by optimizers and checkpoints).
  std::vector<Tensor<Scalar>> parameters() const {
    std::vector<Tensor<Scalar>> out;
    for (const auto& step : steps_) {
      if (const auto* c = std::get_if<CouplingLayer<Scalar>>(&step)) {
        auto p = c->parameters();
        out.insert(out.end(), p.begin(), p.end());
      }
    }
    return out;
  }

  Index dim() const { return dim_; }
  const std::vector<Step>& steps() const { return steps_; }
  std::vector<Step>& steps() { return steps_; }

 private:
  void check_width(const Tensor<Scalar>& x, const char* what) const {
    if (x.cols() != dim_) {
      throw DimensionError(std::string(what) + ": width " + std::to_string(x.cols()) +
                           " != flow dimension " + std::to_string(dim_));
    }
  }

  Index dim_;
  std::vector<Step> steps_;
};

template <typename Scalar>
std::pair<Tensor<Scalar>, Tensor<Scalar>> flow_forward(const FlowNetwork<Scalar>& net,
                                                       const Tensor<Scalar>& x) {
  return net.forward(x);
}

template <typename Scalar>
Tensor<Scalar> flow_inverse(const FlowNetwork<Scalar>& net, const Tensor<Scalar>& y) {
  return net.inverse(y);
}

/// Splits flow output into the retained macro coordinates (first m) and
/// the abandoned residual.
template <typename Scalar>
std::pair<Tensor<Scalar>, Tensor<Scalar>> split_macro(const Tensor<Scalar>& y, Index m) {
  if (m <= 0 || m > y.cols()) {
    throw ContractError("macro dimension " + std::to_string(m) + " outside (0, " +
                        std::to_string(y.cols()) + "]");
  }
  return {diff::slice_cols(y, 0, m), diff::slice_cols(y, m, y.cols() - m)};
}

}  // namespace macronet::flow
