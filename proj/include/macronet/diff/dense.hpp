#pragma once

#include "macronet/diff/ops.hpp"

#include <cmath>
#include <random>
#include <string>
#include <vector>

namespace macronet::diff {

enum class Activation { Identity, Tanh, LeakyRelu };

inline const char* to_string(Activation a) {
  switch (a) {
    case Activation::Identity: return "identity";
    case Activation::Tanh: return "tanh";
    case Activation::LeakyRelu: return "leaky_relu";
  }
  return "unknown";
}

template <typename Scalar>
Tensor<Scalar> activate(const Tensor<Scalar>& x, Activation a) {
  switch (a) {
    case Activation::Identity: return x;
    case Activation::Tanh: return diff::tanh(x);
    case Activation::LeakyRelu: return leaky_relu(x);
  }
  return x;
}

/// Fully connected layer: activation(x * W^T + b).
template <typename Scalar>
class DenseLayer {
 public:
  DenseLayer(Index in, Index out, Activation activation, const std::string& name = "dense")
      : weight_(Mat<Scalar>::Zero(out, in), true, name + ".weight"),
        bias_(Mat<Scalar>::Zero(1, out), true, name + ".bias"),
        activation_(activation) {
    if (out <= 0 || in < 0) {
      throw DimensionError("dense layer needs positive output width, got " +
                           shape_string(out, in));
    }
  }

  /// Weights and bias ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
  template <typename Rng>
  void init_uniform(Rng& rng) {
    const Scalar bound = in_features() > 0 ? Scalar(1) / std::sqrt(Scalar(in_features())) : Scalar(0);
    std::uniform_real_distribution<Scalar> dist(-bound, bound);
    for (Index i = 0; i < weight_.value().size(); ++i) weight_.mutable_value().data()[i] = dist(rng);
    for (Index i = 0; i < bias_.value().size(); ++i) bias_.mutable_value().data()[i] = dist(rng);
  }

  void init_zero() {
    weight_.mutable_value().setZero();
    bias_.mutable_value().setZero();
  }

  Tensor<Scalar> forward(const Tensor<Scalar>& x) const {
    return activate(affine(x, weight_, bias_), activation_);
  }

  Index in_features() const { return weight_.cols(); }
  Index out_features() const { return weight_.rows(); }
  Activation activation() const { return activation_; }

  Tensor<Scalar>& weight() { return weight_; }
  Tensor<Scalar>& bias() { return bias_; }
  const Tensor<Scalar>& weight() const { return weight_; }
  const Tensor<Scalar>& bias() const { return bias_; }

  std::vector<Tensor<Scalar>> parameters() const { return {weight_, bias_}; }

 private:
  Tensor<Scalar> weight_;
  Tensor<Scalar> bias_;
  Activation activation_;
};

/// Stack of dense layers; hidden layers share one activation, the output
/// layer is linear.
template <typename Scalar>
class Mlp {
 public:
  Mlp(Index in, const std::vector<Index>& hidden, Index out, Activation hidden_activation,
      const std::string& name = "mlp") {
    Index width = in;
    for (std::size_t i = 0; i < hidden.size(); ++i) {
      layers_.emplace_back(width, hidden[i], hidden_activation, name + "." + std::to_string(i));
      width = hidden[i];
    }
    layers_.emplace_back(width, out, Activation::Identity,
                         name + "." + std::to_string(hidden.size()));
  }

  /// Uniform fan-in init everywhere; the output layer is zeroed when
  /// zero_output is set.
  template <typename Rng>
  void init(Rng& rng, bool zero_output) {
    for (auto& layer : layers_) layer.init_uniform(rng);
    if (zero_output) layers_.back().init_zero();
  }

  Tensor<Scalar> forward(const Tensor<Scalar>& x) const {
    Tensor<Scalar> h = x;
    for (const auto& layer : layers_) h = layer.forward(h);
    return h;
  }

  std::vector<Tensor<Scalar>> parameters() const {
    std::vector<Tensor<Scalar>> out;
    for (const auto& layer : layers_) {
      auto p = layer.parameters();
      out.insert(out.end(), p.begin(), p.end());
    }
    return out;
  }

  std::vector<DenseLayer<Scalar>>& layers() { return layers_; }
  const std::vector<DenseLayer<Scalar>>& layers() const { return layers_; }

 private:
  std::vector<DenseLayer<Scalar>> layers_;
};

}  // namespace macronet::diff
