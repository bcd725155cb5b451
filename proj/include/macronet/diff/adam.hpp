#pragma once

#include "macronet/diff/tensor.hpp"

#include <cmath>
#include <vector>

namespace macronet::diff {

struct AdamOptions {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Bias-corrected adaptive-moment optimizer over a fixed parameter list.
template <typename Scalar>
class Adam {
 public:
  Adam(std::vector<Tensor<Scalar>> params, AdamOptions options = {})
      : params_(std::move(params)), options_(options) {
    if (!(options_.learning_rate > 0)) throw ContractError("learning rate must be positive");
    if (!(options_.beta1 > 0 && options_.beta1 < 1 && options_.beta2 > 0 && options_.beta2 < 1)) {
      throw ContractError("Adam decay rates must lie in (0, 1)");
    }
    first_.reserve(params_.size());
    second_.reserve(params_.size());
    for (const auto& p : params_) {
      first_.push_back(Mat<Scalar>::Zero(p.rows(), p.cols()));
      second_.push_back(Mat<Scalar>::Zero(p.rows(), p.cols()));
    }
  }

  /// Applies one update from the current gradients. Parameters without a
  /// gradient are treated as having a zero gradient.
  void step() {
    for (const auto& p : params_) {
      if (p.has_grad() && !p.grad().allFinite()) {
        throw NumericError("non-finite gradient for parameter '" + p.name() + "'");
      }
    }
    ++step_;
    const Scalar b1 = static_cast<Scalar>(options_.beta1);
    const Scalar b2 = static_cast<Scalar>(options_.beta2);
    const Scalar lr = static_cast<Scalar>(options_.learning_rate);
    const Scalar eps = static_cast<Scalar>(options_.epsilon);
    const Scalar c1 = 1 - std::pow(b1, static_cast<Scalar>(step_));
    const Scalar c2 = 1 - std::pow(b2, static_cast<Scalar>(step_));
    for (std::size_t i = 0; i < params_.size(); ++i) {
      auto& p = params_[i];
      if (p.has_grad()) {
        first_[i] = b1 * first_[i] + (1 - b1) * p.grad();
        second_[i] = b2 * second_[i] + (1 - b2) * p.grad().cwiseAbs2();
      } else {
        first_[i] *= b1;
        second_[i] *= b2;
      }
      auto m_hat = first_[i].array() / c1;
      auto v_hat = second_[i].array() / c2;
      p.mutable_value().array() -= lr * m_hat / (v_hat.sqrt() + eps);
      if (!p.value().allFinite()) {
        throw NumericError("parameter '" + p.name() + "' became non-finite after update");
      }
    }
  }

  void zero_grad() {
    for (auto& p : params_) p.zero_grad();
  }

  /// Rescales all gradients so their joint L2 norm is at most max_norm.
  /// Returns the norm before clipping.
  Scalar clip_grad_norm(Scalar max_norm) {
    Scalar sq = 0;
    for (const auto& p : params_) {
      if (p.has_grad()) sq += p.grad().squaredNorm();
    }
    const Scalar norm = std::sqrt(sq);
    if (max_norm > 0 && norm > max_norm) {
      const Scalar f = max_norm / norm;
      for (auto& p : params_) {
        if (p.has_grad()) p.mutable_grad() *= f;
      }
    }
    return norm;
  }

  void set_learning_rate(double lr) {
    if (!(lr > 0)) throw ContractError("learning rate must be positive");
    options_.learning_rate = lr;
  }

  long step_count() const { return step_; }
  const AdamOptions& options() const { return options_; }
  const std::vector<Tensor<Scalar>>& parameters() const { return params_; }
  const Mat<Scalar>& first_moment(std::size_t i) const { return first_.at(i); }
  const Mat<Scalar>& second_moment(std::size_t i) const { return second_.at(i); }

 private:
  std::vector<Tensor<Scalar>> params_;
  AdamOptions options_;
  std::vector<Mat<Scalar>> first_;
  std::vector<Mat<Scalar>> second_;
  long step_ = 0;
};

}  // namespace macronet::diff
