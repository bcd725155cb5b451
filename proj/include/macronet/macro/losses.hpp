#pragma once

#include "macronet/macro/model.hpp"

namespace macronet::macro {

/// Batch mean of squared Euclidean distance between paired macrostates.
Tensor<double> prediction_loss(const Tensor<double>& macro_u, const Tensor<double>& macro_v);

/// Change-of-variables negative log-likelihood under a standard normal base,
/// averaged over the batch:  1/2 |y|^2 + d/2 log(2 pi) - log|det J|.
Tensor<double> gaussian_nll(const Tensor<double>& y, const Tensor<double>& log_det);

/// The four terms of the training objective for one paired batch.
struct LossTerms {
  Tensor<double> prediction;
  Tensor<double> distribution_u;
  Tensor<double> distribution_v;
  Tensor<double> total;
};

/// Losses for already-normalised batches. Throws ContractError when the
/// batches are not paired and DimensionError on width mismatches.
LossTerms compute_losses(const MacroModel& model, const Tensor<double>& u, const Tensor<double>& v);

/// Model-level prediction loss on raw microstates.
double prediction_loss(const MacroModel& model, const MatD& u_raw, const MatD& v_raw);

/// Model-level distribution loss on raw microstates, summed over both sides.
double distribution_loss(const MacroModel& model, const MatD& u_raw, const MatD& v_raw);

}  // namespace macronet::macro
