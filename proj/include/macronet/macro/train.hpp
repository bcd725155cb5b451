#pragma once

#include "macronet/dataset.hpp"
#include "macronet/diff/adam.hpp"
#include "macronet/macro/model.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace macronet::macro {

struct TrainConfig {
  int epochs = 100;
  Index batch_size = 256;
  diff::AdamOptions adam;
  /// The learning rate follows a cosine schedule down to adam.learning_rate * final_lr_fraction.
  double final_lr_fraction = 0.05;
  /// Global gradient-norm clip; 0 disables clipping.
  double grad_clip = 0.0;
  std::uint64_t seed = 0;
  /// Refit input standardisation from the training data before the first epoch.
  bool fit_normalization = true;
};

struct EpochLosses {
  double prediction = 0.0;
  double distribution_u = 0.0;
  double distribution_v = 0.0;
  double total = 0.0;
};

struct TrainReport {
  std::vector<EpochLosses> epochs;
  /// Per-coordinate RMS gap between paired macrostates on clean training data.
  double sigma = 0.0;
  /// Losses on clean (noise-free) training data before the first update.
  EpochLosses initial;
  /// Same, after the last update.
  EpochLosses final;
};

/// Raised when training produces non-finite losses, gradients or parameters.
class TrainingDiverged : public NumericError {
 public:
  TrainingDiverged(const std::string& what, int epoch) : NumericError(what), epoch_(epoch) {}
  int epoch() const { return epoch_; }

 private:
  int epoch_;
};

/// Minimises L_P + gamma (L_Du + L_Dv) by minibatch Adam. Fresh Gaussian
/// input noise is drawn every epoch when the model's input_noise_sigma > 0.
/// Deterministic for a given (model init, data, config).
TrainReport train(MacroModel& model, const PairDataset& data, const TrainConfig& config,
                  const std::function<void(int, const EpochLosses&)>& on_epoch = {});

/// Loss terms on clean data, no tape, evaluated in chunks.
EpochLosses evaluate_losses(const MacroModel& model, const MatD& u_raw, const MatD& v_raw);

/// Per-coordinate RMS gap between paired macrostates.
double macro_rmse(const MacroModel& model, const MatD& u_raw, const MatD& v_raw);

/// Mean and covariance of the pooled u- and v-side macrostates.
MacroStatistics macro_statistics(const MacroModel& model, const MatD& u_raw, const MatD& v_raw);

}  // namespace macronet::macro
