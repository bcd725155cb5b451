#pragma once

#include "macronet/flow/network.hpp"
#include "macronet/macro/normalizer.hpp"

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace macronet::macro {

using Flow = flow::FlowNetwork<double>;
using diff::Tensor;

enum class Side { U, V };

std::string to_string(Side side);
/// "U"/"u" or "V"/"v"; throws ContractError otherwise.
Side parse_side(const std::string& name);

struct MacroConfig {
  Index dim_u = 2;
  Index dim_v = 2;
  Index macro_dim = 1;
  bool shared_weights = false;
  double gamma = 0.1;
  double input_noise_sigma = 0.05;
  flow::FlowOptions flow_u;
  flow::FlowOptions flow_v;

  /// Throws ContractError on inconsistent settings.
  void validate() const;
};

/// A macrostate vector: the retained m coordinates of a flow output.
struct Macrostate {
  RowVecD values;

  Index size() const { return values.size(); }
};

/// Summary of the macrostates a trained model assigns to its training data.
struct MacroStatistics {
  RowVecD mean;
  MatD covariance;

  RowVecD std_dev() const { return covariance.diagonal().cwiseSqrt().transpose(); }
};

/// Pair of invertible networks (phi_u, phi_v) with a shared macro width m.
/// With shared_weights both sides point at one network and one normaliser.
class MacroModel {
 public:
  MacroModel(const MacroConfig& config, std::uint64_t seed);

  const MacroConfig& config() const { return config_; }
  Index macro_dim() const { return config_.macro_dim; }
  Index dim(Side side) const { return side == Side::U ? config_.dim_u : config_.dim_v; }

  const Flow& flow(Side side) const { return side == Side::U ? *phi_u_ : *phi_v_; }
  Flow& flow(Side side) { return side == Side::U ? *phi_u_ : *phi_v_; }
  bool shares_network() const { return phi_u_ == phi_v_; }

  const Normalizer& normalizer(Side side) const { return side == Side::U ? norm_u_ : norm_v_; }
  void set_normalizers(Normalizer u, Normalizer v);

  /// Distinct trainable tensors (one copy when weights are shared).
  std::vector<Tensor<double>> parameters() const;

  MatD normalize(Side side, const MatD& raw) const;
  MatD denormalize(Side side, const MatD& normalized) const;

  /// Full flow output phi_side(normalised x), one row per record.
  MatD transform(Side side, const MatD& raw) const;

  /// Macrostates (first m flow outputs) of raw microstates, one row per record.
  MatD encode(Side side, const MatD& raw) const;
  Macrostate encode_one(Side side, const RowVecD& raw) const;

  bool trained() const { return trained_; }
  bool diverged() const { return diverged_; }
  void mark_trained(bool trained) { trained_ = trained; }
  void mark_diverged(bool diverged) { diverged_ = diverged; }

  const MacroStatistics& macro_statistics() const { return macro_stats_; }
  void set_macro_statistics(MacroStatistics stats) { macro_stats_ = std::move(stats); }

 private:
  void check_width(Side side, Index cols) const;

  MacroConfig config_;
  std::shared_ptr<Flow> phi_u_;
  std::shared_ptr<Flow> phi_v_;
  Normalizer norm_u_;
  Normalizer norm_v_;
  MacroStatistics macro_stats_;
  bool trained_ = false;
  bool diverged_ = false;
};

}  // namespace macronet::macro
