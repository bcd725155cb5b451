#include "macronet/macro/model.hpp"

#include <algorithm>
#include <random>

namespace macronet::macro {

std::string to_string(Side side) { return side == Side::U ? "U" : "V"; }

Side parse_side(const std::string& name) {
  if (name == "U" || name == "u") return Side::U;
  if (name == "V" || name == "v") return Side::V;
  throw ContractError("side must be U or V, got '" + name + "'");
}

void MacroConfig::validate() const {
  if (dim_u < 2 || dim_v < 2) throw ContractError("microstate widths must be at least 2");
  if (macro_dim < 1 || macro_dim > std::min(dim_u, dim_v)) {
    throw ContractError("macro dimension " + std::to_string(macro_dim) +
                        " must lie in [1, min(d_u, d_v)]");
  }
  if (shared_weights && dim_u != dim_v) {
    throw ContractError("shared weights require d_u == d_v");
  }
  if (!(gamma >= 0)) throw ContractError("gamma must be nonnegative");
  if (!(input_noise_sigma >= 0)) throw ContractError("input noise sigma must be nonnegative");
  if (flow_u.depth < 1 || flow_v.depth < 1) throw ContractError("flow depth must be >= 1");
}

MacroModel::MacroModel(const MacroConfig& config, std::uint64_t seed) : config_(config) {
  config_.validate();
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  std::mt19937_64 rng(seq);
  const std::uint64_t seed_u = rng();
  const std::uint64_t seed_v = rng();
  phi_u_ = std::make_shared<Flow>(config_.dim_u, config_.flow_u, seed_u);
  phi_v_ = config_.shared_weights ? phi_u_
                                  : std::make_shared<Flow>(config_.dim_v, config_.flow_v, seed_v);
  norm_u_ = Normalizer::identity(config_.dim_u);
  norm_v_ = Normalizer::identity(config_.dim_v);
  macro_stats_ = {RowVecD::Zero(config_.macro_dim),
                  MatD::Identity(config_.macro_dim, config_.macro_dim)};
}

void MacroModel::set_normalizers(Normalizer u, Normalizer v) {
  if (u.dim() != config_.dim_u || v.dim() != config_.dim_v) {
    throw DimensionError("normaliser widths do not match the model");
  }
  if (shares_network() && (u.mean != v.mean || u.scale != v.scale)) {
    throw ContractError("a weight-shared model needs identical normalisers on both sides");
  }
  norm_u_ = std::move(u);
  norm_v_ = std::move(v);
}

std::vector<Tensor<double>> MacroModel::parameters() const {
  auto params = phi_u_->parameters();
  if (!shares_network()) {
    auto more = phi_v_->parameters();
    params.insert(params.end(), more.begin(), more.end());
  }
  return params;
}

void MacroModel::check_width(Side side, Index cols) const {
  if (cols != dim(side)) {
    throw DimensionError("side " + to_string(side) + " expects width " +
                         std::to_string(dim(side)) + ", got " + std::to_string(cols));
  }
}

MatD MacroModel::normalize(Side side, const MatD& raw) const {
  check_width(side, raw.cols());
  return normalizer(side).apply(raw);
}

MatD MacroModel::denormalize(Side side, const MatD& normalized) const {
  check_width(side, normalized.cols());
  return normalizer(side).invert(normalized);
}

MatD MacroModel::transform(Side side, const MatD& raw) const {
  diff::NoGradGuard guard;
  return flow(side).forward(Tensor<double>(normalize(side, raw))).first.value();
}

MatD MacroModel::encode(Side side, const MatD& raw) const {
  return transform(side, raw).leftCols(config_.macro_dim);
}

Macrostate MacroModel::encode_one(Side side, const RowVecD& raw) const {
  return {encode(side, MatD(raw)).row(0)};
}

}  // namespace macronet::macro
