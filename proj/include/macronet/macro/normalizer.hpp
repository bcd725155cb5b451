#pragma once

#include "macronet/core.hpp"

namespace macronet::macro {

/// Per-column affine standardisation x -> (x - mean) / scale.
struct Normalizer {
  RowVecD mean;
  RowVecD scale;

  static Normalizer identity(Index dim) {
    return {RowVecD::Zero(dim), RowVecD::Ones(dim)};
  }

  /// Column means and population standard deviations; columns whose spread
  /// is below min_scale keep scale = min_scale.
  static Normalizer fit(const MatD& data, double min_scale = 1e-6);
  /// Statistics of the stacked rows of two equally wide blocks.
  static Normalizer fit_pooled(const MatD& a, const MatD& b, double min_scale = 1e-6);

  Index dim() const { return mean.size(); }
  MatD apply(const MatD& x) const;
  MatD invert(const MatD& z) const;
};

}  // namespace macronet::macro
