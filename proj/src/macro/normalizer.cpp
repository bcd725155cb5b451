#include "macronet/macro/normalizer.hpp"

namespace macronet::macro {

Normalizer Normalizer::fit(const MatD& data, double min_scale) {
  if (data.rows() == 0) return identity(data.cols());
  Normalizer n;
  n.mean = data.colwise().mean();
  const MatD centered = data.rowwise() - n.mean;
  n.scale = (centered.colwise().squaredNorm() / static_cast<double>(data.rows())).cwiseSqrt();
  n.scale = n.scale.cwiseMax(min_scale);
  return n;
}

Normalizer Normalizer::fit_pooled(const MatD& a, const MatD& b, double min_scale) {
  if (a.cols() != b.cols()) throw DimensionError("pooled normalisation needs equal widths");
  MatD stacked(a.rows() + b.rows(), a.cols());
  stacked << a, b;
  return fit(stacked, min_scale);
}

MatD Normalizer::apply(const MatD& x) const {
  if (x.cols() != dim()) {
    throw DimensionError("normaliser of width " + std::to_string(dim()) + " applied to width " +
                         std::to_string(x.cols()));
  }
  return ((x.rowwise() - mean).array().rowwise() / scale.array()).matrix();
}

MatD Normalizer::invert(const MatD& z) const {
  if (z.cols() != dim()) {
    throw DimensionError("normaliser of width " + std::to_string(dim()) + " inverted on width " +
                         std::to_string(z.cols()));
  }
  return ((z.array().rowwise() * scale.array()).matrix().rowwise() + mean);
}

}  // namespace macronet::macro
