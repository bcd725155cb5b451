#include "macronet/macro/losses.hpp"

#include "macronet/macro/train.hpp"

#include <cmath>
#include <numbers>

namespace macronet::macro {

Tensor<double> prediction_loss(const Tensor<double>& macro_u, const Tensor<double>& macro_v) {
  if (macro_u.rows() != macro_v.rows()) {
    throw ContractError("prediction loss on unpaired batches (" + std::to_string(macro_u.rows()) +
                        " vs " + std::to_string(macro_v.rows()) + " records)");
  }
  if (macro_u.rows() == 0) throw ContractError("prediction loss on an empty batch");
  auto gap = diff::sub(macro_u, macro_v);
  return diff::scale(diff::sum(diff::square(gap)), 1.0 / static_cast<double>(macro_u.rows()));
}

Tensor<double> gaussian_nll(const Tensor<double>& y, const Tensor<double>& log_det) {
  if (log_det.rows() != y.rows() || log_det.cols() != 1) {
    throw DimensionError("log_det must be [batch x 1] matching the outputs");
  }
  if (y.rows() == 0) throw ContractError("distribution loss on an empty batch");
  if (!log_det.value().allFinite()) throw NumericError("non-finite log-determinant");
  const double batch = static_cast<double>(y.rows());
  const double log_norm = 0.5 * static_cast<double>(y.cols()) * std::log(2.0 * std::numbers::pi);
  auto quad = diff::scale(diff::sum(diff::square(y)), 0.5 / batch);
  auto jac = diff::scale(diff::sum(log_det), 1.0 / batch);
  return diff::add_constant(diff::sub(quad, jac), log_norm);
}

LossTerms compute_losses(const MacroModel& model, const Tensor<double>& u, const Tensor<double>& v) {
  if (u.rows() != v.rows()) {
    throw ContractError("unpaired batches: " + std::to_string(u.rows()) + " u records vs " +
                        std::to_string(v.rows()) + " v records");
  }
  const Index m = model.macro_dim();
  auto [yu, ldu] = model.flow(Side::U).forward(u);
  auto [yv, ldv] = model.flow(Side::V).forward(v);
  LossTerms t;
  t.prediction = prediction_loss(diff::slice_cols(yu, 0, m), diff::slice_cols(yv, 0, m));
  t.distribution_u = gaussian_nll(yu, ldu);
  t.distribution_v = gaussian_nll(yv, ldv);
  t.total = diff::add(t.prediction,
                      diff::scale(diff::add(t.distribution_u, t.distribution_v), model.config().gamma));
  return t;
}

double prediction_loss(const MacroModel& model, const MatD& u_raw, const MatD& v_raw) {
  return evaluate_losses(model, u_raw, v_raw).prediction;
}

double distribution_loss(const MacroModel& model, const MatD& u_raw, const MatD& v_raw) {
  const auto l = evaluate_losses(model, u_raw, v_raw);
  return l.distribution_u + l.distribution_v;
}

}  // namespace macronet::macro
