#include "macronet/macro/train.hpp"

#include "macronet/macro/losses.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

namespace macronet::macro {

namespace {

constexpr Index kEvalChunk = 1024;

MatD gather_rows(const MatD& src, const std::vector<Index>& order, Index begin, Index end) {
  MatD out(end - begin, src.cols());
  for (Index i = begin; i < end; ++i) out.row(i - begin) = src.row(order[i]);
  return out;
}

void check_dataset(const MacroModel& model, const MatD& u, const MatD& v) {
  if (u.rows() != v.rows()) {
    throw ContractError("unpaired data: " + std::to_string(u.rows()) + " u records vs " +
                        std::to_string(v.rows()) + " v records");
  }
  if (u.cols() != model.dim(Side::U) || v.cols() != model.dim(Side::V)) {
    throw DimensionError("data widths (" + std::to_string(u.cols()) + ", " +
                         std::to_string(v.cols()) + ") do not match the model (" +
                         std::to_string(model.dim(Side::U)) + ", " +
                         std::to_string(model.dim(Side::V)) + ")");
  }
}

bool finite(const EpochLosses& l) {
  return std::isfinite(l.prediction) && std::isfinite(l.distribution_u) &&
         std::isfinite(l.distribution_v) && std::isfinite(l.total);
}

}  // namespace

EpochLosses evaluate_losses(const MacroModel& model, const MatD& u_raw, const MatD& v_raw) {
  check_dataset(model, u_raw, v_raw);
  if (u_raw.rows() == 0) throw ContractError("cannot evaluate losses on an empty dataset");
  diff::NoGradGuard guard;
  const MatD u = model.normalize(Side::U, u_raw);
  const MatD v = model.normalize(Side::V, v_raw);
  EpochLosses acc;
  for (Index begin = 0; begin < u.rows(); begin += kEvalChunk) {
    const Index count = std::min(kEvalChunk, u.rows() - begin);
    auto terms = compute_losses(model, Tensor<double>(u.middleRows(begin, count)),
                                Tensor<double>(v.middleRows(begin, count)));
    const double w = static_cast<double>(count);
    acc.prediction += w * terms.prediction.item();
    acc.distribution_u += w * terms.distribution_u.item();
    acc.distribution_v += w * terms.distribution_v.item();
  }
  const double n = static_cast<double>(u.rows());
  acc.prediction /= n;
  acc.distribution_u /= n;
  acc.distribution_v /= n;
  acc.total = acc.prediction + model.config().gamma * (acc.distribution_u + acc.distribution_v);
  return acc;
}

double macro_rmse(const MacroModel& model, const MatD& u_raw, const MatD& v_raw) {
  check_dataset(model, u_raw, v_raw);
  if (u_raw.rows() == 0) throw ContractError("cannot evaluate macro RMSE on an empty dataset");
  const MatD gap = model.encode(Side::U, u_raw) - model.encode(Side::V, v_raw);
  return std::sqrt(gap.squaredNorm() / static_cast<double>(gap.size()));
}

MacroStatistics macro_statistics(const MacroModel& model, const MatD& u_raw, const MatD& v_raw) {
  check_dataset(model, u_raw, v_raw);
  const Index m = model.macro_dim();
  if (u_raw.rows() == 0) return {RowVecD::Zero(m), MatD::Identity(m, m)};
  MatD pooled(2 * u_raw.rows(), m);
  pooled << model.encode(Side::U, u_raw), model.encode(Side::V, v_raw);
  MacroStatistics stats;
  stats.mean = pooled.colwise().mean();
  const MatD centered = pooled.rowwise() - stats.mean;
  stats.covariance = centered.transpose() * centered / static_cast<double>(pooled.rows());
  return stats;
}

TrainReport train(MacroModel& model, const PairDataset& data, const TrainConfig& config,
                  const std::function<void(int, const EpochLosses&)>& on_epoch) {
  data.validate();
  check_dataset(model, data.u, data.v);
  if (data.size() == 0) throw ContractError("cannot train on an empty dataset");
  if (config.epochs < 0) throw ContractError("epoch count must be nonnegative");
  if (config.batch_size < 1) throw ContractError("batch size must be positive");

  if (config.fit_normalization) {
    if (model.shares_network()) {
      auto pooled = Normalizer::fit_pooled(data.u, data.v);
      model.set_normalizers(pooled, pooled);
    } else {
      model.set_normalizers(Normalizer::fit(data.u), Normalizer::fit(data.v));
    }
  }

  TrainReport report;
  report.initial = evaluate_losses(model, data.u, data.v);

  const MatD u = model.normalize(Side::U, data.u);
  const MatD v = model.normalize(Side::V, data.v);
  const Index n = data.size();
  const double sigma = model.config().input_noise_sigma;

  diff::Adam<double> optimizer(model.parameters(), config.adam);
  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Index> order(n);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const double progress = config.epochs > 1 ? static_cast<double>(epoch) / (config.epochs - 1) : 0.0;
    const double floor = config.final_lr_fraction;
    const double lr_scale = floor + (1.0 - floor) * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
    optimizer.set_learning_rate(config.adam.learning_rate * lr_scale);

    std::iota(order.begin(), order.end(), Index{0});
    std::shuffle(order.begin(), order.end(), rng);
    MatD u_epoch = u;
    MatD v_epoch = v;
    if (sigma > 0) {
      for (Index i = 0; i < u_epoch.size(); ++i) u_epoch.data()[i] += sigma * normal(rng);
      for (Index i = 0; i < v_epoch.size(); ++i) v_epoch.data()[i] += sigma * normal(rng);
    }

    EpochLosses acc;
    for (Index begin = 0; begin < n; begin += config.batch_size) {
      const Index end = std::min(n, begin + config.batch_size);
      try {
        Tensor<double> ub(gather_rows(u_epoch, order, begin, end));
        Tensor<double> vb(gather_rows(v_epoch, order, begin, end));
        auto terms = compute_losses(model, ub, vb);
        optimizer.zero_grad();
        diff::backward(terms.total);
        if (config.grad_clip > 0) optimizer.clip_grad_norm(config.grad_clip);
        optimizer.step();
        const double w = static_cast<double>(end - begin);
        acc.prediction += w * terms.prediction.item();
        acc.distribution_u += w * terms.distribution_u.item();
        acc.distribution_v += w * terms.distribution_v.item();
      } catch (const NumericError& e) {
        model.mark_diverged(true);
        throw TrainingDiverged("training diverged in epoch " + std::to_string(epoch) +
                                   " at record offset " + std::to_string(begin) + ": " + e.what(),
                               epoch);
      }
    }
    acc.prediction /= static_cast<double>(n);
    acc.distribution_u /= static_cast<double>(n);
    acc.distribution_v /= static_cast<double>(n);
    acc.total = acc.prediction + model.config().gamma * (acc.distribution_u + acc.distribution_v);
    if (!finite(acc)) {
      model.mark_diverged(true);
      throw TrainingDiverged("non-finite epoch loss in epoch " + std::to_string(epoch), epoch);
    }
    report.epochs.push_back(acc);
    if (on_epoch) on_epoch(epoch, acc);
  }

  report.final = evaluate_losses(model, data.u, data.v);
  report.sigma = macro_rmse(model, data.u, data.v);
  model.set_macro_statistics(macro_statistics(model, data.u, data.v));
  model.mark_trained(config.epochs > 0);
  model.mark_diverged(false);
  return report;
}

}  // namespace macronet::macro
