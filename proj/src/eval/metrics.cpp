#include "macronet/eval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace macronet::eval {

std::vector<double> average_ranks(std::span<const double> xs) {
  const std::size_t n = xs.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && xs[order[j + 1]] == xs[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

double spearman(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) {
    throw DimensionError("spearman needs equal lengths, got " + std::to_string(xs.size()) + " and " +
                         std::to_string(ys.size()));
  }
  if (xs.size() < 3) throw ContractError("spearman needs at least 3 points");
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!std::isfinite(xs[i]) || !std::isfinite(ys[i])) throw NumericError("spearman input is not finite");
  }
  const auto rx = average_ranks(xs);
  const auto ry = average_ranks(ys);
  const double n = static_cast<double>(xs.size());
  const double mean = (n + 1.0) / 2.0;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    const double a = rx[i] - mean;
    const double b = ry[i] - mean;
    sxy += a * b;
    sxx += a * a;
    syy += b * b;
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

int rotation_sign(const sim::Trajectory& traj) {
  if (traj.rows() < 3) throw ContractError("rotation_sign needs at least 3 points");
  double sum = 0.0;
  for (Index t = 0; t + 1 < traj.rows(); ++t) {
    sum += traj(t, 0) * traj(t + 1, 1) - traj(t, 1) * traj(t + 1, 0);
  }
  if (!std::isfinite(sum)) throw NumericError("trajectory is not finite");
  if (std::abs(sum) < 1e-9) return 0;
  return sum > 0 ? 1 : -1;
}

std::string to_string(Comparison c) {
  switch (c) {
    case Comparison::AtLeast: return ">=";
    case Comparison::AtMost: return "<=";
    case Comparison::GreaterThan: return ">";
    case Comparison::LessThan: return "<";
  }
  return "?";
}

Comparison parse_comparison(const std::string& s) {
  if (s == ">=") return Comparison::AtLeast;
  if (s == "<=") return Comparison::AtMost;
  if (s == ">") return Comparison::GreaterThan;
  if (s == "<") return Comparison::LessThan;
  throw ContractError("unknown comparison '" + s + "'");
}

bool meets(double value, double threshold, Comparison comparison) {
  switch (comparison) {
    case Comparison::AtLeast: return value >= threshold;
    case Comparison::AtMost: return value <= threshold;
    case Comparison::GreaterThan: return value > threshold;
    case Comparison::LessThan: return value < threshold;
  }
  return false;
}

EvalReport make_report(std::string testbed, std::string metric, double value, double threshold,
                       Comparison comparison, Index samples, std::uint64_t seed) {
  EvalReport r;
  r.testbed = std::move(testbed);
  r.metric = std::move(metric);
  r.value = value;
  r.threshold = threshold;
  r.comparison = comparison;
  r.pass = meets(value, threshold, comparison);
  r.samples = samples;
  r.seed = seed;
  return r;
}

MacroWhitener::MacroWhitener(const macro::MacroStatistics& stats) {
  const Index m = stats.covariance.rows();
  if (m == 0 || stats.covariance.cols() != m) throw DimensionError("macro covariance must be square and nonempty");
  const double ridge = 1e-12 * std::max(1.0, stats.covariance.diagonal().cwiseAbs().maxCoeff());
  Eigen::LLT<Eigen::MatrixXd> llt(stats.covariance + ridge * Eigen::MatrixXd::Identity(m, m));
  if (llt.info() != Eigen::Success) throw NumericError("macro covariance is not positive definite");
  chol_ = llt.matrixL();
}

MatD MacroWhitener::whiten(const MatD& macros) const {
  if (macros.cols() != dim()) throw DimensionError("macro width does not match the covariance");
  Eigen::MatrixXd t = macros.transpose();
  chol_.triangularView<Eigen::Lower>().solveInPlace(t);
  return t.transpose();
}

double MacroWhitener::distance(const RowVecD& a, const RowVecD& b) const {
  if (a.size() != dim() || b.size() != dim()) throw DimensionError("macro width does not match the covariance");
  Eigen::VectorXd diff = (a - b).transpose();
  chol_.triangularView<Eigen::Lower>().solveInPlace(diff);
  return diff.norm();
}

double whitened_distance(const macro::MacroStatistics& stats, const RowVecD& a, const RowVecD& b) {
  return MacroWhitener(stats).distance(a, b);
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw ContractError("quantile of an empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw ContractError("quantile level must lie in [0, 1]");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

}  // namespace macronet::eval
