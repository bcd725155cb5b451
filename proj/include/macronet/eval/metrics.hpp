#pragma once

#include "macronet/macro/model.hpp"
#include "macronet/sim/linear.hpp"

#include <cstdint>
#include <span>
#include <string>

namespace macronet::eval {

/// Spearman rank correlation with average ranks for ties.
/// Requires equal lengths >= 3.
double spearman(std::span<const double> xs, std::span<const double> ys);

/// Average ranks (1-based) with ties sharing the mean of their positions.
std::vector<double> average_ranks(std::span<const double> xs);

/// Sign of sum_t x_t cross x_{t+1}: +1 anti-clockwise, -1 clockwise,
/// 0 when the magnitude is below 1e-9. Requires at least 3 points.
int rotation_sign(const sim::Trajectory& traj);

enum class Comparison { AtLeast, AtMost, GreaterThan, LessThan };

std::string to_string(Comparison c);
Comparison parse_comparison(const std::string& s);

/// One scored metric. `pass` is always the outcome of comparing value with
/// threshold under `comparison`.
struct EvalReport {
  std::string testbed;
  std::string metric;
  double value = 0.0;
  double threshold = 0.0;
  Comparison comparison = Comparison::AtLeast;
  bool pass = false;
  Index samples = 0;
  std::uint64_t seed = 0;
};

bool meets(double value, double threshold, Comparison comparison);

EvalReport make_report(std::string testbed, std::string metric, double value, double threshold,
                       Comparison comparison, Index samples, std::uint64_t seed);

/// Euclidean distance after whitening by a macro covariance.
class MacroWhitener {
 public:
  explicit MacroWhitener(const macro::MacroStatistics& stats);

  Index dim() const { return chol_.rows(); }
  /// Rows mapped to L^{-1} x with covariance = L L^T.
  MatD whiten(const MatD& macros) const;
  double distance(const RowVecD& a, const RowVecD& b) const;

 private:
  Eigen::MatrixXd chol_;
};

double whitened_distance(const macro::MacroStatistics& stats, const RowVecD& a, const RowVecD& b);

/// Empirical quantile with linear interpolation, q in [0, 1].
double quantile(std::vector<double> values, double q);

}  // namespace macronet::eval
