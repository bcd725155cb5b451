#pragma once

#include "macronet/dataset.hpp"
#include "macronet/eval/metrics.hpp"
#include "macronet/macro/model.hpp"
#include "macronet/sim/testbed.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace macronet::eval {

/// Whitened macro distances between paired records phi_u(u_i) and phi_v(v_i).
std::vector<double> true_pair_distances(const macro::MacroModel& model, const PairDataset& data);

struct DesignConsistency {
  /// 95th percentile of true-pair distances.
  double threshold = 0.0;
  /// Share of regenerated records whose distance to their target is below threshold.
  double pass_fraction = 0.0;
  /// Same share for random reference records (null model).
  double baseline_pass_fraction = 0.0;
  double median_distance = 0.0;
  double baseline_median = 0.0;
  /// baseline_median / median_distance.
  double separation = 0.0;
  std::vector<double> distances;
  Index samples = 0;
};

/// For each V-side example: encode, sample U from the target macrostate,
/// re-simulate, re-encode, and compare against the target. The baseline
/// compares each target against randomly drawn reference V records.
DesignConsistency design_consistency(const macro::MacroModel& model,
                                     const sim::DatasetOptions& options,
                                     const PairDataset& reference, const MatD& examples,
                                     Index n_samples, std::uint64_t seed);

struct RotationAgreement {
  int target_sign = 0;
  /// Share of sampled U records whose re-simulated trajectory rotates like the example.
  double resimulated = 0.0;
  /// Share of directly sampled V trajectories rotating like the example.
  double direct = 0.0;
  Index samples = 0;
};

RotationAgreement rotation_agreement(const macro::MacroModel& model,
                                     const sim::DatasetOptions& options, const RowVecD& example,
                                     Index n_samples, std::uint64_t seed);

struct SensitivityRow {
  Index parameter = 0;
  std::string name;
  double between = 0.0;
  double within = 0.0;
  double ratio = 0.0;
};

/// Between-target variance of per-target means over mean within-target
/// variance, per U coordinate, sorted by descending ratio.
std::vector<SensitivityRow> parameter_sensitivity(const macro::MacroModel& model,
                                                  const std::vector<macro::Macrostate>& targets,
                                                  Index n_samples, std::uint64_t seed,
                                                  const std::vector<std::string>& names = {});

/// Rank of parameter `index` in a sensitivity table (0 = most sensitive).
Index sensitivity_rank(const std::vector<SensitivityRow>& table, Index index);

struct Informativeness {
  double paired = 0.0;
  double shuffled = 0.0;
};

/// Prediction loss on the given pairs and on a derangement of them.
Informativeness macro_informativeness(const macro::MacroModel& model, const PairDataset& data,
                                      std::uint64_t seed);

/// Spearman correlation between the U-side macro (first coordinate) and energy.
double energy_monotonicity(const macro::MacroModel& model, const PairDataset& data);

/// std(r) / mean(r) of the radii |x| of 2-d points about the origin.
double circle_residual(const MatD& points);

/// Macrostates whose first coordinate sits at the given quantiles of the
/// macros of x; remaining coordinates take their median.
std::vector<macro::Macrostate> quantile_targets(const macro::MacroModel& model, macro::Side side, const MatD& x,
                                                const std::vector<double>& quantiles);

/// Rows of flattened Gray-Scott records (a then b) whose b field has
/// spatial variance above min_variance.
std::vector<Index> patterned_records(const MatD& v, double min_variance = 1e-4);

/// Records spread across the V-side macro range: the rows closest to the
/// given quantiles of the first macro coordinate.
std::vector<Index> pick_quantile_examples(const macro::MacroModel& model, const MatD& v,
                                          const std::vector<double>& quantiles);

}  // namespace macronet::eval
