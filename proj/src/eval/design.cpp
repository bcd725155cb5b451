#include "macronet/eval/design.hpp"

#include "macronet/macro/losses.hpp"
#include "macronet/macro/sampling.hpp"
#include "macronet/sim/linear.hpp"
#include "macronet/sim/sho.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace macronet::eval {

namespace {

std::uint64_t derive(std::uint64_t seed, std::uint32_t tag, std::uint64_t a = 0, std::uint64_t b = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), tag,
                    static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b)};
  std::array<std::uint32_t, 2> out{};
  seq.generate(out.begin(), out.end());
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

double median(std::vector<double> xs) { return quantile(std::move(xs), 0.5); }

double fraction_below(const std::vector<double>& xs, double threshold) {
  if (xs.empty()) return 0.0;
  const auto n = std::count_if(xs.begin(), xs.end(), [&](double x) { return x < threshold; });
  return static_cast<double>(n) / static_cast<double>(xs.size());
}

}  // namespace

std::vector<double> true_pair_distances(const macro::MacroModel& model, const PairDataset& data) {
  data.validate();
  const MacroWhitener whitener(model.macro_statistics());
  const MatD a = whitener.whiten(model.encode(macro::Side::U, data.u));
  const MatD b = whitener.whiten(model.encode(macro::Side::V, data.v));
  std::vector<double> out(static_cast<std::size_t>(data.size()));
  for (Index i = 0; i < data.size(); ++i) out[i] = (a.row(i) - b.row(i)).norm();
  return out;
}

DesignConsistency design_consistency(const macro::MacroModel& model,
                                     const sim::DatasetOptions& options,
                                     const PairDataset& reference, const MatD& examples,
                                     Index n_samples, std::uint64_t seed) {
  if (reference.size() < 2) throw ContractError("design consistency needs at least 2 reference pairs");
  if (examples.rows() == 0) throw ContractError("design consistency needs at least one example");
  if (n_samples < 1) throw ContractError("sample count must be positive");
  if (examples.cols() != model.dim(macro::Side::V)) {
    throw DimensionError("examples have width " + std::to_string(examples.cols()) +
                         ", the V side expects " + std::to_string(model.dim(macro::Side::V)));
  }

  DesignConsistency out;
  out.threshold = quantile(true_pair_distances(model, reference), 0.95);

  const MacroWhitener whitener(model.macro_statistics());
  const MatD targets = whitener.whiten(model.encode(macro::Side::V, examples));
  const MatD ref_macros = whitener.whiten(model.encode(macro::Side::V, reference.v));

  std::vector<double> baseline;
  for (Index e = 0; e < examples.rows(); ++e) {
    macro::Macrostate target{model.encode(macro::Side::V, examples.row(e))};
    const MatD params =
        macro::conditional_sample(model, macro::Side::U, target, n_samples, derive(seed, 1, e)).samples;
    MatD regenerated(n_samples, model.dim(macro::Side::V));
    for (Index s = 0; s < n_samples; ++s) {
      regenerated.row(s) = sim::simulate_from_u(options, params.row(s), derive(seed, 2, e, s));
    }
    const MatD macros = whitener.whiten(model.encode(macro::Side::V, regenerated));
    for (Index s = 0; s < n_samples; ++s) {
      out.distances.push_back((macros.row(s) - targets.row(e)).norm());
    }
    std::mt19937_64 rng(derive(seed, 3, e));
    std::uniform_int_distribution<Index> pick(0, reference.size() - 1);
    for (Index s = 0; s < n_samples; ++s) {
      baseline.push_back((ref_macros.row(pick(rng)) - targets.row(e)).norm());
    }
  }
  out.samples = static_cast<Index>(out.distances.size());
  out.pass_fraction = fraction_below(out.distances, out.threshold);
  out.baseline_pass_fraction = fraction_below(baseline, out.threshold);
  out.median_distance = median(out.distances);
  out.baseline_median = median(baseline);
  out.separation = out.median_distance > 0 ? out.baseline_median / out.median_distance
                                           : std::numeric_limits<double>::infinity();
  return out;
}

RotationAgreement rotation_agreement(const macro::MacroModel& model,
                                     const sim::DatasetOptions& options, const RowVecD& example,
                                     Index n_samples, std::uint64_t seed) {
  if (options.testbed != sim::Testbed::Linear) throw ContractError("rotation agreement needs the linear testbed");
  if (n_samples < 1) throw ContractError("sample count must be positive");
  RotationAgreement out;
  out.samples = n_samples;
  out.target_sign = rotation_sign(sim::unflatten(example));
  if (out.target_sign == 0) throw ContractError("example trajectory does not rotate");

  const macro::Macrostate target = model.encode_one(macro::Side::V, example);
  const MatD params = macro::conditional_sample(model, macro::Side::U, target, n_samples, derive(seed, 1)).samples;
  const MatD trajectories =
      macro::conditional_sample(model, macro::Side::V, target, n_samples, derive(seed, 2)).samples;
  Index resim = 0, direct = 0;
  for (Index s = 0; s < n_samples; ++s) {
    const RowVecD v = sim::simulate_from_u(options, params.row(s), derive(seed, 4, s));
    if (rotation_sign(sim::unflatten(v)) == out.target_sign) ++resim;
    if (rotation_sign(sim::unflatten(trajectories.row(s))) == out.target_sign) ++direct;
  }
  out.resimulated = static_cast<double>(resim) / static_cast<double>(n_samples);
  out.direct = static_cast<double>(direct) / static_cast<double>(n_samples);
  return out;
}

std::vector<SensitivityRow> parameter_sensitivity(const macro::MacroModel& model,
                                                  const std::vector<macro::Macrostate>& targets,
                                                  Index n_samples, std::uint64_t seed,
                                                  const std::vector<std::string>& names) {
  if (targets.size() < 2) throw ContractError("parameter sensitivity needs at least 2 targets");
  if (n_samples < 2) throw ContractError("parameter sensitivity needs at least 2 samples per target");
  const Index d = model.dim(macro::Side::U);
  if (!names.empty() && static_cast<Index>(names.size()) != d) {
    throw DimensionError("parameter name count does not match the U width");
  }
  const auto k = static_cast<Index>(targets.size());
  MatD means(k, d);
  MatD vars(k, d);
  for (Index t = 0; t < k; ++t) {
    const MatD s =
        macro::conditional_sample(model, macro::Side::U, targets[t], n_samples, derive(seed, 7, t)).samples;
    means.row(t) = s.colwise().mean();
    vars.row(t) = (s.rowwise() - means.row(t)).colwise().squaredNorm() / static_cast<double>(n_samples - 1);
  }
  std::vector<SensitivityRow> table;
  const RowVecD grand = means.colwise().mean();
  for (Index j = 0; j < d; ++j) {
    SensitivityRow row;
    row.parameter = j;
    row.name = names.empty() ? "u" + std::to_string(j) : names[j];
    row.between = (means.col(j).array() - grand(j)).square().sum() / static_cast<double>(k - 1);
    row.within = vars.col(j).mean();
    row.ratio = row.between / std::max(row.within, 1e-300);
    table.push_back(row);
  }
  std::stable_sort(table.begin(), table.end(),
                   [](const SensitivityRow& a, const SensitivityRow& b) { return a.ratio > b.ratio; });
  return table;
}

Index sensitivity_rank(const std::vector<SensitivityRow>& table, Index index) {
  for (std::size_t r = 0; r < table.size(); ++r) {
    if (table[r].parameter == index) return static_cast<Index>(r);
  }
  throw ContractError("parameter " + std::to_string(index) + " missing from the sensitivity table");
}

Informativeness macro_informativeness(const macro::MacroModel& model, const PairDataset& data,
                                      std::uint64_t seed) {
  if (data.size() < 2) throw ContractError("informativeness needs at least 2 pairs");
  std::vector<Index> perm(static_cast<std::size_t>(data.size()));
  std::iota(perm.begin(), perm.end(), Index{0});
  std::mt19937_64 rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);
  MatD v_shuffled(data.size(), data.v_dim());
  // Cyclic shift over a random order pairs every u_i with some v_j, j != i.
  for (std::size_t i = 0; i < perm.size(); ++i) {
    v_shuffled.row(perm[i]) = data.v.row(perm[(i + 1) % perm.size()]);
  }
  return {macro::prediction_loss(model, data.u, data.v), macro::prediction_loss(model, data.u, v_shuffled)};
}

double energy_monotonicity(const macro::MacroModel& model, const PairDataset& data) {
  if (data.u_dim() != 2) throw DimensionError("energy monotonicity needs 2-d phase-space records");
  const MatD macro = model.encode(macro::Side::U, data.u);
  std::vector<double> m(static_cast<std::size_t>(data.size()));
  std::vector<double> h(m.size());
  for (Index i = 0; i < data.size(); ++i) {
    m[i] = macro(i, 0);
    h[i] = sim::sho_energy({data.u(i, 0), data.u(i, 1)});
  }
  return spearman(m, h);
}

double circle_residual(const MatD& points) {
  if (points.cols() != 2) throw DimensionError("circle residual needs 2-d points");
  if (points.rows() < 2) throw ContractError("circle residual needs at least 2 points");
  const Eigen::ArrayXd r = points.rowwise().norm().array();
  const double mean = r.mean();
  if (!(mean > 0)) throw NumericError("all points sit at the origin");
  const double sd = std::sqrt((r - mean).square().sum() / static_cast<double>(r.size()));
  return sd / mean;
}

std::vector<macro::Macrostate> quantile_targets(const macro::MacroModel& model, macro::Side side, const MatD& x,
                                                const std::vector<double>& quantiles) {
  if (x.rows() == 0) throw ContractError("no records to place targets on");
  const MatD macro = model.encode(side, x);
  std::vector<std::vector<double>> cols(static_cast<std::size_t>(macro.cols()));
  for (Index j = 0; j < macro.cols(); ++j) cols[j].assign(macro.col(j).data(), macro.col(j).data() + macro.rows());
  std::vector<macro::Macrostate> out;
  for (double q : quantiles) {
    RowVecD t(macro.cols());
    for (Index j = 0; j < macro.cols(); ++j) t(j) = quantile(cols[j], j == 0 ? q : 0.5);
    out.push_back({t});
  }
  return out;
}

std::vector<Index> pick_quantile_examples(const macro::MacroModel& model, const MatD& v,
                                          const std::vector<double>& quantiles) {
  if (v.rows() == 0) throw ContractError("no records to pick examples from");
  const MatD macro = model.encode(macro::Side::V, v);
  std::vector<double> first(static_cast<std::size_t>(v.rows()));
  for (Index i = 0; i < v.rows(); ++i) first[i] = macro(i, 0);
  std::vector<Index> out;
  for (double q : quantiles) {
    const double level = quantile(first, q);
    Index best = 0;
    for (Index i = 1; i < v.rows(); ++i) {
      if (std::abs(first[i] - level) < std::abs(first[best] - level)) best = i;
    }
    out.push_back(best);
  }
  return out;
}

std::vector<Index> patterned_records(const MatD& v, double min_variance) {
  if (v.cols() % 2 != 0) throw DimensionError("pattern records need an even width");
  const Index cells = v.cols() / 2;
  std::vector<Index> out;
  for (Index i = 0; i < v.rows(); ++i) {
    const auto b = v.row(i).tail(cells).array();
    if ((b - b.mean()).square().mean() > min_variance) out.push_back(i);
  }
  return out;
}

}  // namespace macronet::eval
