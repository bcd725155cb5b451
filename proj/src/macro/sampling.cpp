#include "macronet/macro/sampling.hpp"

#include <random>

namespace macronet::macro {

SampleResult conditional_sample(const MacroModel& model, Side side, const Macrostate& target,
                                Index n, std::uint64_t rng_seed) {
  const Index m = model.macro_dim();
  const Index d = model.dim(side);
  if (target.size() != m) {
    throw DimensionError("target macrostate has length " + std::to_string(target.size()) +
                         ", model macro dimension is " + std::to_string(m));
  }
  if (n < 0) throw ContractError("sample count must be nonnegative");
  if (!target.values.allFinite()) throw NumericError("target macrostate is not finite");

  SampleResult result;
  if (!model.trained()) result.warnings.emplace_back("model has not been trained");
  if (model.diverged()) result.warnings.emplace_back("model training diverged");

  std::mt19937_64 rng(rng_seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  MatD y(n, d);
  y.leftCols(m) = target.values.replicate(n, 1);
  for (Index i = 0; i < n; ++i) {
    for (Index j = m; j < d; ++j) y(i, j) = normal(rng);
  }
  diff::NoGradGuard guard;
  const MatD x = model.flow(side).inverse(Tensor<double>(y)).value();
  result.samples = model.denormalize(side, x);
  return result;
}

}  // namespace macronet::macro
