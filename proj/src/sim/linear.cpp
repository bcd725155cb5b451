#include "macronet/sim/linear.hpp"

namespace macronet::sim {

Trajectory linear_rollout(const LinearSystemSpec& spec) {
  if (spec.steps < 1) throw ContractError("linear rollout needs at least one step");
  if (!spec.dynamics.allFinite() || !spec.x0.allFinite()) {
    throw NumericError("linear system spec contains non-finite values");
  }
  const double dt = spec.dt();
  Trajectory out(spec.steps, 2);
  Eigen::Vector2d x = spec.x0;
  for (int t = 0; t < spec.steps; ++t) {
    x = x + spec.dynamics * x * dt;
    out.row(t) = x.transpose();
  }
  return out;
}

RowVecD flatten(const Trajectory& traj) {
  return Eigen::Map<const RowVecD>(traj.data(), traj.size());
}

Trajectory unflatten(const RowVecD& flat) {
  if (flat.size() % 2 != 0) throw DimensionError("trajectory vector must have even length");
  return Eigen::Map<const Trajectory>(flat.data(), flat.size() / 2, 2);
}

}  // namespace macronet::sim
