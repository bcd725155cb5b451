#pragma once

#include "macronet/core.hpp"

namespace macronet::sim {

/// Explicit-Euler setup for dx/dt = M x with n steps of size 1/n.
struct LinearSystemSpec {
  Eigen::Matrix2d dynamics = Eigen::Matrix2d::Zero();
  Eigen::Vector2d x0 = Eigen::Vector2d::Zero();
  int steps = 8;

  double dt() const { return 1.0 / steps; }
};

/// Points x_1..x_n, one per row.
using Trajectory = Eigen::Matrix<double, Eigen::Dynamic, 2, Eigen::RowMajor>;

/// x_{t+1} = x_t + M x_t dt, returning [x_1, ..., x_n].
Trajectory linear_rollout(const LinearSystemSpec& spec);

/// Row-major flattening (x_1, y_1, x_2, y_2, ...).
RowVecD flatten(const Trajectory& traj);
Trajectory unflatten(const RowVecD& flat);

}  // namespace macronet::sim
