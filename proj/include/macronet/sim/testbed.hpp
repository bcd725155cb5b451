#pragma once

#include "macronet/dataset.hpp"
#include "macronet/sim/gray_scott.hpp"

#include <cstdint>
#include <random>
#include <string>

namespace macronet::sim {

enum class Testbed { Linear, Sho, Turing };

std::string to_string(Testbed t);
/// Accepts "linear", "sho", "turing"; throws ContractError otherwise.
Testbed parse_testbed(const std::string& name);

struct Range {
  double lo = 0.0;
  double hi = 1.0;

  double clamp(double x) const { return x < lo ? lo : (x > hi ? hi : x); }
};

struct LinearRanges {
  Range entry{-1.0, 1.0};
  Range x0{-1.0, 1.0};
  int steps = 8;
};

struct ShoRanges {
  Range state{-1.5, 1.5};
  Range tau{0.0, 6.283185307179586};
};

struct TuringRanges {
  Range diffusion_a{0.1, 0.2};
  Range diffusion_b{0.05, 0.1};
  Range feed{0.01, 0.09};
  Range kill{0.045, 0.07};
  Index grid = 16;
  long steps = 5000;
  double dt = 1.0;
};

struct DatasetOptions {
  Testbed testbed = Testbed::Sho;
  Index count = 0;
  std::uint64_t seed = 0;
  LinearRanges linear;
  ShoRanges sho;
  TuringRanges turing;
  /// Worker threads for record generation; output does not depend on it.
  unsigned threads = 1;

  /// Throws ContractError on empty or inverted ranges and bad settings.
  void validate() const;
};

Index u_dim(const DatasetOptions& options);
Index v_dim(const DatasetOptions& options);

/// Independent random stream for record `index` of a dataset seeded with `seed`.
std::mt19937_64 record_stream(std::uint64_t seed, std::uint64_t index);

/// Samples N pairs for the configured testbed:
///   linear: u = M (row-major 2x2), v = flattened n-point trajectory, aux = x0;
///   sho:    u = (x0, p0), v = (x_tau, p_tau), aux = tau;
///   turing: u = (D_a, D_b, F, k), v = (a, b) flattened row-major.
PairDataset build_pair_dataset(const DatasetOptions& options);

/// Runs the testbed's simulator for one u microstate, drawing any missing
/// inputs (initial state, time offset, initial field noise) from `seed`.
/// Turing parameters are clamped into the sampling ranges first.
RowVecD simulate_from_u(const DatasetOptions& options, const RowVecD& u, std::uint64_t seed);

/// Reconstructs generator options from dataset metadata.
DatasetOptions options_from_metadata(const DatasetMetadata& metadata);
DatasetMetadata metadata_from_options(const DatasetOptions& options);

}  // namespace macronet::sim
