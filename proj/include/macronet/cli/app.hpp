#pragma once

#include "macronet/io/checkpoint.hpp"
#include "macronet/macro/train.hpp"
#include "macronet/sim/testbed.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace macronet::cli {

enum ExitCode : int { kOk = 0, kFailed = 1, kUsage = 2, kNumeric = 3 };

/// Every knob of a run. Unset optionals take the testbed default from
/// defaults_for(); everything else has a fixed default.
struct RunConfig {
  std::string testbed = "sho";
  Index n = 10000;
  std::uint64_t seed = 0;
  std::filesystem::path out_dir = "out";
  bool verbose = false;
  unsigned threads = 1;

  std::optional<Index> macro_dim;
  std::optional<bool> shared_weights;
  std::optional<Index> depth;
  std::optional<std::vector<Index>> hidden;
  std::optional<double> gamma;
  std::optional<double> noise;
  std::optional<double> learning_rate;
  std::optional<int> epochs;
  std::optional<Index> batch_size;

  Index grid = 16;
  long steps = 5000;
};

/// Fully resolved model and optimiser settings for a testbed.
struct ModelDefaults {
  Index macro_dim;
  bool shared_weights;
  Index depth;
  std::vector<Index> hidden;
  double gamma;
  double noise;
  double learning_rate;
  int epochs;
  Index batch_size;
};

ModelDefaults defaults_for(sim::Testbed testbed);

/// Resolves optionals against the testbed defaults.
macro::MacroConfig macro_config(const RunConfig& rc, sim::Testbed testbed, Index dim_u, Index dim_v);
macro::TrainConfig train_config(const RunConfig& rc, sim::Testbed testbed);
sim::DatasetOptions dataset_options(const RunConfig& rc);

/// Snapshot of the resolved run settings stored in checkpoints.
io::Json config_snapshot(const RunConfig& rc, sim::Testbed testbed);

/// Full command line entry point; args exclude the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace macronet::cli
