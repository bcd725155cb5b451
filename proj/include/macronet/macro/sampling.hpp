#pragma once

#include "macronet/macro/model.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace macronet::macro {

struct SampleResult {
  /// One raw microstate per row.
  MatD samples;
  /// Quality warnings, e.g. when the model was never trained.
  std::vector<std::string> warnings;
};

/// Draws n microstates on `side` whose macrostate is `target`:
/// x = phi_side^{-1}(concat(target, z)) with z ~ N(0, I_{d-m}).
/// Each call owns a private random stream seeded by rng_seed.
SampleResult conditional_sample(const MacroModel& model, Side side, const Macrostate& target,
                                Index n, std::uint64_t rng_seed);

}  // namespace macronet::macro
