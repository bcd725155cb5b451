#pragma once

#include "macronet/core.hpp"

#include <cstdint>
#include <map>
#include <string>

namespace macronet {

struct DatasetMetadata {
  std::string generator;
  std::uint64_t seed = 0;
  /// Sampling ranges and simulator settings, flat key -> value.
  std::map<std::string, double> parameters;
};

/// Paired microstate records (u_i, v_i) drawn from P(u, v). Row i of u and
/// row i of v form one pair; aux holds generator side information per record
/// (initial states, time offsets) and may have zero columns.
struct PairDataset {
  MatD u;
  MatD v;
  MatD aux;
  DatasetMetadata metadata;

  Index size() const { return u.rows(); }
  Index u_dim() const { return u.cols(); }
  Index v_dim() const { return v.cols(); }

  void validate() const {
    if (u.rows() != v.rows()) {
      throw ContractError("dataset has " + std::to_string(u.rows()) + " u records but " +
                          std::to_string(v.rows()) + " v records");
    }
    if (aux.size() != 0 && aux.rows() != u.rows()) {
      throw ContractError("dataset aux block has the wrong record count");
    }
    if (!u.allFinite() || !v.allFinite()) throw NumericError("dataset contains non-finite values");
  }
};

}  // namespace macronet
