#pragma once

#include "macronet/io/container.hpp"
#include "macronet/macro/model.hpp"

#include <filesystem>
#include <string>

namespace macronet::io {

inline constexpr std::uint16_t kCheckpointVersion = 1;

/// Trained model plus everything needed to reuse it: the generator settings
/// of its training data and a snapshot of the run configuration.
struct Checkpoint {
  macro::MacroModel model;
  DatasetMetadata dataset;
  Json config = Json::object();
};

/// "MNCK" | u16 version | u32 n | n bytes of JSON header | f64 LE blocks |
/// 64 hex chars of SHA-256 over everything before them.
std::string encode_checkpoint(const Checkpoint& ckpt);
Checkpoint decode_checkpoint(const std::string& bytes);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

Json to_json(const macro::MacroConfig& config);
macro::MacroConfig macro_config_from_json(const Json& j);

}  // namespace macronet::io
