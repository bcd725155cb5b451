#pragma once

#include "macronet/dataset.hpp"

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace macronet::io {

using Json = nlohmann::json;

/// Malformed, truncated or incompatible files.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::uint16_t kContainerVersion = 1;

/// Self-describing binary container:
///   "MNDS" | u16 version | u32 n | n bytes of JSON metadata | f64 LE blocks.
/// The metadata's "blocks" array lists {name, rows, cols} in file order and
/// is filled in by the writer.
struct Container {
  Json metadata = Json::object();
  std::vector<std::pair<std::string, MatD>> blocks;

  const MatD& block(const std::string& name) const;
  bool has_block(const std::string& name) const;
};

std::string encode_container(const Container& c);
Container decode_container(const std::string& bytes);

void write_container(const std::filesystem::path& path, const Container& c);
Container read_container(const std::filesystem::path& path);

/// Dataset files carry kind "pair_dataset" and blocks u, v, aux.
Container dataset_container(const PairDataset& data);
PairDataset dataset_from_container(const Container& c);

void save_dataset(const std::filesystem::path& path, const PairDataset& data);
PairDataset load_dataset(const std::filesystem::path& path);

/// Little-endian primitives shared by the binary formats.
void put_u16(std::string& out, std::uint16_t v);
void put_u32(std::string& out, std::uint32_t v);
void put_f64(std::string& out, double v);
void put_matrix(std::string& out, const MatD& m);

class ByteReader {
 public:
  explicit ByteReader(const std::string& bytes, std::size_t offset = 0) : bytes_(bytes), pos_(offset) {}

  std::string take(std::size_t n);
  std::uint16_t u16();
  std::uint32_t u32();
  double f64();
  MatD matrix(Index rows, Index cols);
  std::size_t position() const { return pos_; }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  const std::string& bytes_;
  std::size_t pos_;
};

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& bytes);

/// Lowercase hex SHA-256 of a byte string.
std::string sha256_hex(const std::string& bytes);

}  // namespace macronet::io
