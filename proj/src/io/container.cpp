#include "macronet/io/container.hpp"

#include <openssl/evp.h>

#include <bit>
#include <fstream>
#include <limits>

namespace macronet::io {

namespace {

constexpr char kMagic[4] = {'M', 'N', 'D', 'S'};

void check_meta_shape(const Json& entry) {
  if (!entry.is_object() || !entry.contains("name") || !entry.contains("rows") || !entry.contains("cols")) {
    throw FormatError("block descriptor must carry name, rows and cols");
  }
}

}  // namespace

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>(v >> 8));
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::string& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

void put_matrix(std::string& out, const MatD& m) {
  out.reserve(out.size() + 8 * static_cast<std::size_t>(m.size()));
  for (Index i = 0; i < m.size(); ++i) put_f64(out, m.data()[i]);
}

std::string ByteReader::take(std::size_t n) {
  if (remaining() < n) throw FormatError("file is truncated");
  std::string s = bytes_.substr(pos_, n);
  pos_ += n;
  return s;
}

std::uint16_t ByteReader::u16() {
  const std::string s = take(2);
  return static_cast<std::uint16_t>(static_cast<unsigned char>(s[0]) |
                                    (static_cast<unsigned char>(s[1]) << 8));
}

std::uint32_t ByteReader::u32() {
  const std::string s = take(4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(s[i])) << (8 * i);
  return v;
}

double ByteReader::f64() {
  if (remaining() < 8) throw FormatError("file is truncated");
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) {
    bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
  }
  pos_ += 8;
  return std::bit_cast<double>(bits);
}

MatD ByteReader::matrix(Index rows, Index cols) {
  if (rows < 0 || cols < 0) throw FormatError("negative block shape");
  const auto count = static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
  if (remaining() / 8 < count) throw FormatError("file is truncated inside a data block");
  MatD m(rows, cols);
  for (std::size_t i = 0; i < count; ++i) m.data()[i] = f64();
  return m;
}

const MatD& Container::block(const std::string& name) const {
  for (const auto& [n, m] : blocks) {
    if (n == name) return m;
  }
  throw FormatError("missing data block '" + name + "'");
}

bool Container::has_block(const std::string& name) const {
  for (const auto& b : blocks) {
    if (b.first == name) return true;
  }
  return false;
}

std::string encode_container(const Container& c) {
  Json meta = c.metadata;
  Json descriptors = Json::array();
  for (const auto& [name, m] : c.blocks) {
    descriptors.push_back({{"name", name}, {"rows", m.rows()}, {"cols", m.cols()}});
  }
  meta["blocks"] = descriptors;
  const std::string text = meta.dump();
  if (text.size() > std::numeric_limits<std::uint32_t>::max()) throw FormatError("metadata too large");

  std::string out(kMagic, 4);
  put_u16(out, kContainerVersion);
  put_u32(out, static_cast<std::uint32_t>(text.size()));
  out += text;
  for (const auto& block : c.blocks) put_matrix(out, block.second);
  return out;
}

Container decode_container(const std::string& bytes) {
  ByteReader r(bytes);
  if (r.take(4) != std::string(kMagic, 4)) throw FormatError("not a MacroNet data file (bad magic)");
  const auto version = r.u16();
  if (version != kContainerVersion) {
    throw FormatError("unsupported data file version " + std::to_string(version) + " (expected " +
                      std::to_string(kContainerVersion) + ")");
  }
  const auto len = r.u32();
  Container c;
  try {
    c.metadata = Json::parse(r.take(len));
  } catch (const Json::exception& e) {
    throw FormatError(std::string("metadata is not valid JSON: ") + e.what());
  }
  if (!c.metadata.is_object() || !c.metadata.contains("blocks") || !c.metadata["blocks"].is_array()) {
    throw FormatError("metadata lacks a block list");
  }
  for (const auto& entry : c.metadata["blocks"]) {
    check_meta_shape(entry);
    c.blocks.emplace_back(entry["name"].get<std::string>(),
                          r.matrix(entry["rows"].get<Index>(), entry["cols"].get<Index>()));
  }
  if (r.remaining() != 0) throw FormatError("trailing bytes after the last data block");
  c.metadata.erase("blocks");
  return c;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open '" + path.string() + "' for reading");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot open '" + path.string() + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError("failed writing '" + path.string() + "'");
}

void write_container(const std::filesystem::path& path, const Container& c) {
  write_file(path, encode_container(c));
}

Container read_container(const std::filesystem::path& path) { return decode_container(read_file(path)); }

Container dataset_container(const PairDataset& data) {
  data.validate();
  Container c;
  c.metadata["kind"] = "pair_dataset";
  c.metadata["generator"] = data.metadata.generator;
  c.metadata["seed"] = data.metadata.seed;
  c.metadata["parameters"] = data.metadata.parameters;
  c.blocks = {{"u", data.u}, {"v", data.v}, {"aux", data.aux}};
  return c;
}

PairDataset dataset_from_container(const Container& c) {
  if (c.metadata.value("kind", "") != "pair_dataset") throw FormatError("file does not hold a pair dataset");
  PairDataset d;
  try {
    d.metadata.generator = c.metadata.at("generator").get<std::string>();
    d.metadata.seed = c.metadata.at("seed").get<std::uint64_t>();
    d.metadata.parameters = c.metadata.at("parameters").get<std::map<std::string, double>>();
  } catch (const Json::exception& e) {
    throw FormatError(std::string("bad dataset metadata: ") + e.what());
  }
  d.u = c.block("u");
  d.v = c.block("v");
  d.aux = c.block("aux");
  d.validate();
  return d;
}

void save_dataset(const std::filesystem::path& path, const PairDataset& data) {
  write_container(path, dataset_container(data));
}

PairDataset load_dataset(const std::filesystem::path& path) { return dataset_from_container(read_container(path)); }

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 computation failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xf]);
  }
  return out;
}

}  // namespace macronet::io
