#include "macronet/io/checkpoint.hpp"

namespace macronet::io {

namespace {

constexpr char kMagic[4] = {'M', 'N', 'C', 'K'};
constexpr std::size_t kDigestChars = 64;

Json flow_json(const flow::FlowOptions& o) {
  return {{"depth", o.depth}, {"hidden", o.hidden}, {"scale_clamp", o.scale_clamp}, {"identity_init", o.identity_init}};
}

flow::FlowOptions flow_from_json(const Json& j) {
  flow::FlowOptions o;
  o.depth = j.at("depth").get<Index>();
  o.hidden = j.at("hidden").get<std::vector<Index>>();
  o.scale_clamp = j.at("scale_clamp").get<double>();
  o.identity_init = j.at("identity_init").get<bool>();
  return o;
}

void expect_shape(const MatD& m, Index rows, Index cols, const std::string& what) {
  if (m.rows() != rows || m.cols() != cols) {
    throw FormatError("checkpoint block " + what + " has shape " + shape_string(m.rows(), m.cols()) +
                      ", expected " + shape_string(rows, cols));
  }
}

}  // namespace

Json to_json(const macro::MacroConfig& c) {
  return {{"dim_u", c.dim_u},
          {"dim_v", c.dim_v},
          {"macro_dim", c.macro_dim},
          {"shared_weights", c.shared_weights},
          {"gamma", c.gamma},
          {"input_noise_sigma", c.input_noise_sigma},
          {"flow_u", flow_json(c.flow_u)},
          {"flow_v", flow_json(c.flow_v)}};
}

macro::MacroConfig macro_config_from_json(const Json& j) {
  macro::MacroConfig c;
  c.dim_u = j.at("dim_u").get<Index>();
  c.dim_v = j.at("dim_v").get<Index>();
  c.macro_dim = j.at("macro_dim").get<Index>();
  c.shared_weights = j.at("shared_weights").get<bool>();
  c.gamma = j.at("gamma").get<double>();
  c.input_noise_sigma = j.at("input_noise_sigma").get<double>();
  c.flow_u = flow_from_json(j.at("flow_u"));
  c.flow_v = flow_from_json(j.at("flow_v"));
  return c;
}

std::string encode_checkpoint(const Checkpoint& ckpt) {
  const auto& model = ckpt.model;
  const auto params = model.parameters();
  Json header;
  header["model"] = to_json(model.config());
  header["state"] = {{"trained", model.trained()}, {"diverged", model.diverged()}};
  header["dataset"] = {{"generator", ckpt.dataset.generator},
                       {"seed", ckpt.dataset.seed},
                       {"parameters", ckpt.dataset.parameters}};
  header["config"] = ckpt.config;
  Json plist = Json::array();
  for (const auto& p : params) plist.push_back({{"name", p.name()}, {"rows", p.rows()}, {"cols", p.cols()}});
  header["parameters"] = plist;
  const std::string text = header.dump();

  std::string out(kMagic, 4);
  put_u16(out, kCheckpointVersion);
  put_u32(out, static_cast<std::uint32_t>(text.size()));
  out += text;
  for (auto side : {macro::Side::U, macro::Side::V}) {
    put_matrix(out, model.normalizer(side).mean);
    put_matrix(out, model.normalizer(side).scale);
  }
  put_matrix(out, model.macro_statistics().mean);
  put_matrix(out, model.macro_statistics().covariance);
  for (const auto& p : params) put_matrix(out, p.value());
  out += sha256_hex(out);
  return out;
}

Checkpoint decode_checkpoint(const std::string& bytes) {
  if (bytes.size() < 10 + kDigestChars) throw FormatError("checkpoint is truncated");
  const std::string body = bytes.substr(0, bytes.size() - kDigestChars);
  if (sha256_hex(body) != bytes.substr(bytes.size() - kDigestChars)) {
    throw FormatError("checkpoint digest mismatch (file corrupted or edited)");
  }
  ByteReader r(body);
  if (r.take(4) != std::string(kMagic, 4)) throw FormatError("not a MacroNet checkpoint (bad magic)");
  const auto version = r.u16();
  if (version != kCheckpointVersion) {
    throw FormatError("checkpoint version " + std::to_string(version) + " is not supported (expected " +
                      std::to_string(kCheckpointVersion) + ")");
  }
  Json header;
  try {
    header = Json::parse(r.take(r.u32()));
  } catch (const Json::exception& e) {
    throw FormatError(std::string("checkpoint header is not valid JSON: ") + e.what());
  }

  try {
    const macro::MacroConfig config = macro_config_from_json(header.at("model"));
    Checkpoint ckpt{macro::MacroModel(config, 0), {}, header.at("config")};
    ckpt.dataset.generator = header.at("dataset").at("generator").get<std::string>();
    ckpt.dataset.seed = header.at("dataset").at("seed").get<std::uint64_t>();
    ckpt.dataset.parameters = header.at("dataset").at("parameters").get<std::map<std::string, double>>();

    auto& model = ckpt.model;
    macro::Normalizer nu{r.matrix(1, config.dim_u), r.matrix(1, config.dim_u)};
    macro::Normalizer nv{r.matrix(1, config.dim_v), r.matrix(1, config.dim_v)};
    model.set_normalizers(std::move(nu), std::move(nv));
    const Index m = config.macro_dim;
    macro::MacroStatistics stats{r.matrix(1, m), r.matrix(m, m)};
    model.set_macro_statistics(std::move(stats));

    auto params = model.parameters();
    const auto& plist = header.at("parameters");
    if (plist.size() != params.size()) {
      throw FormatError("checkpoint lists " + std::to_string(plist.size()) + " parameters, the model has " +
                        std::to_string(params.size()));
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
      if (plist[i].at("name").get<std::string>() != params[i].name()) {
        throw FormatError("checkpoint parameter " + std::to_string(i) + " is '" +
                          plist[i].at("name").get<std::string>() + "', the model expects '" + params[i].name() + "'");
      }
      MatD value = r.matrix(plist[i].at("rows").get<Index>(), plist[i].at("cols").get<Index>());
      expect_shape(value, params[i].rows(), params[i].cols(), params[i].name());
      if (!value.allFinite()) throw FormatError("checkpoint parameter " + params[i].name() + " is not finite");
      params[i].mutable_value() = std::move(value);
    }
    if (r.remaining() != 0) throw FormatError("trailing bytes in checkpoint body");
    model.mark_trained(header.at("state").at("trained").get<bool>());
    model.mark_diverged(header.at("state").at("diverged").get<bool>());
    return ckpt;
  } catch (const Json::exception& e) {
    throw FormatError(std::string("bad checkpoint header: ") + e.what());
  } catch (const ContractError& e) {
    throw FormatError(std::string("inconsistent checkpoint: ") + e.what());
  }
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  write_file(path, encode_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) { return decode_checkpoint(read_file(path)); }

}  // namespace macronet::io
