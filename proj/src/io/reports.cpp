#include "macronet/io/reports.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

namespace macronet::io {

namespace {

Json number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

double number_from(const Json& j) {
  if (j.is_number()) return j.get<double>();
  const auto s = j.get<std::string>();
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  throw FormatError("expected a number, got '" + s + "'");
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, sep)) out.push_back(field);
  return out;
}

}  // namespace

void write_train_tsv(std::ostream& out, const macro::TrainReport& report) {
  out << "epoch\tprediction_loss\tdistribution_loss_u\tdistribution_loss_v\ttotal_loss\n";
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (std::size_t e = 0; e < report.epochs.size(); ++e) {
    const auto& l = report.epochs[e];
    out << e << '\t' << l.prediction << '\t' << l.distribution_u << '\t' << l.distribution_v << '\t'
        << l.total << '\n';
  }
}

std::string train_tsv(const macro::TrainReport& report) {
  std::ostringstream out;
  write_train_tsv(out, report);
  return out.str();
}

std::vector<macro::EpochLosses> parse_train_tsv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.rfind("epoch\t", 0) != 0) throw FormatError("train table lacks its header row");
  std::vector<macro::EpochLosses> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line, '\t');
    if (f.size() != 5) throw FormatError("train table row has " + std::to_string(f.size()) + " fields");
    try {
      out.push_back({std::stod(f[1]), std::stod(f[2]), std::stod(f[3]), std::stod(f[4])});
    } catch (const std::exception&) {
      throw FormatError("unparsable train table row: " + line);
    }
  }
  return out;
}

Json to_json(const eval::EvalReport& r) {
  return {{"testbed", r.testbed},     {"metric", r.metric},   {"value", number(r.value)},
          {"threshold", number(r.threshold)}, {"comparison", eval::to_string(r.comparison)},
          {"pass", r.pass},           {"samples", r.samples}, {"seed", r.seed}};
}

eval::EvalReport eval_report_from_json(const Json& j) {
  try {
    eval::EvalReport r;
    r.testbed = j.at("testbed").get<std::string>();
    r.metric = j.at("metric").get<std::string>();
    r.value = number_from(j.at("value"));
    r.threshold = number_from(j.at("threshold"));
    r.comparison = eval::parse_comparison(j.at("comparison").get<std::string>());
    r.pass = j.at("pass").get<bool>();
    r.samples = j.at("samples").get<Index>();
    r.seed = j.at("seed").get<std::uint64_t>();
    if (r.pass != eval::meets(r.value, r.threshold, r.comparison)) {
      throw FormatError("report '" + r.metric + "' has a pass flag inconsistent with its value");
    }
    return r;
  } catch (const Json::exception& e) {
    throw FormatError(std::string("bad eval report: ") + e.what());
  }
}

std::string eval_jsonl(const std::vector<eval::EvalReport>& reports) {
  std::string out;
  for (const auto& r : reports) out += to_json(r).dump() + "\n";
  return out;
}

std::vector<eval::EvalReport> parse_eval_jsonl(const std::string& text) {
  std::vector<eval::EvalReport> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      out.push_back(eval_report_from_json(Json::parse(line)));
    } catch (const Json::parse_error& e) {
      throw FormatError(std::string("eval report line is not JSON: ") + e.what());
    }
  }
  return out;
}

std::string matrix_tsv(const MatD& m, const std::vector<std::string>& header) {
  if (static_cast<Index>(header.size()) != m.cols()) throw DimensionError("header width does not match the table");
  std::ostringstream out;
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (std::size_t j = 0; j < header.size(); ++j) out << (j ? "\t" : "") << header[j];
  out << '\n';
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) out << (j ? "\t" : "") << m(i, j);
    out << '\n';
  }
  return out.str();
}

}  // namespace macronet::io
