#pragma once

#include "macronet/eval/metrics.hpp"
#include "macronet/io/container.hpp"
#include "macronet/macro/train.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace macronet::io {

/// Tab-separated per-epoch loss table with a header row.
void write_train_tsv(std::ostream& out, const macro::TrainReport& report);
std::string train_tsv(const macro::TrainReport& report);

/// Parses the table written by write_train_tsv back into per-epoch losses.
std::vector<macro::EpochLosses> parse_train_tsv(const std::string& text);

/// Values round-trip exactly; non-finite numbers are stored as "inf", "-inf" or "nan".
Json to_json(const eval::EvalReport& r);
eval::EvalReport eval_report_from_json(const Json& j);

/// One JSON object per line.
std::string eval_jsonl(const std::vector<eval::EvalReport>& reports);
std::vector<eval::EvalReport> parse_eval_jsonl(const std::string& text);

/// Tab-separated table with a header row naming each column.
std::string matrix_tsv(const MatD& m, const std::vector<std::string>& header);

}  // namespace macronet::io
