#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rankkit/judges.hpp"
#include "rankkit/protocol.hpp"

namespace rankkit {

using TokenCounter = std::function<std::size_t(std::string_view)>;

// Returns the default deterministic token counter (utf8::token_count).
TokenCounter default_token_counter();

// One dataset row. The base layer is the pairs file; later pipeline stages
// add teacher_score, the ensemble ballot, and the SFT target.
struct PairRecord {
  QueryDocPair pair;
  nlohmann::json metadata = nlohmann::json::object();
  std::optional<double> teacher_score;
  std::optional<EnsembleLabel> ensemble;
  std::optional<std::string> sft_target;

  nlohmann::json to_json() const;
  static PairRecord from_json(const nlohmann::json& j, const TokenCounter& tokens);
};

// Reads a JSONL records file; validates non-empty unique pair ids and
// computes doc_token_count with the supplied counter. Errors carry the
// file/line position.
std::vector<PairRecord> read_records(const std::filesystem::path& path,
                                     const TokenCounter& tokens);

void write_records(const std::filesystem::path& path,
                   const std::vector<PairRecord>& records);

// Generic JSONL helpers.
std::vector<nlohmann::json> read_jsonl(const std::filesystem::path& path);
void write_jsonl(const std::filesystem::path& path,
                 const std::vector<nlohmann::json>& rows);

}  // namespace rankkit
