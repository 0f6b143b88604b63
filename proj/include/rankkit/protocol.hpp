#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

#include "rankkit/errors.hpp"

namespace rankkit {

enum class PairSource { open_corpus, web_search, keyword_rewrite };

std::string to_string(PairSource s);
PairSource pair_source_from_string(std::string_view s);

// One (query, document) unit flowing through the whole pipeline.
struct QueryDocPair {
  std::string pair_id;
  std::string query;
  std::string document;
  std::string language = "unknown";  // BCP-47-style tag or "unknown"
  PairSource source = PairSource::open_corpus;
  std::size_t doc_token_count = 0;

  // Throws ValidationError naming the offending field.
  void validate() const;
};

struct PromptBundle {
  std::string rendered_text;
  // Byte offset where the first generated token begins. Equals
  // rendered_text.size(): the verdict logits are read right after the
  // empty think block.
  std::size_t label_position_marker = 0;
};

enum class Verdict { yes, no, other };

std::string to_string(Verdict v);

// Parsed model output: verdict token plus the optional XML-tagged fields.
struct StructuredOutput {
  Verdict verdict = Verdict::other;
  std::optional<std::string> contribution;
  std::optional<std::string> evidence;
  // Non-empty only when verdict == no and the model kept generating.
  std::optional<std::string> trailing_after_no;
  std::string raw;

  bool operator==(const StructuredOutput&) const = default;
};

enum class FormatCase { no_clean, no_with_tail, yes_graded, bad_first_token };

struct FormatScore {
  double value = 0.0;  // one of {0.0, 0.4, 0.7, 1.0}, exact
  FormatCase format_case = FormatCase::bad_first_token;
};

enum class GoldLabel { positive, negative };

std::string to_string(GoldLabel label);
GoldLabel gold_label_from_string(std::string_view s);

namespace protocol {

// Shipped defaults, overridable via config keys `protocol.instruction` and
// `protocol.system_prompt`.
extern const char* const kDefaultSystemPrompt;
extern const char* const kDefaultInstruction;

// Renders the raw prompt string. The template is fixed: system turn, user
// turn carrying <Instruct>/<Query>/<Document>, assistant turn opened with an
// empty <think></think> block followed by a blank line, so the very next
// decoded token is the verdict. Pure and byte-deterministic.
PromptBundle render_prompt(const QueryDocPair& pair,
                           std::string_view instruction = kDefaultInstruction,
                           std::string_view system_prompt = kDefaultSystemPrompt);

// Classifies arbitrary generated text. Total: never throws. The first
// whitespace-delimited token, lowercased, decides the verdict; "yes" outputs
// carry the first well-formed <contribution> and <evidence> spans (tag
// delimiters excluded), "no" outputs capture any non-whitespace continuation.
StructuredOutput parse_output(std::string_view generated);

// Structural-compliance score in {0, 0.4, 0.7, 1.0}:
//   no + nothing else        -> 1.0
//   no + any continuation    -> 0.0
//   yes                      -> 0.4 + 0.3 per well-formed field (> 10
//                               scalar values after trimming), capped at 1.0
//   anything else            -> 0.0
FormatScore format_score(const StructuredOutput& out);

// True iff the verdict token agrees with the gold binary label;
// verdict == other never matches.
bool label_match(const StructuredOutput& out, GoldLabel gold);

// A field counts toward format_score when present and longer than 10
// Unicode scalar values after trimming surrounding whitespace.
bool field_well_formed(const std::optional<std::string>& field);

// SFT-file serialization: verdict token, then each present field as an
// XML-tagged block on its own line.
std::string serialize_target(const StructuredOutput& out);

}  // namespace protocol
}  // namespace rankkit
