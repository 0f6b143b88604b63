#include "rankkit/protocol.hpp"

#include <algorithm>
#include <cctype>

#include "rankkit/utf8.hpp"

namespace rankkit {

std::string to_string(PairSource s) {
  switch (s) {
    case PairSource::open_corpus: return "open_corpus";
    case PairSource::web_search: return "web_search";
    case PairSource::keyword_rewrite: return "keyword_rewrite";
  }
  return "open_corpus";
}

PairSource pair_source_from_string(std::string_view s) {
  if (s == "open_corpus") return PairSource::open_corpus;
  if (s == "web_search") return PairSource::web_search;
  if (s == "keyword_rewrite") return PairSource::keyword_rewrite;
  throw ValidationError("unknown pair source: " + std::string(s));
}

void QueryDocPair::validate() const {
  if (pair_id.empty()) throw ValidationError("pair_id: must be non-empty");
  if (utf8::trim(query).empty())
    throw ValidationError("query: must be non-empty after trimming (pair " + pair_id + ")");
  if (utf8::trim(document).empty())
    throw ValidationError("document: must be non-empty after trimming (pair " + pair_id + ")");
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::yes: return "yes";
    case Verdict::no: return "no";
    case Verdict::other: return "other";
  }
  return "other";
}

std::string to_string(GoldLabel label) {
  return label == GoldLabel::positive ? "positive" : "negative";
}

GoldLabel gold_label_from_string(std::string_view s) {
  if (s == "positive") return GoldLabel::positive;
  if (s == "negative") return GoldLabel::negative;
  throw ValidationError("unknown gold label: " + std::string(s));
}

namespace protocol {

const char* const kDefaultSystemPrompt =
    "Judge whether the Document meets the requirements based on the Query "
    "and the Instruct provided.";

const char* const kDefaultInstruction =
    "Given a query and a document, judge whether the document is relevant to "
    "the query. Answer \"yes\" or \"no\", then provide in XML:\n"
    "1. <contribution>: what the document contributes to the query.\n"
    "2. <evidence>: a self-contained rewrite of relevant content.";

PromptBundle render_prompt(const QueryDocPair& pair, std::string_view instruction,
                           std::string_view system_prompt) {
  pair.validate();
  if (instruction.empty()) throw ValidationError("instruction: must be non-empty");
  if (system_prompt.empty()) throw ValidationError("system_prompt: must be non-empty");

  std::string text;
  text.reserve(pair.query.size() + pair.document.size() + instruction.size() +
               system_prompt.size() + 128);
  text += "<|im_start|>system\n";
  text += system_prompt;
  text += "<|im_end|>\n";
  text += "<|im_start|>user\n";
  text += "<Instruct>: ";
  text += instruction;
  text += "\n<Query>: ";
  text += pair.query;
  text += "\n<Document>: ";
  text += pair.document;
  text += "<|im_end|>\n";
  text += "<|im_start|>assistant\n";
  text += "<think>\n\n</think>\n\n";

  PromptBundle bundle;
  bundle.label_position_marker = text.size();
  bundle.rendered_text = std::move(text);
  return bundle;
}

namespace {

bool is_ws(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

std::string lower_ascii(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

// First well-formed <tag>...</tag> span; content only.
std::optional<std::string> extract_tag(std::string_view text, std::string_view tag) {
  const std::string open = "<" + std::string(tag) + ">";
  const std::string close = "</" + std::string(tag) + ">";
  const auto a = text.find(open);
  if (a == std::string_view::npos) return std::nullopt;
  const auto b = text.find(close, a + open.size());
  if (b == std::string_view::npos) return std::nullopt;
  return std::string(text.substr(a + open.size(), b - a - open.size()));
}

}  // namespace

StructuredOutput parse_output(std::string_view generated) {
  StructuredOutput out;
  out.raw = std::string(generated);

  std::size_t start = 0;
  while (start < generated.size() && is_ws(generated[start])) ++start;
  std::size_t end = start;
  while (end < generated.size() && !is_ws(generated[end])) ++end;
  const std::string first = lower_ascii(generated.substr(start, end - start));

  if (first == "yes") {
    out.verdict = Verdict::yes;
    const auto tail = generated.substr(end);
    out.contribution = extract_tag(tail, "contribution");
    out.evidence = extract_tag(tail, "evidence");
  } else if (first == "no") {
    out.verdict = Verdict::no;
    const auto tail = utf8::trim(generated.substr(end));
    if (!tail.empty()) out.trailing_after_no = std::string(tail);
  } else {
    out.verdict = Verdict::other;
  }
  return out;
}

bool field_well_formed(const std::optional<std::string>& field) {
  return field.has_value() && utf8::trimmed_scalar_count(*field) > 10;
}

FormatScore format_score(const StructuredOutput& out) {
  FormatScore score;
  switch (out.verdict) {
    case Verdict::no:
      if (out.trailing_after_no.has_value()) {
        score.format_case = FormatCase::no_with_tail;
        score.value = 0.0;
      } else {
        score.format_case = FormatCase::no_clean;
        score.value = 1.0;
      }
      return score;
    case Verdict::yes: {
      score.format_case = FormatCase::yes_graded;
      // Scored in integer tenths so the result is one of the exact double
      // literals 0.4 / 0.7 / 1.0, never a drifted sum.
      int tenths = 4;
      if (field_well_formed(out.contribution)) tenths += 3;
      if (field_well_formed(out.evidence)) tenths += 3;
      tenths = std::min(tenths, 10);
      score.value = static_cast<double>(tenths) / 10.0;
      return score;
    }
    case Verdict::other:
      break;
  }
  score.format_case = FormatCase::bad_first_token;
  score.value = 0.0;
  return score;
}

bool label_match(const StructuredOutput& out, GoldLabel gold) {
  if (out.verdict == Verdict::yes) return gold == GoldLabel::positive;
  if (out.verdict == Verdict::no) return gold == GoldLabel::negative;
  return false;
}

std::string serialize_target(const StructuredOutput& out) {
  std::string text = to_string(out.verdict);
  if (out.contribution)
    text += "\n<contribution>" + *out.contribution + "</contribution>";
  if (out.evidence) text += "\n<evidence>" + *out.evidence + "</evidence>";
  return text;
}

}  // namespace protocol
}  // namespace rankkit
