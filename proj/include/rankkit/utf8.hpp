#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace rankkit::utf8 {

// Decodes a UTF-8 string into Unicode scalar values. Invalid bytes are
// decoded as one scalar each (U+FFFD) so the function is total.
std::vector<char32_t> decode(std::string_view text);

// Number of Unicode scalar values in `text`.
std::size_t scalar_count(std::string_view text);

// ASCII-whitespace trim on both ends.
std::string_view trim(std::string_view text);

// Scalar count after trimming surrounding whitespace.
std::size_t trimmed_scalar_count(std::string_view text);

bool is_cjk(char32_t cp);

// Deterministic token counter used wherever a document/evidence length is
// needed: each CJK scalar counts as one token, each maximal run of
// letters/digits counts as one token, everything else separates tokens.
// A byte-pair-free proxy: no vocabulary file, identical on every platform.
std::size_t token_count(std::string_view text);

}  // namespace rankkit::utf8
