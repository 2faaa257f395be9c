#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

// Unicode helpers shared by the corpus, textstats and similarity modules.
// All character offsets in this project count Unicode scalar values, which
// is how SQuAD's answer_start is defined.
namespace qgen::text {

// Invalid byte sequences decode to U+FFFD.
std::u32string decode_utf8(std::string_view bytes);
std::string encode_utf8(std::u32string_view code_points);
void append_utf8(std::string& out, char32_t cp);

bool is_space(char32_t cp);
bool is_punct(char32_t cp);
bool is_upper(char32_t cp);
char32_t to_lower(char32_t cp);

std::string to_lower(std::string_view utf8);
std::string_view trim(std::string_view s);

// A whitespace-delimited token located by code-point offsets [begin, end).
struct TokenSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
};

std::vector<TokenSpan> whitespace_spans(std::u32string_view text);
std::size_t whitespace_token_count(std::string_view utf8);

// Lowercase, split on whitespace, strip leading/trailing punctuation, drop
// empties. Interior punctuation ("don't", "stop-gap") is kept.
std::vector<std::string> tokenize(std::string_view utf8);

// RFC 4180 quoting when the field contains a comma, quote or newline.
std::string csv_escape(std::string_view field);

}  // namespace qgen::text
