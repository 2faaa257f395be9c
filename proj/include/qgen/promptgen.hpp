#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace qgen::promptgen {

enum class PromptId { A, B, C, D };

inline constexpr std::array<PromptId, 4> kAllPrompts = {PromptId::A, PromptId::B, PromptId::C, PromptId::D};

std::string_view to_string(PromptId id);
// Accepts "A".."D" (case-insensitive); throws InvalidArgument otherwise.
PromptId parse_prompt_id(std::string_view s);

struct PromptTemplate {
  PromptId id;
  std::string_view instruction;
};

// The four instruction texts, byte for byte.
const PromptTemplate& prompt_template(PromptId id);

struct GenerationConfig {
  double temperature = 0.5;
  std::size_t questions_per_prompt = 5;
  std::size_t max_output_tokens = 256;
  std::uint64_t seed = 0;  // consumed by the mock backend only
};

// instruction + "\nText: " + context + "\nQuestions:"
// Throws InvalidArgument on an empty context.
std::string render_prompt(const PromptTemplate& t, std::string_view context);

// Inverse of the framing above; nullopt if the prompt was not rendered by
// render_prompt.
std::optional<std::string> extract_context(std::string_view prompt);

struct GeneratedQuestion {
  std::size_t context_id = 0;
  PromptId prompt_id = PromptId::A;
  std::size_t index = 0;
  std::string text;

  bool operator==(const GeneratedQuestion&) const = default;
};

struct ParsedQuestions {
  std::vector<std::string> items;
  bool shortfall = false;  // fewer than expected were found
};

// Recovers the question list from a raw completion. Recognised items, in
// order of appearance:
//   - numbered markers "N." / "N)" at line start or after whitespace, where N
//     continues the running sequence (so "born in 1981. What" is not split);
//     an item runs to the next accepted marker or the end of the line;
//   - bulleted lines starting with "-", "*" or "•";
//   - bare lines ending in '?', with an optional "Q3:" / "Question 3:" prefix.
// Items are trimmed and runs of terminal punctuation collapse to the first
// mark. At most `expected` items are returned. Throws NoQuestionsFound.
ParsedQuestions parse_questions(std::string_view raw, std::size_t expected);

}  // namespace qgen::promptgen
