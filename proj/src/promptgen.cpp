#include "qgen/promptgen.hpp"

#include <cctype>
#include <regex>

#include "qgen/error.hpp"
#include "qgen/text.hpp"

namespace qgen::promptgen {

namespace {

constexpr std::array<PromptTemplate, 4> kTemplates = {{
    {PromptId::A, "Generate 5 questions from the text;"},
    {PromptId::B, "Generate 5 complex questions from the text."},
    {PromptId::C, "Generate 5 questions from the text; make sure the questions can be answered."},
    {PromptId::D,
     "Generate 5 questions from the text; answer the question in the text; if the question is answered in the "
     "context, output 5 questions."},
}};

constexpr std::string_view kTextLabel = "\nText: ";
constexpr std::string_view kQuestionsLabel = "\nQuestions:";

bool is_ascii_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v'; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_terminal(char c) { return c == '?' || c == '.' || c == '!'; }

struct Marker {
  std::size_t begin;  // position of the first digit
  std::size_t end;    // first position after the marker and its whitespace
};

// Numbered markers in `line` that continue the running sequence.
std::vector<Marker> find_markers(std::string_view line, std::optional<unsigned long>& next) {
  std::vector<Marker> out;
  std::size_t i = 0;
  while (i < line.size()) {
    if (!is_digit(line[i]) || (i > 0 && !is_ascii_space(line[i - 1]))) {
      ++i;
      continue;
    }
    std::size_t j = i;
    unsigned long number = 0;
    while (j < line.size() && is_digit(line[j]) && j - i < 6) number = number * 10 + (line[j++] - '0');
    const bool delimited = j + 1 < line.size() && (line[j] == '.' || line[j] == ')') && is_ascii_space(line[j + 1]);
    const bool in_sequence = next ? number == *next : (i == 0 || number == 1);
    if (delimited && in_sequence) {
      std::size_t k = j + 1;
      while (k < line.size() && is_ascii_space(line[k])) ++k;
      out.push_back({i, k});
      next = number + 1;
      i = k;
    } else {
      i = j == i ? i + 1 : j;
    }
  }
  return out;
}

std::string_view strip_question_label(std::string_view s) {
  static const std::regex kLabel(R"(^(?:[Qq]uestion|Q)\s*\d*\s*[:.)]\s*)");
  std::match_results<std::string_view::const_iterator> m;
  if (std::regex_search(s.begin(), s.end(), m, kLabel)) s.remove_prefix(static_cast<std::size_t>(m.length(0)));
  return s;
}

std::string normalize_item(std::string_view s) {
  s = text::trim(strip_question_label(text::trim(s)));
  // Drop a symmetric pair of straight or curly double quotes.
  for (std::string_view q : {std::string_view("\""), std::string_view("“")}) {
    const std::string_view close = q == "\"" ? std::string_view("\"") : std::string_view("”");
    if (s.size() >= q.size() + close.size() && s.starts_with(q) && s.ends_with(close)) {
      s = text::trim(s.substr(q.size(), s.size() - q.size() - close.size()));
    }
  }
  std::string out(s);
  std::size_t run = out.size();
  while (run > 0 && is_terminal(out[run - 1])) --run;
  if (run < out.size()) out.resize(run + 1);
  if (run == 0) out.clear();  // punctuation only
  return out;
}

}  // namespace

std::string_view to_string(PromptId id) {
  switch (id) {
    case PromptId::A: return "A";
    case PromptId::B: return "B";
    case PromptId::C: return "C";
    case PromptId::D: return "D";
  }
  return "?";
}

PromptId parse_prompt_id(std::string_view s) {
  if (s.size() == 1) {
    switch (std::toupper(static_cast<unsigned char>(s[0]))) {
      case 'A': return PromptId::A;
      case 'B': return PromptId::B;
      case 'C': return PromptId::C;
      case 'D': return PromptId::D;
      default: break;
    }
  }
  throw Error(ErrorKind::InvalidArgument, "unknown prompt id \"" + std::string(s) + "\"");
}

const PromptTemplate& prompt_template(PromptId id) { return kTemplates[static_cast<std::size_t>(id)]; }

std::string render_prompt(const PromptTemplate& t, std::string_view context) {
  if (context.empty()) throw Error(ErrorKind::InvalidArgument, "cannot render a prompt for an empty context");
  std::string out;
  out.reserve(t.instruction.size() + context.size() + kTextLabel.size() + kQuestionsLabel.size());
  out.append(t.instruction).append(kTextLabel).append(context).append(kQuestionsLabel);
  return out;
}

std::optional<std::string> extract_context(std::string_view prompt) {
  const auto b = prompt.find(kTextLabel);
  if (b == std::string_view::npos || !prompt.ends_with(kQuestionsLabel)) return std::nullopt;
  const auto start = b + kTextLabel.size();
  const auto stop = prompt.size() - kQuestionsLabel.size();
  if (stop < start) return std::nullopt;
  return std::string(prompt.substr(start, stop - start));
}

ParsedQuestions parse_questions(std::string_view raw, std::size_t expected) {
  ParsedQuestions parsed;
  std::optional<unsigned long> next_number;
  auto push = [&](std::string_view item) {
    if (parsed.items.size() >= expected) return;
    std::string norm = normalize_item(item);
    if (!norm.empty()) parsed.items.push_back(std::move(norm));
  };

  std::size_t pos = 0;
  while (pos <= raw.size() && parsed.items.size() < expected) {
    auto nl = raw.find('\n', pos);
    if (nl == std::string_view::npos) nl = raw.size();
    const std::string_view line = text::trim(raw.substr(pos, nl - pos));
    pos = nl + 1;
    if (line.empty()) continue;

    const std::vector<Marker> markers = find_markers(line, next_number);
    if (!markers.empty()) {
      for (std::size_t m = 0; m < markers.size(); ++m) {
        const std::size_t stop = m + 1 < markers.size() ? markers[m + 1].begin : line.size();
        push(line.substr(markers[m].end, stop - markers[m].end));
      }
      continue;
    }
    if (line.starts_with("- ") || line.starts_with("* ") || line.starts_with("•")) {
      push(line.substr(line.starts_with("•") ? std::string_view("•").size() : 2));
      continue;
    }
    if (line.back() == '?') push(line);
  }

  if (parsed.items.empty()) throw Error(ErrorKind::NoQuestionsFound, "no question items in backend response");
  parsed.shortfall = parsed.items.size() < expected;
  return parsed;
}

}  // namespace qgen::promptgen
