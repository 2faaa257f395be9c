#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

// SQuAD v1.1 loading, question/answer role reversal, context sampling and
// stride-overlapped chunking.
namespace qgen::corpus {

struct Answer {
  std::string text;
  // Offset into the context in Unicode scalar values.
  std::size_t answer_start = 0;

  bool operator==(const Answer&) const = default;
};

struct BaselineQuestion {
  std::string id;
  std::string question;
  std::vector<Answer> answers;  // never empty

  bool operator==(const BaselineQuestion&) const = default;
};

struct ContextRecord {
  std::size_t context_id = 0;  // load ordinal
  std::string title;
  std::string text;
  std::vector<BaselineQuestion> baselines;

  bool operator==(const ContextRecord&) const = default;
};

struct SquadDataset {
  std::string version;
  std::vector<ContextRecord> records;
  std::size_t example_count = 0;

  bool operator==(const SquadDataset&) const = default;
};

// Throws Error{MalformedJson | SchemaError | SpanError}. SchemaError messages
// carry the JSON path of the offending field; SpanError carries the qas id.
SquadDataset parse_squad(std::string_view raw);
SquadDataset parse_squad(std::istream& in);
SquadDataset load_squad_file(const std::filesystem::path& path);

// Inverse of parse_squad for the fields it keeps. Records are regrouped under
// their titles in order, so parse(serialize(ds)) == ds.
std::string serialize_squad(const SquadDataset& ds);

// A question/answer pair in reading-comprehension orientation.
struct QaExample {
  std::string context;
  std::string question;
  std::string answer;

  bool operator==(const QaExample&) const = default;
};

// The same pair with roles swapped: the answer becomes the input and the
// question becomes the generation target.
struct ReversedExample {
  std::string context;
  std::string input_answer;
  std::string target_question;

  bool operator==(const ReversedExample&) const = default;
};

ReversedExample reverse_example(const QaExample& ex);
QaExample restore_example(const ReversedExample& ex);

// One example per question using answers[0]; dataset order preserved.
std::vector<ReversedExample> reverse_dataset(const SquadDataset& ds);

// n distinct records drawn uniformly without replacement with a seeded
// xoshiro256** partial Fisher-Yates shuffle, returned sorted by context_id.
// Throws SampleTooLarge if n > |records|, InvalidArgument if n == 0.
std::vector<ContextRecord> sample_contexts(const SquadDataset& ds, std::size_t n, std::uint64_t seed);

struct Chunk {
  std::size_t start = 0;  // code-point offset
  std::size_t end = 0;    // exclusive
  std::string text;
  std::size_t token_begin = 0;
  std::size_t token_end = 0;  // exclusive
};

// Whitespace-token windows of at most max_len tokens. Consecutive windows
// overlap by exactly doc_stride tokens; when the next stride would run past
// the text, the final window is anchored to end at the last token (its
// overlap with the previous window may then exceed doc_stride).
// Throws InvalidChunkParams unless max_len > doc_stride.
std::vector<Chunk> chunk_context(std::string_view text, std::size_t max_len, std::size_t doc_stride);

// JSONL, one object per line.
void write_reversed_jsonl(std::ostream& out, const std::vector<ReversedExample>& examples);
std::vector<ReversedExample> read_reversed_jsonl(std::istream& in);
void write_chunks_jsonl(std::ostream& out, const std::vector<Chunk>& chunks);
std::vector<Chunk> read_chunks_jsonl(std::istream& in);

}  // namespace qgen::corpus
