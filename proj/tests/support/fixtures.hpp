#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "qgen/eval.hpp"
#include "qgen/similarity.hpp"

namespace qgen::testing {

// mkdtemp-backed directory removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& contents);

// A SQuAD v1.1 document with `contexts` paragraphs of generated prose (some
// with non-ASCII names), each carrying `questions_per_context` questions
// whose answers are valid spans under code-point indexing.
std::string synthetic_squad_json(std::size_t contexts, std::size_t questions_per_context, std::uint64_t seed);

// Every token of every context and question in `squad_json`, plus the words
// the mock backend uses to phrase questions, each mapped to a seeded random
// vector. GloVe text format, no header.
std::string synthetic_vectors_for(const std::string& squad_json, std::size_t dim, std::uint64_t seed);

// Random vectors in [-1, 1] for the given tokens.
similarity::EmbeddingTable random_table(const std::vector<std::string>& tokens, std::size_t dim, std::uint64_t seed);

// Per-question maxima for the worked Beyoncé example (one context, five
// generated questions per prompt) and the prompt maxima they imply.
struct WorkedExampleRow {
  promptgen::PromptId prompt;
  std::vector<double> question_maxes;
  double prompt_max;
};
const std::vector<WorkedExampleRow>& worked_example();

// Records carrying only the given question maxima.
std::vector<eval::ScoreRecord> records_with_maxes(const std::vector<double>& maxes);

// Mean-pooled cosine recomputed from scratch in long double.
long double oracle_similarity(const std::string& a, const std::string& b, const similarity::EmbeddingTable& table);

// Naive box statistics: sort, interpolate by hand, scan for whiskers.
eval::BoxStats oracle_box_stats(std::vector<double> v);

}  // namespace qgen::testing
