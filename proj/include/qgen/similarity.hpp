#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "qgen/text.hpp"

// Word-vector table and mean-pooled sentence similarity: a sentence vector is
// the arithmetic mean of its in-vocabulary token vectors, and two sentences
// are compared by the cosine of their sentence vectors.
namespace qgen::similarity {

using text::tokenize;

struct LoadOptions {
  // Tokens are lowercased on load. A raw token that only collides with an
  // earlier one after lowercasing is skipped (first wins); a raw token that
  // repeats exactly is a DuplicateToken error.
  bool lowercase = true;
};

// Immutable after load; components stored as float, all arithmetic on them is
// done in double.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  explicit EmbeddingTable(std::size_t dim);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return index_.size(); }
  std::size_t skipped_case_variants() const noexcept { return skipped_case_variants_; }

  // Empty span if token is out of vocabulary.
  std::span<const float> find(std::string_view token) const;
  bool contains(std::string_view token) const { return !find(token).empty(); }

  // Throws DuplicateToken or DimensionMismatch.
  void add(std::string token, std::span<const float> values);

 private:
  friend EmbeddingTable load_vectors(std::istream&, const LoadOptions&);

  std::size_t dim_ = 0;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<float> values_;
  std::size_t skipped_case_variants_ = 0;
};

// GloVe-style "token v1 ... vd" lines, optionally preceded by a word2vec
// "count dim" header. Errors name the 1-based line number:
// DimensionMismatch, BadFloat, DuplicateToken, EmptyInput.
EmbeddingTable load_vectors(std::istream& in, const LoadOptions& options = {});
EmbeddingTable load_vectors_file(const std::filesystem::path& path, const LoadOptions& options = {});

struct SentenceVector {
  std::vector<double> values;
  std::size_t covered = 0;  // in-vocabulary tokens
  std::size_t total = 0;

  double norm() const;
  bool is_zero() const { return norm() == 0.0; }
};

// Sum in token order, then divide by the covered count. All-OOV input gives
// the zero vector.
SentenceVector sentence_vector(std::span<const std::string> tokens, const EmbeddingTable& table);
SentenceVector sentence_vector(std::string_view sentence, const EmbeddingTable& table);

// Clamped to [-1, 1]; 0.0 when either vector has zero norm. Symmetric
// bit-for-bit. Throws DimensionMismatch.
double cosine_similarity(const SentenceVector& a, const SentenceVector& b);

}  // namespace qgen::similarity
