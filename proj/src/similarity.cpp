#include "qgen/similarity.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <unordered_set>

#include "qgen/error.hpp"

namespace qgen::similarity {

EmbeddingTable::EmbeddingTable(std::size_t dim) : dim_(dim) {
  if (dim == 0) throw Error(ErrorKind::InvalidArgument, "embedding dimension must be positive");
}

std::span<const float> EmbeddingTable::find(std::string_view token) const {
  // Heterogeneous lookup on unordered_map needs C++20 library support that
  // libstdc++ 11 lacks, hence the temporary.
  const auto it = index_.find(std::string(token));
  if (it == index_.end()) return {};
  return {values_.data() + it->second * dim_, dim_};
}

void EmbeddingTable::add(std::string token, std::span<const float> values) {
  if (values.size() != dim_) {
    throw Error(ErrorKind::DimensionMismatch, "token \"" + token + "\" has " + std::to_string(values.size()) +
                                                  " components, expected " + std::to_string(dim_));
  }
  if (token.empty()) throw Error(ErrorKind::InvalidArgument, "empty token");
  const std::size_t slot = index_.size();
  if (!index_.emplace(token, slot).second) {
    throw Error(ErrorKind::DuplicateToken, "token \"" + token + "\" already present");
  }
  values_.insert(values_.end(), values.begin(), values.end());
}

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    if (i == line.size()) break;
    const std::size_t b = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
    fields.push_back(line.substr(b, i - b));
  }
  return fields;
}

bool is_unsigned_integer(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

std::string at_line(std::size_t lineno) { return "line " + std::to_string(lineno) + ": "; }

}  // namespace

EmbeddingTable load_vectors(std::istream& in, const LoadOptions& options) {
  EmbeddingTable table;
  std::unordered_set<std::string> raw_seen;
  std::vector<float> components;
  std::string line;
  std::size_t lineno = 0;
  bool first = true;

  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::vector<std::string_view> fields = split_fields(line);
    if (fields.empty()) continue;

    if (first) {
      first = false;
      if (fields.size() == 2 && is_unsigned_integer(fields[0]) && is_unsigned_integer(fields[1])) {
        std::size_t dim = 0;
        std::from_chars(fields[1].data(), fields[1].data() + fields[1].size(), dim);
        if (dim == 0) throw Error(ErrorKind::DimensionMismatch, at_line(lineno) + "header declares dimension 0");
        table.dim_ = dim;
        continue;
      }
      if (fields.size() < 2) throw Error(ErrorKind::DimensionMismatch, at_line(lineno) + "vector has no components");
      table.dim_ = fields.size() - 1;
    }

    if (fields.size() - 1 != table.dim_) {
      throw Error(ErrorKind::DimensionMismatch, at_line(lineno) + "expected " + std::to_string(table.dim_) +
                                                    " components, found " + std::to_string(fields.size() - 1));
    }
    components.resize(table.dim_);
    for (std::size_t k = 0; k < table.dim_; ++k) {
      const std::string_view f = fields[k + 1];
      float v = 0.0f;
      const auto res = std::from_chars(f.data(), f.data() + f.size(), v);
      if (res.ec != std::errc{} || res.ptr != f.data() + f.size() || !std::isfinite(v)) {
        throw Error(ErrorKind::BadFloat, at_line(lineno) + "cannot parse component \"" + std::string(f) + "\"");
      }
      components[k] = v;
    }

    std::string raw(fields[0]);
    if (!raw_seen.insert(raw).second) {
      throw Error(ErrorKind::DuplicateToken, at_line(lineno) + "token \"" + raw + "\" repeated");
    }
    std::string token = options.lowercase ? text::to_lower(raw) : std::move(raw);
    if (table.index_.contains(token)) {
      ++table.skipped_case_variants_;
      continue;
    }
    table.add(std::move(token), components);
  }
  if (table.dim_ == 0) throw Error(ErrorKind::EmptyInput, "vector file contains no vectors");
  return table;
}

EmbeddingTable load_vectors_file(const std::filesystem::path& path, const LoadOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open vector file " + path.string());
  return load_vectors(in, options);
}

double SentenceVector::norm() const {
  double sq = 0.0;
  for (double v : values) sq += v * v;
  return std::sqrt(sq);
}

SentenceVector sentence_vector(std::span<const std::string> tokens, const EmbeddingTable& table) {
  SentenceVector sv;
  sv.values.assign(table.dim(), 0.0);
  sv.total = tokens.size();
  for (const std::string& tok : tokens) {
    const std::span<const float> vec = table.find(tok);
    if (vec.empty()) continue;
    ++sv.covered;
    for (std::size_t k = 0; k < vec.size(); ++k) sv.values[k] += static_cast<double>(vec[k]);
  }
  if (sv.covered > 0) {
    const auto n = static_cast<double>(sv.covered);
    for (double& v : sv.values) v /= n;
  }
  return sv;
}

SentenceVector sentence_vector(std::string_view sentence, const EmbeddingTable& table) {
  const std::vector<std::string> tokens = tokenize(sentence);
  return sentence_vector(tokens, table);
}

double cosine_similarity(const SentenceVector& a, const SentenceVector& b) {
  if (a.values.size() != b.values.size()) {
    throw Error(ErrorKind::DimensionMismatch, "sentence vectors of dimension " + std::to_string(a.values.size()) +
                                                  " and " + std::to_string(b.values.size()));
  }
  double dot = 0.0;
  for (std::size_t k = 0; k < a.values.size(); ++k) dot += a.values[k] * b.values[k];
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(dot / (na * nb), -1.0, 1.0);
}

}  // namespace qgen::similarity
