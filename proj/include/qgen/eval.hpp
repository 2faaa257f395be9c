#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qgen/corpus.hpp"
#include "qgen/promptgen.hpp"
#include "qgen/similarity.hpp"

// Scoring of generated questions against a context's baseline questions and
// every aggregate built on top: question max, prompt max, match counts,
// box-plot statistics and the per-context max series.
namespace qgen::eval {

using promptgen::GeneratedQuestion;
using promptgen::PromptId;

struct ScoreRecord {
  GeneratedQuestion generated;
  std::vector<std::pair<std::string, double>> per_baseline;  // (baseline id, score), baseline order
  double question_max = 0.0;
  bool zero_vector_flag = false;
};

struct PromptContextResult {
  std::size_t context_id = 0;
  PromptId prompt_id = PromptId::A;
  std::vector<ScoreRecord> records;
  double prompt_max = 0.0;
  bool shortfall = false;
};

// Baselines with their sentence vectors computed once per context.
struct ScoredBaselines {
  std::vector<std::string> ids;
  std::vector<similarity::SentenceVector> vectors;
};

ScoredBaselines prepare_baselines(std::span<const corpus::BaselineQuestion> baselines,
                                  const similarity::EmbeddingTable& table);

// Throws InvalidArgument when there are no baselines.
ScoreRecord score_question(const GeneratedQuestion& g, const ScoredBaselines& baselines,
                           const similarity::EmbeddingTable& table);
ScoreRecord score_question(const GeneratedQuestion& g, std::span<const corpus::BaselineQuestion> baselines,
                           const similarity::EmbeddingTable& table);

// Throws EmptyRecords.
double prompt_max(std::span<const ScoreRecord> records);

enum class MatchRule {
  Strict,     // question_max >  threshold
  Inclusive,  // question_max >= threshold
};

std::size_t count_matches(std::span<const ScoreRecord> records, double threshold,
                          MatchRule rule = MatchRule::Strict);

struct BoxStats {
  std::size_t n = 0;
  double mean = 0.0;
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
  double whisker_lo = 0.0;
  double whisker_hi = 0.0;
  std::vector<double> outliers;  // ascending
};

// Linear-interpolation quartiles; whiskers at the most extreme points inside
// the 1.5 IQR fences; everything beyond them is an outlier. Throws EmptyInput.
BoxStats summarize(std::span<const double> scores);

struct PromptSummary {
  PromptId prompt_id = PromptId::A;
  std::size_t n_questions = 0;
  BoxStats stats;
  std::size_t match_count = 0;
};

PromptSummary summarize_prompt(PromptId prompt, std::span<const PromptContextResult> results, double threshold,
                               MatchRule rule);

using MaxSeries = std::map<PromptId, std::vector<std::pair<std::size_t, double>>>;

// One (context_id, prompt_max) series per prompt, ordered by context_id.
// Throws MissingCell naming the first absent (context, prompt) pair, and
// InvalidArgument on a duplicated cell or a result outside the grid.
MaxSeries build_max_series(std::span<const PromptContextResult> results, std::span<const std::size_t> context_ids,
                           std::span<const PromptId> prompts);

}  // namespace qgen::eval
