#include "qgen/eval.hpp"

#include <algorithm>
#include <set>

#include "qgen/error.hpp"
#include "qgen/stats.hpp"

namespace qgen::eval {

ScoredBaselines prepare_baselines(std::span<const corpus::BaselineQuestion> baselines,
                                  const similarity::EmbeddingTable& table) {
  ScoredBaselines out;
  out.ids.reserve(baselines.size());
  out.vectors.reserve(baselines.size());
  for (const corpus::BaselineQuestion& b : baselines) {
    out.ids.push_back(b.id);
    out.vectors.push_back(similarity::sentence_vector(b.question, table));
  }
  return out;
}

ScoreRecord score_question(const GeneratedQuestion& g, const ScoredBaselines& baselines,
                           const similarity::EmbeddingTable& table) {
  if (baselines.ids.empty()) {
    throw Error(ErrorKind::InvalidArgument, "context " + std::to_string(g.context_id) + " has no baseline questions");
  }
  ScoreRecord rec;
  rec.generated = g;
  const similarity::SentenceVector gv = similarity::sentence_vector(g.text, table);
  const bool generated_zero = gv.is_zero();
  rec.per_baseline.reserve(baselines.ids.size());
  for (std::size_t i = 0; i < baselines.ids.size(); ++i) {
    const double s = similarity::cosine_similarity(gv, baselines.vectors[i]);
    rec.per_baseline.emplace_back(baselines.ids[i], s);
    if (generated_zero || baselines.vectors[i].is_zero()) rec.zero_vector_flag = true;
    if (i == 0 || s > rec.question_max) rec.question_max = s;
  }
  return rec;
}

ScoreRecord score_question(const GeneratedQuestion& g, std::span<const corpus::BaselineQuestion> baselines,
                           const similarity::EmbeddingTable& table) {
  return score_question(g, prepare_baselines(baselines, table), table);
}

double prompt_max(std::span<const ScoreRecord> records) {
  if (records.empty()) throw Error(ErrorKind::EmptyRecords, "prompt max of zero records");
  double best = records.front().question_max;
  for (const ScoreRecord& r : records.subspan(1)) best = std::max(best, r.question_max);
  return best;
}

std::size_t count_matches(std::span<const ScoreRecord> records, double threshold, MatchRule rule) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "match threshold must lie in [0, 1]");
  }
  return static_cast<std::size_t>(std::count_if(records.begin(), records.end(), [&](const ScoreRecord& r) {
    return rule == MatchRule::Strict ? r.question_max > threshold : r.question_max >= threshold;
  }));
}

BoxStats summarize(std::span<const double> scores) {
  if (scores.empty()) throw Error(ErrorKind::EmptyInput, "cannot summarize an empty score list");
  BoxStats s;
  s.n = scores.size();
  double sum = 0.0;
  for (double v : scores) sum += v;
  s.mean = sum / static_cast<double>(s.n);

  std::vector<double> sorted(scores.begin(), scores.end());
  std::sort(sorted.begin(), sorted.end());
  const stats::TukeyFences fences = stats::tukey_fences(sorted);
  s.q1 = fences.q1;
  s.q3 = fences.q3;
  s.median = stats::quantile_linear(sorted, 0.5);

  const auto lo = std::lower_bound(sorted.begin(), sorted.end(), fences.lo);
  const auto hi = std::upper_bound(sorted.begin(), sorted.end(), fences.hi);
  // q1 and q3 lie inside the fences, so [lo, hi) is never empty.
  s.whisker_lo = *lo;
  s.whisker_hi = *(hi - 1);
  s.outliers.assign(sorted.begin(), lo);
  s.outliers.insert(s.outliers.end(), hi, sorted.end());
  return s;
}

PromptSummary summarize_prompt(PromptId prompt, std::span<const PromptContextResult> results, double threshold,
                               MatchRule rule) {
  PromptSummary out;
  out.prompt_id = prompt;
  std::vector<double> scores;
  for (const PromptContextResult& r : results) {
    if (r.prompt_id != prompt) continue;
    for (const ScoreRecord& rec : r.records) scores.push_back(rec.question_max);
    out.match_count += count_matches(r.records, threshold, rule);
  }
  out.n_questions = scores.size();
  if (!scores.empty()) out.stats = summarize(scores);
  return out;
}

MaxSeries build_max_series(std::span<const PromptContextResult> results, std::span<const std::size_t> context_ids,
                           std::span<const PromptId> prompts) {
  std::map<std::pair<std::size_t, PromptId>, double> cells;
  const std::set<std::size_t> contexts(context_ids.begin(), context_ids.end());
  const std::set<PromptId> prompt_set(prompts.begin(), prompts.end());
  for (const PromptContextResult& r : results) {
    const std::string name = "(context " + std::to_string(r.context_id) + ", prompt " +
                             std::string(promptgen::to_string(r.prompt_id)) + ")";
    if (!contexts.contains(r.context_id) || !prompt_set.contains(r.prompt_id)) {
      throw Error(ErrorKind::InvalidArgument, "result " + name + " lies outside the sampled grid");
    }
    if (!cells.emplace(std::make_pair(r.context_id, r.prompt_id), r.prompt_max).second) {
      throw Error(ErrorKind::InvalidArgument, "duplicate result for " + name);
    }
  }

  MaxSeries series;
  for (PromptId p : prompts) {
    auto& s = series[p];
    for (std::size_t c : contexts) {
      const auto it = cells.find({c, p});
      if (it == cells.end()) {
        throw Error(ErrorKind::MissingCell, "no result for (context " + std::to_string(c) + ", prompt " +
                                                std::string(promptgen::to_string(p)) + ")");
      }
      s.emplace_back(c, it->second);
    }
  }
  return series;
}

}  // namespace qgen::eval
