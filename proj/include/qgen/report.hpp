#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qgen/pipeline.hpp"

// On-disk layout of a run directory:
//   manifest.json     config snapshot, digests, backend identity, sampled
//                     contexts, per-cell info, status and timestamps
//   scores.jsonl      one ScoreRecord per line
//   table.csv         context_id,prompt,question,question_max,prompt_max
//   textstats.json    question-length histogram and keyword counts
//   fig1_lengths.csv, fig2_keywords.csv, fig6_boxplot.csv,
//   fig7_matches.csv, fig8_max_series.csv, report.md
// Everything except the "timestamps" and "timing" members of manifest.json
// is a pure function of the run's inputs.
namespace qgen::report {

inline constexpr int kFormatVersion = 1;

nlohmann::json manifest_json(const EvalRun& run);
nlohmann::json score_record_json(const eval::ScoreRecord& rec);
eval::ScoreRecord score_record_from_json(const nlohmann::json& j);

// Writes every file listed above. Throws IoError.
void write_run(const EvalRun& run, const std::filesystem::path& dir);

// Reads manifest.json, scores.jsonl and textstats.json and re-aggregates.
// Throws IoError / MalformedJson / SchemaError.
EvalRun load_run(const std::filesystem::path& dir);

// Figure data and report.md. Returns the paths written.
std::vector<std::filesystem::path> emit_figures(const EvalRun& run, const std::filesystem::path& dir);

// Written when a run dies before any result exists.
void write_failure_manifest(const RunConfig& cfg, const std::filesystem::path& dir, const std::string& stage,
                            const std::string& error);

void write_stats_figures(const textstats::Histogram& lengths, const std::optional<textstats::KeywordFrequency>& keywords,
                         const std::filesystem::path& dir);

std::string render_report_markdown(const EvalRun& run);

}  // namespace qgen::report
