#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "qgen/backend.hpp"
#include "qgen/config.hpp"
#include "qgen/error.hpp"
#include "qgen/eval.hpp"
#include "qgen/textstats.hpp"

namespace qgen {

enum class RunStatus {
  Complete,
  Partial,  // some cells failed (e.g. no parsable questions), run finished
  Aborted,  // a backend error stopped generation
};

std::string_view to_string(RunStatus s);
RunStatus parse_run_status(std::string_view s);

struct CellFailure {
  std::size_t context_id = 0;
  promptgen::PromptId prompt_id = promptgen::PromptId::A;
  std::string stage;
  std::string error;
};

struct CellInfo {
  std::size_t context_id = 0;
  promptgen::PromptId prompt_id = promptgen::PromptId::A;
  std::size_t questions = 0;
  bool shortfall = false;
  std::size_t retries = 0;
};

struct EvalRun {
  RunConfig config;
  std::string rng_algorithm;
  std::string backend_identity;
  std::string dataset_sha256;
  std::string vectors_sha256;
  std::vector<std::size_t> context_ids;

  // Ordered by (context_id, position of the prompt in config.prompts).
  std::vector<eval::PromptContextResult> results;
  std::vector<CellInfo> cells;
  std::vector<eval::PromptSummary> summaries;
  eval::MaxSeries max_series;  // empty unless the grid is complete

  std::optional<textstats::Histogram> lengths;
  std::optional<textstats::KeywordFrequency> keywords;

  RunStatus status = RunStatus::Complete;
  std::vector<CellFailure> failures;
  std::optional<std::string> abort_stage;
  std::optional<std::string> abort_error;
  std::optional<ErrorKind> abort_kind;

  std::string started_at;
  std::string finished_at;
  std::size_t total_latency_ms = 0;
  std::size_t max_latency_ms = 0;

  std::size_t record_count() const;
  std::size_t zero_vector_records() const;
  std::size_t shortfall_cells() const;
};

// Recomputes summaries and (for a complete grid) the max series from
// results. Used after generation and after loading a persisted run.
void aggregate(EvalRun& run);

// parse -> sample -> per (context, prompt): render, generate, parse
// questions, score -> aggregate. Generation runs with at most
// backend.max_in_flight requests in flight; scoring runs in parallel; all
// results are reassembled in (context, prompt, index) order. Data/config
// errors throw; backend errors stop generation and are reported through
// status == Aborted with whatever cells had completed.
EvalRun run_pipeline(const RunConfig& cfg);
EvalRun run_pipeline(const RunConfig& cfg, backend::GenerationBackend& backend);

std::string utc_timestamp();

}  // namespace qgen
