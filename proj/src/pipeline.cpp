#include "qgen/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <ctime>
#include <fstream>
#include <mutex>
#include <thread>

#include "qgen/corpus.hpp"
#include "qgen/digest.hpp"
#include "qgen/rng.hpp"
#include "qgen/similarity.hpp"

namespace qgen {

namespace {

template <typename F>
auto in_stage(const char* stage, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    throw Error(e.kind(), std::string("stage ") + stage + ": " + e.what());
  }
}

bool is_backend_error(ErrorKind k) {
  return k == ErrorKind::BackendUnavailable || k == ErrorKind::BackendRejected || k == ErrorKind::Timeout;
}

// Runs body(i) for i in [0, n) on up to `workers` threads. Indices are handed
// out in increasing order; `stop` ends dispatch early.
template <typename Body>
void parallel_for(std::size_t n, std::size_t workers, const std::atomic<bool>& stop, Body body) {
  std::atomic<std::size_t> next{0};
  auto loop = [&] {
    for (;;) {
      if (stop.load()) return;
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      body(i);
    }
  };
  workers = std::max<std::size_t>(1, std::min(workers, n));
  std::vector<std::jthread> pool;
  pool.reserve(workers - 1);
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(loop);
  loop();
}

struct GenerationOutcome {
  bool ran = false;
  std::optional<promptgen::ParsedQuestions> parsed;
  std::size_t retries = 0;
  std::size_t latency_ms = 0;
  std::optional<ErrorKind> error_kind;
  std::string stage;
  std::string error;
};

}  // namespace

std::string_view to_string(RunStatus s) {
  switch (s) {
    case RunStatus::Complete: return "complete";
    case RunStatus::Partial: return "partial";
    case RunStatus::Aborted: return "aborted";
  }
  return "unknown";
}

RunStatus parse_run_status(std::string_view s) {
  if (s == "complete") return RunStatus::Complete;
  if (s == "partial") return RunStatus::Partial;
  if (s == "aborted") return RunStatus::Aborted;
  throw Error(ErrorKind::SchemaError, "unknown run status \"" + std::string(s) + "\"");
}

std::size_t EvalRun::record_count() const {
  std::size_t n = 0;
  for (const auto& r : results) n += r.records.size();
  return n;
}

std::size_t EvalRun::zero_vector_records() const {
  std::size_t n = 0;
  for (const auto& r : results) {
    n += static_cast<std::size_t>(
        std::count_if(r.records.begin(), r.records.end(), [](const auto& rec) { return rec.zero_vector_flag; }));
  }
  return n;
}

std::size_t EvalRun::shortfall_cells() const {
  return static_cast<std::size_t>(std::count_if(cells.begin(), cells.end(), [](const CellInfo& c) { return c.shortfall; }));
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void aggregate(EvalRun& run) {
  run.summaries.clear();
  for (promptgen::PromptId p : run.config.prompts) {
    run.summaries.push_back(eval::summarize_prompt(p, run.results, run.config.threshold, run.config.match_rule));
  }
  run.max_series.clear();
  if (run.status == RunStatus::Complete) {
    run.max_series = eval::build_max_series(run.results, run.context_ids, run.config.prompts);
  }
}

EvalRun run_pipeline(const RunConfig& cfg) {
  validate(cfg);
  const auto backend = make_backend(cfg);
  return run_pipeline(cfg, *backend);
}

EvalRun run_pipeline(const RunConfig& cfg, backend::GenerationBackend& backend) {
  validate(cfg);
  EvalRun run;
  run.config = cfg;
  run.started_at = utc_timestamp();
  run.rng_algorithm = std::string(Xoshiro256StarStar::kAlgorithmName);
  run.backend_identity = backend.identity();

  const corpus::SquadDataset dataset = in_stage("load_dataset", [&] { return corpus::load_squad_file(cfg.dataset); });
  run.dataset_sha256 = sha256_file(cfg.dataset);
  const similarity::EmbeddingTable table =
      in_stage("load_vectors", [&] { return similarity::load_vectors_file(cfg.vectors); });
  run.vectors_sha256 = sha256_file(cfg.vectors);

  in_stage("textstats", [&] {
    textstats::StopwordSet stopwords;
    if (cfg.stopwords) {
      std::ifstream in(*cfg.stopwords);
      if (!in) throw Error(ErrorKind::IoError, "cannot open " + cfg.stopwords->string());
      stopwords = textstats::parse_stopwords(in);
    } else {
      stopwords = textstats::bundled_stopwords();
    }
    std::vector<std::string> questions;
    questions.reserve(dataset.example_count);
    for (const auto& rec : dataset.records) {
      for (const auto& q : rec.baselines) questions.push_back(q.question);
    }
    if (questions.empty()) return 0;
    run.lengths = textstats::question_length_histogram(questions, cfg.histogram_bin_width);
    try {
      run.keywords = textstats::frequent_words(questions, stopwords, cfg.top_k_keywords);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::EmptyInput) throw;
    }
    return 0;
  });

  const std::vector<corpus::ContextRecord> sampled =
      in_stage("sample_contexts", [&] { return corpus::sample_contexts(dataset, cfg.sample_size, cfg.seed); });
  for (const auto& c : sampled) run.context_ids.push_back(c.context_id);

  // Generation: one task per (context, prompt), bounded concurrency.
  const std::size_t n_prompts = cfg.prompts.size();
  const std::size_t n_tasks = sampled.size() * n_prompts;
  const promptgen::GenerationConfig gen = cfg.generation();
  std::vector<GenerationOutcome> outcomes(n_tasks);
  std::atomic<bool> stop{false};
  parallel_for(n_tasks, cfg.backend.max_in_flight, stop, [&](std::size_t i) {
    const corpus::ContextRecord& ctx = sampled[i / n_prompts];
    const promptgen::PromptId pid = cfg.prompts[i % n_prompts];
    GenerationOutcome& out = outcomes[i];
    out.ran = true;
    out.stage = "generate";
    try {
      const std::string prompt = promptgen::render_prompt(promptgen::prompt_template(pid), ctx.text);
      const backend::BackendResponse resp = backend::generate(backend, prompt, gen);
      out.retries = resp.retries;
      out.latency_ms = static_cast<std::size_t>(resp.latency.count());
      out.stage = "parse_questions";
      out.parsed = promptgen::parse_questions(resp.text, gen.questions_per_prompt);
    } catch (const Error& e) {
      out.error_kind = e.kind();
      out.error = e.what();
      if (is_backend_error(e.kind())) stop = true;
    } catch (const std::exception& e) {
      out.error_kind = ErrorKind::BackendUnavailable;
      out.error = e.what();
      stop = true;
    }
  });

  for (std::size_t i = 0; i < n_tasks; ++i) {
    const GenerationOutcome& out = outcomes[i];
    if (out.error_kind && is_backend_error(*out.error_kind) && !run.abort_error) {
      run.abort_stage = out.stage;
      run.abort_error = out.error;
      run.abort_kind = out.error_kind;
    }
  }

  // Scoring: pure per cell, parallel; results land in their task slot.
  std::vector<eval::ScoredBaselines> baselines;
  baselines.reserve(sampled.size());
  for (const auto& c : sampled) baselines.push_back(eval::prepare_baselines(c.baselines, table));

  std::vector<std::optional<eval::PromptContextResult>> scored(n_tasks);
  const std::size_t scoring_threads =
      cfg.scoring_threads ? cfg.scoring_threads : std::max(1u, std::thread::hardware_concurrency());
  const std::atomic<bool> never{false};
  parallel_for(n_tasks, scoring_threads, never, [&](std::size_t i) {
    const GenerationOutcome& out = outcomes[i];
    if (!out.parsed) return;
    const corpus::ContextRecord& ctx = sampled[i / n_prompts];
    eval::PromptContextResult r;
    r.context_id = ctx.context_id;
    r.prompt_id = cfg.prompts[i % n_prompts];
    r.shortfall = out.parsed->shortfall;
    for (std::size_t k = 0; k < out.parsed->items.size(); ++k) {
      const promptgen::GeneratedQuestion g{ctx.context_id, r.prompt_id, k, out.parsed->items[k]};
      r.records.push_back(eval::score_question(g, baselines[i / n_prompts], table));
    }
    r.prompt_max = eval::prompt_max(r.records);
    scored[i] = std::move(r);
  });

  for (std::size_t i = 0; i < n_tasks; ++i) {
    const GenerationOutcome& out = outcomes[i];
    const std::size_t context_id = sampled[i / n_prompts].context_id;
    const promptgen::PromptId pid = cfg.prompts[i % n_prompts];
    run.total_latency_ms += out.latency_ms;
    run.max_latency_ms = std::max(run.max_latency_ms, out.latency_ms);
    if (scored[i]) {
      run.cells.push_back({context_id, pid, scored[i]->records.size(), scored[i]->shortfall, out.retries});
      run.results.push_back(std::move(*scored[i]));
    } else if (out.ran && out.error_kind && !is_backend_error(*out.error_kind)) {
      run.failures.push_back({context_id, pid, out.stage, out.error});
    }
  }

  if (run.abort_error) {
    run.status = RunStatus::Aborted;
  } else if (!run.failures.empty()) {
    run.status = RunStatus::Partial;
  }
  aggregate(run);
  run.finished_at = utc_timestamp();
  return run;
}

}  // namespace qgen
