// qgen: question-generation evaluation harness.
//
//   qgen run    --config <file> [--seed N --backend mock|http --threshold X --sample-size N --out DIR]
//   qgen stats  --dataset <squad.json> --out DIR [--stopwords FILE --bin-width N --top-k N]
//   qgen report --run DIR
//
// Exit codes: 0 success, 1 config error, 2 data error, 3 backend error,
// 4 partial completion.

#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "qgen/config.hpp"
#include "qgen/corpus.hpp"
#include "qgen/error.hpp"
#include "qgen/pipeline.hpp"
#include "qgen/report.hpp"
#include "qgen/textstats.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitData = 2;
constexpr int kExitBackend = 3;
constexpr int kExitPartial = 4;

int exit_code_for(qgen::ErrorKind kind) {
  using qgen::ErrorKind;
  switch (kind) {
    case ErrorKind::ConfigError:
    case ErrorKind::InvalidArgument:
      return kExitConfig;
    case ErrorKind::BackendUnavailable:
    case ErrorKind::BackendRejected:
    case ErrorKind::Timeout:
      return kExitBackend;
    default:
      return kExitData;
  }
}

struct RunOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> backend;
  std::optional<double> threshold;
  std::optional<std::size_t> sample_size;
  std::optional<std::string> out;
};

int cmd_run(const RunOptions& opt) {
  qgen::RunConfig cfg;
  try {
    cfg = qgen::load_config(opt.config);
    qgen::apply_env_overrides(cfg, qgen::process_env());
    if (opt.seed) cfg.seed = *opt.seed;
    if (opt.backend) cfg.backend.kind = *opt.backend == "http" ? qgen::BackendKind::Http : qgen::BackendKind::Mock;
    if (opt.threshold) cfg.threshold = *opt.threshold;
    if (opt.sample_size) cfg.sample_size = *opt.sample_size;
    if (opt.out) cfg.out_dir = *opt.out;
    qgen::validate(cfg);
  } catch (const qgen::Error& e) {
    std::cerr << "qgen: " << e.what() << '\n';
    return kExitConfig;
  }

  qgen::EvalRun run;
  try {
    run = qgen::run_pipeline(cfg);
  } catch (const qgen::Error& e) {
    std::cerr << "qgen: " << e.what() << '\n';
    try {
      qgen::report::write_failure_manifest(cfg, cfg.out_dir, "run", e.what());
    } catch (const qgen::Error& io) {
      std::cerr << "qgen: " << io.what() << '\n';
    }
    return exit_code_for(e.kind());
  }

  try {
    qgen::report::write_run(run, cfg.out_dir);
  } catch (const qgen::Error& e) {
    std::cerr << "qgen: " << e.what() << '\n';
    return kExitData;
  }

  std::cout << "run " << qgen::to_string(run.status) << ": " << run.record_count() << " scored questions over "
            << run.context_ids.size() << " contexts -> " << cfg.out_dir.string() << '\n';
  for (const auto& s : run.summaries) {
    std::cout << "  prompt " << qgen::promptgen::to_string(s.prompt_id) << ": " << s.n_questions << " questions, "
              << s.match_count << " matches\n";
  }
  switch (run.status) {
    case qgen::RunStatus::Complete: return kExitOk;
    case qgen::RunStatus::Partial: return kExitPartial;
    case qgen::RunStatus::Aborted:
      std::cerr << "qgen: " << run.abort_error.value_or("aborted") << '\n';
      return run.results.empty() ? kExitBackend : kExitPartial;
  }
  return kExitOk;
}

int cmd_stats(const std::string& dataset, const std::string& out, const std::optional<std::string>& stopwords_path,
              std::size_t bin_width, std::size_t top_k) {
  try {
    qgen::textstats::StopwordSet stopwords = qgen::textstats::bundled_stopwords();
    if (stopwords_path) {
      std::ifstream in(*stopwords_path);
      if (!in) throw qgen::Error(qgen::ErrorKind::ConfigError, "cannot open stopword file " + *stopwords_path);
      stopwords = qgen::textstats::parse_stopwords(in);
    }
    const auto ds = qgen::corpus::load_squad_file(dataset);
    std::vector<std::string> questions;
    questions.reserve(ds.example_count);
    for (const auto& rec : ds.records) {
      for (const auto& q : rec.baselines) questions.push_back(q.question);
    }
    const auto hist = qgen::textstats::question_length_histogram(questions, bin_width);
    std::optional<qgen::textstats::KeywordFrequency> keywords;
    try {
      keywords = qgen::textstats::frequent_words(questions, stopwords, top_k);
    } catch (const qgen::Error& e) {
      if (e.kind() != qgen::ErrorKind::EmptyInput) throw;
    }
    qgen::report::write_stats_figures(hist, keywords, out);
    std::cout << ds.example_count << " questions in " << ds.records.size() << " contexts; "
              << hist.excluded_outliers << " length outliers excluded -> " << out << '\n';
    return kExitOk;
  } catch (const qgen::Error& e) {
    std::cerr << "qgen: " << e.what() << '\n';
    return exit_code_for(e.kind());
  }
}

int cmd_report(const std::string& dir) {
  try {
    const qgen::EvalRun run = qgen::report::load_run(dir);
    for (const auto& p : qgen::report::emit_figures(run, dir)) std::cout << p.string() << '\n';
    return kExitOk;
  } catch (const qgen::Error& e) {
    std::cerr << "qgen: " << e.what() << '\n';
    return exit_code_for(e.kind());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Question-generation evaluation harness"};
  app.require_subcommand(1);

  RunOptions run_opt;
  auto* run = app.add_subcommand("run", "Generate, score and aggregate questions for sampled contexts");
  run->add_option("--config", run_opt.config, "JSON run configuration (a run manifest also works)")->required();
  run->add_option("--seed", run_opt.seed, "Sampling and mock-backend seed");
  run->add_option("--backend", run_opt.backend, "Backend kind")->check(CLI::IsMember({"mock", "http"}));
  run->add_option("--threshold", run_opt.threshold, "Match threshold")->check(CLI::Range(0.0, 1.0));
  run->add_option("--sample-size", run_opt.sample_size, "Number of contexts to sample");
  run->add_option("--out", run_opt.out, "Output directory");

  std::string dataset;
  std::string stats_out;
  std::optional<std::string> stopwords;
  std::size_t bin_width = 1;
  std::size_t top_k = 25;
  auto* stats = app.add_subcommand("stats", "Question-length histogram and keyword counts for a dataset");
  stats->add_option("--dataset", dataset, "SQuAD v1.1 JSON file")->required();
  stats->add_option("--out", stats_out, "Output directory")->required();
  stats->add_option("--stopwords", stopwords, "Stopword list (default: bundled English list)");
  stats->add_option("--bin-width", bin_width, "Histogram bin width in tokens")->check(CLI::PositiveNumber);
  stats->add_option("--top-k", top_k, "Number of keywords to keep")->check(CLI::PositiveNumber);

  std::string run_dir;
  auto* report = app.add_subcommand("report", "Re-emit figure data and report.md from a run directory");
  report->add_option("--run", run_dir, "Run directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  if (*run) return cmd_run(run_opt);
  if (*stats) return cmd_stats(dataset, stats_out, stopwords, bin_width, top_k);
  return cmd_report(run_dir);
}
