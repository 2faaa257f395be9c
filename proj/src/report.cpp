#include "qgen/report.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "qgen/error.hpp"
#include "qgen/stats.hpp"
#include "qgen/text.hpp"

namespace qgen::report {

using nlohmann::json;
namespace fs = std::filesystem;
using promptgen::PromptId;

namespace {

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  return out;
}

void close_out(std::ofstream& out, const fs::path& path) {
  out.close();
  if (!out) throw Error(ErrorKind::IoError, "failed writing " + path.string());
}

json read_json(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::MalformedJson, path.string() + ": " + e.what());
  }
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::IoError, "cannot create " + dir.string() + ": " + ec.message());
}

std::string fixed4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

json histogram_json(const textstats::Histogram& h) {
  return {{"length_unit", h.length_unit},
          {"bin_edges", h.bin_edges},
          {"counts", h.counts},
          {"excluded_outliers", h.excluded_outliers}};
}

json textstats_json(const EvalRun& run) {
  json j{{"lengths", nullptr}, {"keywords", nullptr}};
  if (run.lengths) j["lengths"] = histogram_json(*run.lengths);
  if (run.keywords) {
    json entries = json::array();
    for (const auto& [tok, count] : run.keywords->entries) entries.push_back({tok, count});
    j["keywords"] = std::move(entries);
  }
  return j;
}

const eval::PromptContextResult* find_cell(const EvalRun& run, std::size_t context_id, PromptId p) {
  for (const auto& r : run.results) {
    if (r.context_id == context_id && r.prompt_id == p) return &r;
  }
  return nullptr;
}

}  // namespace

json score_record_json(const eval::ScoreRecord& rec) {
  json per = json::array();
  for (const auto& [id, score] : rec.per_baseline) per.push_back({{"id", id}, {"score", score}});
  return {{"context_id", rec.generated.context_id},
          {"prompt", promptgen::to_string(rec.generated.prompt_id)},
          {"index", rec.generated.index},
          {"question", rec.generated.text},
          {"per_baseline", std::move(per)},
          {"question_max", rec.question_max},
          {"zero_vector_flag", rec.zero_vector_flag}};
}

eval::ScoreRecord score_record_from_json(const json& j) {
  try {
    eval::ScoreRecord rec;
    rec.generated.context_id = j.at("context_id").get<std::size_t>();
    rec.generated.prompt_id = promptgen::parse_prompt_id(j.at("prompt").get<std::string>());
    rec.generated.index = j.at("index").get<std::size_t>();
    rec.generated.text = j.at("question").get<std::string>();
    for (const json& b : j.at("per_baseline")) {
      rec.per_baseline.emplace_back(b.at("id").get<std::string>(), b.at("score").get<double>());
    }
    rec.question_max = j.at("question_max").get<double>();
    rec.zero_vector_flag = j.at("zero_vector_flag").get<bool>();
    return rec;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::SchemaError, std::string("score record: ") + e.what());
  }
}

json manifest_json(const EvalRun& run) {
  json cells = json::array();
  for (const CellInfo& c : run.cells) {
    cells.push_back({{"context_id", c.context_id},
                     {"prompt", promptgen::to_string(c.prompt_id)},
                     {"questions", c.questions},
                     {"shortfall", c.shortfall},
                     {"retries", c.retries}});
  }
  json failures = json::array();
  for (const CellFailure& f : run.failures) {
    failures.push_back({{"context_id", f.context_id},
                        {"prompt", promptgen::to_string(f.prompt_id)},
                        {"stage", f.stage},
                        {"error", f.error}});
  }
  json abort = nullptr;
  if (run.abort_error) {
    abort = {{"stage", run.abort_stage.value_or("")},
             {"kind", run.abort_kind ? json(to_string(*run.abort_kind)) : json(nullptr)},
             {"error", *run.abort_error}};
  }
  return {
      {"tool", "qgen"},
      {"format_version", kFormatVersion},
      {"status", to_string(run.status)},
      {"abort", std::move(abort)},
      {"config", config_to_json(run.config)},
      {"rng_algorithm", run.rng_algorithm},
      {"backend", run.backend_identity},
      {"dataset_sha256", run.dataset_sha256},
      {"vectors_sha256", run.vectors_sha256},
      {"sampled_context_ids", run.context_ids},
      {"cells", std::move(cells)},
      {"failures", std::move(failures)},
      {"counts",
       {{"records", run.record_count()},
        {"zero_vector_records", run.zero_vector_records()},
        {"shortfall_cells", run.shortfall_cells()},
        {"expected_per_prompt", run.context_ids.size() * run.config.questions_per_prompt}}},
      {"timestamps", {{"started_at", run.started_at}, {"finished_at", run.finished_at}}},
      {"timing", {{"total_latency_ms", run.total_latency_ms}, {"max_latency_ms", run.max_latency_ms}}},
  };
}

void write_run(const EvalRun& run, const fs::path& dir) {
  ensure_dir(dir);
  {
    const fs::path p = dir / "manifest.json";
    auto out = open_out(p);
    out << manifest_json(run).dump(2) << '\n';
    close_out(out, p);
  }
  {
    const fs::path p = dir / "scores.jsonl";
    auto out = open_out(p);
    for (const auto& r : run.results) {
      for (const auto& rec : r.records) out << score_record_json(rec).dump() << '\n';
    }
    close_out(out, p);
  }
  {
    const fs::path p = dir / "table.csv";
    auto out = open_out(p);
    out << "context_id,prompt,question,question_max,prompt_max\n";
    for (const auto& r : run.results) {
      for (const auto& rec : r.records) {
        out << r.context_id << ',' << promptgen::to_string(r.prompt_id) << ',' << text::csv_escape(rec.generated.text)
            << ',' << stats::format_double(rec.question_max) << ',' << stats::format_double(r.prompt_max) << '\n';
      }
    }
    close_out(out, p);
  }
  {
    const fs::path p = dir / "textstats.json";
    auto out = open_out(p);
    out << textstats_json(run).dump(2) << '\n';
    close_out(out, p);
  }
  emit_figures(run, dir);
}

EvalRun load_run(const fs::path& dir) {
  const json m = read_json(dir / "manifest.json");
  EvalRun run;
  try {
    if (m.at("format_version").get<int>() != kFormatVersion) {
      throw Error(ErrorKind::SchemaError, "unsupported run format_version");
    }
    run.config = config_from_json(m.at("config"));
    run.config.out_dir = dir;
    run.status = parse_run_status(m.at("status").get<std::string>());
    if (!m.at("abort").is_null()) {
      const json& a = m.at("abort");
      run.abort_stage = a.at("stage").get<std::string>();
      run.abort_error = a.at("error").get<std::string>();
      if (a.at("kind").is_string()) run.abort_kind = parse_error_kind(a.at("kind").get<std::string>());
    }
    run.rng_algorithm = m.at("rng_algorithm").get<std::string>();
    run.backend_identity = m.at("backend").get<std::string>();
    run.dataset_sha256 = m.at("dataset_sha256").get<std::string>();
    run.vectors_sha256 = m.at("vectors_sha256").get<std::string>();
    run.context_ids = m.at("sampled_context_ids").get<std::vector<std::size_t>>();
    for (const json& c : m.at("cells")) {
      run.cells.push_back({c.at("context_id").get<std::size_t>(),
                           promptgen::parse_prompt_id(c.at("prompt").get<std::string>()),
                           c.at("questions").get<std::size_t>(), c.at("shortfall").get<bool>(),
                           c.at("retries").get<std::size_t>()});
    }
    for (const json& f : m.at("failures")) {
      run.failures.push_back({f.at("context_id").get<std::size_t>(),
                              promptgen::parse_prompt_id(f.at("prompt").get<std::string>()),
                              f.at("stage").get<std::string>(), f.at("error").get<std::string>()});
    }
    run.started_at = m.at("timestamps").at("started_at").get<std::string>();
    run.finished_at = m.at("timestamps").at("finished_at").get<std::string>();
    run.total_latency_ms = m.at("timing").at("total_latency_ms").get<std::size_t>();
    run.max_latency_ms = m.at("timing").at("max_latency_ms").get<std::size_t>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::SchemaError, "manifest.json: " + std::string(e.what()));
  }

  std::map<std::pair<std::size_t, PromptId>, std::vector<eval::ScoreRecord>> by_cell;
  {
    const fs::path p = dir / "scores.jsonl";
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Error(ErrorKind::IoError, "cannot open " + p.string());
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (text::trim(line).empty()) continue;
      json j;
      try {
        j = json::parse(line);
      } catch (const json::parse_error& e) {
        throw Error(ErrorKind::MalformedJson, p.string() + " line " + std::to_string(lineno) + ": " + e.what());
      }
      eval::ScoreRecord rec = score_record_from_json(j);
      by_cell[{rec.generated.context_id, rec.generated.prompt_id}].push_back(std::move(rec));
    }
  }
  for (const CellInfo& c : run.cells) {
    auto it = by_cell.find({c.context_id, c.prompt_id});
    if (it == by_cell.end() || it->second.size() != c.questions) {
      throw Error(ErrorKind::SchemaError, "scores.jsonl does not match manifest cell (context " +
                                              std::to_string(c.context_id) + ", prompt " +
                                              std::string(promptgen::to_string(c.prompt_id)) + ")");
    }
    eval::PromptContextResult r;
    r.context_id = c.context_id;
    r.prompt_id = c.prompt_id;
    r.shortfall = c.shortfall;
    r.records = std::move(it->second);
    r.prompt_max = eval::prompt_max(r.records);
    run.results.push_back(std::move(r));
  }

  if (fs::exists(dir / "textstats.json")) {
    const json t = read_json(dir / "textstats.json");
    try {
      if (!t.at("lengths").is_null()) {
        const json& h = t.at("lengths");
        textstats::Histogram hist;
        hist.length_unit = h.at("length_unit").get<std::string>();
        hist.bin_edges = h.at("bin_edges").get<std::vector<double>>();
        hist.counts = h.at("counts").get<std::vector<std::size_t>>();
        hist.excluded_outliers = h.at("excluded_outliers").get<std::size_t>();
        run.lengths = std::move(hist);
      }
      if (!t.at("keywords").is_null()) {
        textstats::KeywordFrequency kf;
        for (const json& e : t.at("keywords")) kf.entries.emplace_back(e.at(0).get<std::string>(), e.at(1).get<std::size_t>());
        run.keywords = std::move(kf);
      }
    } catch (const json::exception& e) {
      throw Error(ErrorKind::SchemaError, "textstats.json: " + std::string(e.what()));
    }
  }
  aggregate(run);
  return run;
}

void write_stats_figures(const textstats::Histogram& lengths, const std::optional<textstats::KeywordFrequency>& keywords,
                         const fs::path& dir) {
  ensure_dir(dir);
  {
    const fs::path p = dir / "fig1_lengths.csv";
    auto out = open_out(p);
    textstats::write_histogram_csv(out, lengths);
    close_out(out, p);
  }
  {
    const fs::path p = dir / "fig2_keywords.csv";
    auto out = open_out(p);
    textstats::write_keywords_csv(out, keywords.value_or(textstats::KeywordFrequency{}));
    close_out(out, p);
  }
}

std::vector<fs::path> emit_figures(const EvalRun& run, const fs::path& dir) {
  ensure_dir(dir);
  std::vector<fs::path> written;

  if (run.lengths) {
    write_stats_figures(*run.lengths, run.keywords, dir);
    written.push_back(dir / "fig1_lengths.csv");
    written.push_back(dir / "fig2_keywords.csv");
  }
  {
    const fs::path p = dir / "fig6_boxplot.csv";
    auto out = open_out(p);
    out << "prompt,n_questions,mean,median,q1,q3,whisker_lo,whisker_hi,outliers\n";
    for (const eval::PromptSummary& s : run.summaries) {
      out << promptgen::to_string(s.prompt_id) << ',' << s.n_questions;
      if (s.n_questions == 0) {
        out << ",,,,,,,\n";
        continue;
      }
      const eval::BoxStats& b = s.stats;
      std::string outliers;
      for (double v : b.outliers) {
        if (!outliers.empty()) outliers += ';';
        outliers += stats::format_double(v);
      }
      out << ',' << stats::format_double(b.mean) << ',' << stats::format_double(b.median) << ','
          << stats::format_double(b.q1) << ',' << stats::format_double(b.q3) << ','
          << stats::format_double(b.whisker_lo) << ',' << stats::format_double(b.whisker_hi) << ',' << outliers
          << '\n';
    }
    close_out(out, p);
    written.push_back(p);
  }
  {
    const fs::path p = dir / "fig7_matches.csv";
    auto out = open_out(p);
    out << "prompt,match_count,n_questions\n";
    for (const eval::PromptSummary& s : run.summaries) {
      out << promptgen::to_string(s.prompt_id) << ',' << s.match_count << ',' << s.n_questions << '\n';
    }
    close_out(out, p);
    written.push_back(p);
  }
  {
    const fs::path p = dir / "fig8_max_series.csv";
    auto out = open_out(p);
    out << "context_id";
    for (PromptId pid : run.config.prompts) out << ',' << promptgen::to_string(pid);
    out << '\n';
    for (std::size_t row = 0; row < run.context_ids.size(); ++row) {
      const std::size_t cid = run.context_ids[row];
      out << cid;
      for (PromptId pid : run.config.prompts) {
        out << ',';
        if (!run.max_series.empty()) {
          out << stats::format_double(run.max_series.at(pid).at(row).second);
        } else if (const auto* cell = find_cell(run, cid, pid)) {
          out << stats::format_double(cell->prompt_max);  // partial run: blank for missing cells
        }
      }
      out << '\n';
    }
    close_out(out, p);
    written.push_back(p);
  }
  {
    const fs::path p = dir / "report.md";
    auto out = open_out(p);
    out << render_report_markdown(run);
    close_out(out, p);
    written.push_back(p);
  }
  return written;
}

std::string render_report_markdown(const EvalRun& run) {
  std::ostringstream md;
  const std::size_t expected = run.context_ids.size() * run.config.questions_per_prompt;
  md << "# Question generation run\n\n";
  md << "- status: " << to_string(run.status) << '\n';
  md << "- backend: `" << run.backend_identity << "`\n";
  md << "- sampler: " << run.rng_algorithm << ", seed " << run.config.seed << '\n';
  md << "- sampled contexts: " << run.context_ids.size() << '\n';
  md << "- questions per prompt requested: " << run.config.questions_per_prompt << " (expected " << expected
     << " per prompt)\n";
  md << "- match rule: question max " << (run.config.match_rule == eval::MatchRule::Strict ? ">" : ">=") << ' '
     << stats::format_double(run.config.threshold) << '\n';
  md << "- scored questions: " << run.record_count() << ", zero-vector records: " << run.zero_vector_records()
     << ", cells with shortfall: " << run.shortfall_cells() << '\n';
  md << "- vectors sha256: " << run.vectors_sha256 << '\n';
  if (run.abort_error) md << "- aborted in stage " << run.abort_stage.value_or("?") << ": " << *run.abort_error << '\n';

  md << "\n## Per-prompt summary\n\n";
  md << "| prompt | questions | mean | median | q1 | q3 | matches |\n";
  md << "|---|---|---|---|---|---|---|\n";
  for (const eval::PromptSummary& s : run.summaries) {
    md << "| " << promptgen::to_string(s.prompt_id) << " | " << s.n_questions << " | ";
    if (s.n_questions == 0) {
      md << "- | - | - | - | 0 |\n";
      continue;
    }
    md << fixed4(s.stats.mean) << " | " << fixed4(s.stats.median) << " | " << fixed4(s.stats.q1) << " | "
       << fixed4(s.stats.q3) << " | " << s.match_count << " |\n";
  }

  bool deviation = false;
  for (const eval::PromptSummary& s : run.summaries) deviation = deviation || s.n_questions != expected;
  if (deviation) {
    md << "\n## Deviations from the planned grid\n\n";
    for (const eval::PromptSummary& s : run.summaries) {
      if (s.n_questions != expected) {
        md << "- prompt " << promptgen::to_string(s.prompt_id) << ": " << s.n_questions << " questions instead of "
           << expected << '\n';
      }
    }
    for (const CellFailure& f : run.failures) {
      md << "- context " << f.context_id << ", prompt " << promptgen::to_string(f.prompt_id) << " failed in "
         << f.stage << ": " << f.error << '\n';
    }
  }

  md << "\n## Reference values\n\n"
        "Published values from the original LLaMA-based study (50 contexts, 250 questions per prompt). They depend\n"
        "on the exact model outputs and on a word-vector model that was not identified, so they are listed for\n"
        "comparison only and are not expected to be reproduced by this run.\n\n"
        "| prompt | reported centre | matches (> 0.7, of 250) | prompt max at the context-45 point |\n"
        "|---|---|---|---|\n"
        "| A | 0.6387 (average) | 79 | 0.73 |\n"
        "| B | 0.6227 (average) | 64 | 0.42 |\n"
        "| C | 0.6321 (average) | 76 | 0.70 |\n"
        "| D | 0.6444 (median) | 81 | 0.77 |\n";
  return md.str();
}

void write_failure_manifest(const RunConfig& cfg, const fs::path& dir, const std::string& stage,
                            const std::string& error) {
  ensure_dir(dir);
  const json m{{"tool", "qgen"},
               {"format_version", kFormatVersion},
               {"status", "failed"},
               {"abort", {{"stage", stage}, {"kind", nullptr}, {"error", error}}},
               {"config", config_to_json(cfg)},
               {"timestamps", {{"finished_at", utc_timestamp()}}}};
  const fs::path p = dir / "manifest.json";
  auto out = open_out(p);
  out << m.dump(2) << '\n';
  close_out(out, p);
}

}  // namespace qgen::report
