#include <doctest.h>

#include <atomic>
#include <fstream>
#include <map>

#include <nlohmann/json.hpp>

#include "qgen/backend.hpp"
#include "qgen/config.hpp"
#include "qgen/error.hpp"
#include "qgen/pipeline.hpp"
#include "qgen/report.hpp"
#include "support/fixtures.hpp"

using namespace qgen;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Workspace {
  testing::TempDir dir;
  RunConfig cfg;

  explicit Workspace(std::size_t contexts, std::size_t sample) {
    const std::string squad = testing::synthetic_squad_json(contexts, 3, 11);
    testing::write_file(dir / "squad.json", squad);
    testing::write_file(dir / "vectors.txt", testing::synthetic_vectors_for(squad, 12, 5));
    cfg.dataset = dir / "squad.json";
    cfg.vectors = dir / "vectors.txt";
    cfg.sample_size = sample;
    cfg.seed = 42;
  }
};

std::map<std::string, std::string> run_files(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    std::string body = testing::read_file(e.path());
    if (e.path().filename() == "manifest.json") {
      json m = json::parse(body);
      m.erase("timestamps");
      m.erase("timing");
      body = m.dump();
    }
    out[e.path().filename().string()] = body;
  }
  return out;
}

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::InvalidArgument;
}

// Answers prompt B with prose that contains no question, everything else
// like the mock.
class NoQuestionsForB final : public backend::GenerationBackend {
 public:
  backend::BackendResponse complete(const backend::BackendRequest& r) override {
    if (r.prompt.starts_with(promptgen::prompt_template(promptgen::PromptId::B).instruction)) {
      return {"I am unable to do that.", {}, 0};
    }
    return mock_.complete(r);
  }
  std::string identity() const override { return "test:no-b"; }

 private:
  backend::MockBackend mock_{1};
};

class FailsAfter final : public backend::GenerationBackend {
 public:
  explicit FailsAfter(int ok) : ok_(ok) {}
  backend::BackendResponse complete(const backend::BackendRequest& r) override {
    if (calls_++ >= ok_) throw Error(ErrorKind::BackendUnavailable, "endpoint down");
    return mock_.complete(r);
  }
  std::string identity() const override { return "test:fails-after"; }

 private:
  int ok_;
  std::atomic<int> calls_{0};
  backend::MockBackend mock_{1};
};

}  // namespace

TEST_CASE("two contexts, four prompts, five questions each") {
  Workspace ws(6, 2);
  const EvalRun run = run_pipeline(ws.cfg);
  CHECK(run.status == RunStatus::Complete);
  CHECK(run.context_ids.size() == 2);
  CHECK(run.results.size() == 8);
  CHECK(run.record_count() == 40);
  CHECK(run.cells.size() == 8);
  CHECK(run.shortfall_cells() == 0);
  CHECK(run.max_series.size() == 4);
  for (const auto& [p, series] : run.max_series) CHECK(series.size() == 2);
  REQUIRE(run.summaries.size() == 4);
  for (const auto& s : run.summaries) {
    CHECK(s.n_questions == 10);
    CHECK(s.stats.whisker_lo >= -1.0);
    CHECK(s.stats.whisker_hi <= 1.0);
  }
  CHECK(run.dataset_sha256.size() == 64);
  CHECK(run.backend_identity == "mock:xoshiro256**/splitmix64:seed=42:questions=5");
  CHECK(run.lengths.has_value());
  CHECK(run.keywords.has_value());

  // Results are ordered by sampled context, then prompt.
  for (std::size_t i = 0; i < run.results.size(); ++i) {
    CHECK(run.results[i].context_id == run.context_ids[i / 4]);
    CHECK(run.results[i].prompt_id == promptgen::kAllPrompts[i % 4]);
  }
}

TEST_CASE("runs are reproducible regardless of parallelism") {
  Workspace ws(8, 5);
  testing::TempDir out;
  RunConfig serial = ws.cfg;
  serial.scoring_threads = 1;
  serial.backend.max_in_flight = 1;
  RunConfig wide = ws.cfg;
  wide.scoring_threads = 8;
  wide.backend.max_in_flight = 16;
  report::write_run(run_pipeline(serial), out / "a");
  report::write_run(run_pipeline(wide), out / "b");
  const auto a = run_files(out / "a");
  const auto b = run_files(out / "b");
  CHECK(a.size() == 10);
  for (const auto& [name, body] : a) {
    if (name != "manifest.json") CHECK_MESSAGE(b.at(name) == body, name);
  }
  // The manifests differ only in the recorded parallelism settings.
  json ma = json::parse(a.at("manifest.json")), mb = json::parse(b.at("manifest.json"));
  for (json* m : {&ma, &mb}) {
    (*m)["config"].erase("scoring_threads");
    (*m)["config"]["backend"].erase("max_in_flight");
  }
  CHECK(ma == mb);

  RunConfig other = ws.cfg;
  other.seed = 43;
  report::write_run(run_pipeline(other), out / "c");
  CHECK(run_files(out / "c").at("scores.jsonl") != a.at("scores.jsonl"));
}

TEST_CASE("persisted runs load back and re-emit identical figures") {
  Workspace ws(5, 3);
  testing::TempDir out;
  const EvalRun run = run_pipeline(ws.cfg);
  report::write_run(run, out / "run");
  const EvalRun loaded = report::load_run(out / "run");
  CHECK(loaded.results.size() == run.results.size());
  CHECK(loaded.context_ids == run.context_ids);
  CHECK(loaded.status == RunStatus::Complete);
  for (std::size_t i = 0; i < run.results.size(); ++i) {
    REQUIRE(loaded.results[i].records.size() == run.results[i].records.size());
    CHECK(loaded.results[i].prompt_max == run.results[i].prompt_max);
    for (std::size_t k = 0; k < run.results[i].records.size(); ++k) {
      CHECK(loaded.results[i].records[k].generated == run.results[i].records[k].generated);
      CHECK(loaded.results[i].records[k].per_baseline == run.results[i].records[k].per_baseline);
    }
  }
  report::emit_figures(loaded, out / "again");
  const auto first = run_files(out / "run");
  for (const auto& [name, body] : run_files(out / "again")) CHECK_MESSAGE(first.at(name) == body, name);

  const json manifest = json::parse(testing::read_file(out / "run" / "manifest.json"));
  CHECK(manifest.at("status") == "complete");
  CHECK(manifest.at("counts").at("records") == 60);
  CHECK_FALSE(manifest.at("config").at("backend").contains("token"));
  const std::string report_md = testing::read_file(out / "run" / "report.md");
  CHECK(report_md.find("0.6444") != std::string::npos);
}

TEST_CASE("a cell with no parsable questions makes the run partial") {
  Workspace ws(4, 2);
  NoQuestionsForB b;
  const EvalRun run = run_pipeline(ws.cfg, b);
  CHECK(run.status == RunStatus::Partial);
  CHECK(run.failures.size() == 2);
  for (const auto& f : run.failures) {
    CHECK(f.prompt_id == promptgen::PromptId::B);
    CHECK(f.stage == "parse_questions");
  }
  CHECK(run.results.size() == 6);
  CHECK(run.max_series.empty());
  CHECK(run.summaries[1].n_questions == 0);

  testing::TempDir out;
  report::write_run(run, out.path());
  const std::string fig8 = testing::read_file(out / "fig8_max_series.csv");
  CHECK(fig8.find(",,") != std::string::npos);
  CHECK(report::load_run(out.path()).status == RunStatus::Partial);
}

TEST_CASE("a backend outage aborts the run but keeps finished cells") {
  Workspace ws(4, 3);
  ws.cfg.backend.max_in_flight = 1;
  FailsAfter b(5);
  const EvalRun run = run_pipeline(ws.cfg, b);
  CHECK(run.status == RunStatus::Aborted);
  CHECK(run.abort_kind == ErrorKind::BackendUnavailable);
  CHECK(run.abort_stage == "generate");
  CHECK(run.results.size() == 5);
  CHECK(run.failures.empty());
}

TEST_CASE("data errors propagate with their kind") {
  Workspace ws(3, 2);
  testing::write_file(ws.dir / "squad.json", "{\"data\": [");
  CHECK(kind_of([&] { run_pipeline(ws.cfg); }) == ErrorKind::MalformedJson);
  Workspace big(3, 10);
  CHECK(kind_of([&] { run_pipeline(big.cfg); }) == ErrorKind::SampleTooLarge);
}

TEST_CASE("config parsing") {
  testing::TempDir dir;
  testing::write_file(dir / "d.json", "{}");
  testing::write_file(dir / "v.txt", "a 1\n");
  testing::write_file(dir / "cfg.json", R"({
    "dataset": "d.json", "vectors": "v.txt", "seed": 9, "threshold": 0.5,
    "prompts": ["a", "D"], "match_rule": "inclusive",
    "backend": {"kind": "http", "url": "http://localhost:8080/gen", "wire": "openai", "model": "m"}
  })");
  const RunConfig cfg = load_config(dir / "cfg.json");
  CHECK(cfg.dataset == dir / "d.json");
  CHECK(cfg.seed == 9);
  CHECK(cfg.threshold == 0.5);
  CHECK(cfg.prompts == std::vector<promptgen::PromptId>{promptgen::PromptId::A, promptgen::PromptId::D});
  CHECK(cfg.match_rule == eval::MatchRule::Inclusive);
  CHECK(cfg.backend.kind == BackendKind::Http);
  CHECK(cfg.backend.wire == backend::WireFormat::OpenAi);
  CHECK(cfg.sample_size == 50);
  CHECK(cfg.temperature == 0.5);
  CHECK(cfg.questions_per_prompt == 5);
  CHECK_NOTHROW(validate(cfg));

  RunConfig again = config_from_json(config_to_json(cfg));
  CHECK(config_to_json(again) == config_to_json(cfg));

  CHECK(kind_of([] { config_from_json(json{{"bogus", 1}}); }) == ErrorKind::ConfigError);
  CHECK(kind_of([] { config_from_json(json{{"backend", {{"kind", "grpc"}}}}); }) == ErrorKind::ConfigError);
  CHECK(kind_of([] { config_from_json(json{{"seed", "x"}}); }) == ErrorKind::ConfigError);
  CHECK(kind_of([] { config_from_json(json{{"match_rule", "loose"}}); }) == ErrorKind::ConfigError);
  CHECK(kind_of([&] { load_config(dir / "missing.json"); }) == ErrorKind::ConfigError);

  RunConfig bad = cfg;
  bad.vectors = dir / "nope.txt";
  CHECK(kind_of([&] { validate(bad); }) == ErrorKind::ConfigError);
  bad = cfg;
  bad.threshold = 1.5;
  CHECK(kind_of([&] { validate(bad); }) == ErrorKind::ConfigError);
  bad = cfg;
  bad.sample_size = 0;
  CHECK(kind_of([&] { validate(bad); }) == ErrorKind::ConfigError);
}

TEST_CASE("environment supplies the backend endpoint and token") {
  RunConfig cfg;
  const std::map<std::string, std::string> env = {{"QGEN_BACKEND_URL", "http://h:1/x"},
                                                   {"QGEN_BACKEND_TOKEN", "t0k"}};
  apply_env_overrides(cfg, [&](const char* k) -> std::optional<std::string> {
    const auto it = env.find(k);
    return it == env.end() ? std::nullopt : std::optional<std::string>(it->second);
  });
  CHECK(cfg.backend.url == "http://h:1/x");
  CHECK(cfg.backend.token == "t0k");
  CHECK(config_to_json(cfg).dump().find("t0k") == std::string::npos);
}

TEST_CASE("a run manifest doubles as a config") {
  Workspace ws(3, 2);
  testing::TempDir out;
  report::write_run(run_pipeline(ws.cfg), out.path());
  const RunConfig replay = load_config(out / "manifest.json");
  CHECK(replay.dataset == ws.cfg.dataset);
  CHECK(replay.seed == 42);
  CHECK(replay.sample_size == 2);
}
