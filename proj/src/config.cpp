#include "qgen/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>

#include "qgen/error.hpp"

namespace qgen {

using nlohmann::json;
namespace fs = std::filesystem;

promptgen::GenerationConfig RunConfig::generation() const {
  return {temperature, questions_per_prompt, max_output_tokens, seed};
}

namespace {

[[noreturn]] void config_error(const std::string& msg) { throw Error(ErrorKind::ConfigError, msg); }

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.contains(key)) config_error("unknown key \"" + key + "\" in " + where);
  }
}

template <typename T>
T get_as(const json& obj, const char* key, const std::string& where) {
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    config_error(std::string("bad value for \"") + key + "\" in " + where);
  }
}

fs::path resolve(const fs::path& p, const fs::path& base) {
  if (p.empty() || p.is_absolute() || base.empty()) return p;
  return (base / p).lexically_normal();
}

eval::MatchRule parse_match_rule(const std::string& s) {
  if (s == "strict") return eval::MatchRule::Strict;
  if (s == "inclusive") return eval::MatchRule::Inclusive;
  config_error("match_rule must be \"strict\" or \"inclusive\", got \"" + s + "\"");
}

}  // namespace

RunConfig config_from_json(const json& input, const fs::path& base_dir) {
  if (!input.is_object()) config_error("configuration must be a JSON object");
  const json& j = input.contains("config") && input.contains("format_version") ? input.at("config") : input;
  check_keys(j,
             {"dataset", "vectors", "stopwords", "backend", "seed", "sample_size", "temperature",
              "questions_per_prompt", "max_output_tokens", "threshold", "match_rule", "prompts", "out",
              "histogram_bin_width", "top_k_keywords", "scoring_threads"},
             "config");
  RunConfig cfg;
  const std::string where = "config";
  if (j.contains("dataset")) cfg.dataset = resolve(get_as<std::string>(j, "dataset", where), base_dir);
  if (j.contains("vectors")) cfg.vectors = resolve(get_as<std::string>(j, "vectors", where), base_dir);
  if (j.contains("stopwords") && !j.at("stopwords").is_null()) {
    cfg.stopwords = resolve(get_as<std::string>(j, "stopwords", where), base_dir);
  }
  if (j.contains("seed")) cfg.seed = get_as<std::uint64_t>(j, "seed", where);
  if (j.contains("sample_size")) cfg.sample_size = get_as<std::size_t>(j, "sample_size", where);
  if (j.contains("temperature")) cfg.temperature = get_as<double>(j, "temperature", where);
  if (j.contains("questions_per_prompt")) cfg.questions_per_prompt = get_as<std::size_t>(j, "questions_per_prompt", where);
  if (j.contains("max_output_tokens")) cfg.max_output_tokens = get_as<std::size_t>(j, "max_output_tokens", where);
  if (j.contains("threshold")) cfg.threshold = get_as<double>(j, "threshold", where);
  if (j.contains("match_rule")) cfg.match_rule = parse_match_rule(get_as<std::string>(j, "match_rule", where));
  if (j.contains("out")) cfg.out_dir = resolve(get_as<std::string>(j, "out", where), base_dir);
  if (j.contains("histogram_bin_width")) cfg.histogram_bin_width = get_as<std::size_t>(j, "histogram_bin_width", where);
  if (j.contains("top_k_keywords")) cfg.top_k_keywords = get_as<std::size_t>(j, "top_k_keywords", where);
  if (j.contains("scoring_threads")) cfg.scoring_threads = get_as<std::size_t>(j, "scoring_threads", where);
  if (j.contains("prompts")) {
    cfg.prompts.clear();
    for (const std::string& p : get_as<std::vector<std::string>>(j, "prompts", where)) {
      try {
        cfg.prompts.push_back(promptgen::parse_prompt_id(p));
      } catch (const Error& e) {
        config_error(e.what());
      }
    }
  }
  if (j.contains("backend")) {
    const json& b = j.at("backend");
    const std::string bwhere = "config.backend";
    if (!b.is_object()) config_error("backend must be an object");
    check_keys(b,
               {"kind", "url", "token", "wire", "model", "timeout_ms", "max_attempts", "initial_backoff_ms",
                "max_in_flight"},
               bwhere);
    BackendSettings& s = cfg.backend;
    if (b.contains("kind")) {
      const auto kind = get_as<std::string>(b, "kind", bwhere);
      if (kind == "mock") {
        s.kind = BackendKind::Mock;
      } else if (kind == "http") {
        s.kind = BackendKind::Http;
      } else {
        config_error("backend.kind must be \"mock\" or \"http\", got \"" + kind + "\"");
      }
    }
    if (b.contains("url")) s.url = get_as<std::string>(b, "url", bwhere);
    if (b.contains("token")) s.token = get_as<std::string>(b, "token", bwhere);
    if (b.contains("wire")) s.wire = backend::parse_wire_format(get_as<std::string>(b, "wire", bwhere));
    if (b.contains("model")) s.model = get_as<std::string>(b, "model", bwhere);
    if (b.contains("timeout_ms")) s.timeout_ms = get_as<std::size_t>(b, "timeout_ms", bwhere);
    if (b.contains("max_attempts")) s.max_attempts = get_as<std::size_t>(b, "max_attempts", bwhere);
    if (b.contains("initial_backoff_ms")) s.initial_backoff_ms = get_as<std::size_t>(b, "initial_backoff_ms", bwhere);
    if (b.contains("max_in_flight")) s.max_in_flight = get_as<std::size_t>(b, "max_in_flight", bwhere);
  }
  return cfg;
}

RunConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) config_error("cannot open config file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    config_error(path.string() + ": " + e.what());
  }
  return config_from_json(j, fs::absolute(path).parent_path());
}

json config_to_json(const RunConfig& cfg) {
  json prompts = json::array();
  for (promptgen::PromptId p : cfg.prompts) prompts.push_back(promptgen::to_string(p));
  json j{
      {"dataset", cfg.dataset.string()},
      {"vectors", cfg.vectors.string()},
      {"stopwords", cfg.stopwords ? json(cfg.stopwords->string()) : json(nullptr)},
      {"seed", cfg.seed},
      {"sample_size", cfg.sample_size},
      {"temperature", cfg.temperature},
      {"questions_per_prompt", cfg.questions_per_prompt},
      {"max_output_tokens", cfg.max_output_tokens},
      {"threshold", cfg.threshold},
      {"match_rule", cfg.match_rule == eval::MatchRule::Strict ? "strict" : "inclusive"},
      {"prompts", prompts},
      {"histogram_bin_width", cfg.histogram_bin_width},
      {"top_k_keywords", cfg.top_k_keywords},
  };
  json b{
      {"kind", cfg.backend.kind == BackendKind::Mock ? "mock" : "http"},
      {"max_in_flight", cfg.backend.max_in_flight},
  };
  if (cfg.backend.kind == BackendKind::Http) {
    b["url"] = cfg.backend.url;
    b["wire"] = backend::to_string(cfg.backend.wire);
    b["model"] = cfg.backend.model;
    b["timeout_ms"] = cfg.backend.timeout_ms;
    b["max_attempts"] = cfg.backend.max_attempts;
    b["initial_backoff_ms"] = cfg.backend.initial_backoff_ms;
  }
  j["backend"] = std::move(b);
  return j;
}

EnvLookup process_env() {
  return [](const char* name) -> std::optional<std::string> {
    if (const char* v = std::getenv(name)) return std::string(v);
    return std::nullopt;
  };
}

void apply_env_overrides(RunConfig& cfg, const EnvLookup& env) {
  if (auto url = env(kBackendUrlEnv)) cfg.backend.url = *url;
  if (auto token = env(kBackendTokenEnv)) cfg.backend.token = *token;
}

void validate(const RunConfig& cfg) {
  auto require_file = [](const fs::path& p, const char* what) {
    if (p.empty()) config_error(std::string(what) + " path is not set");
    std::error_code ec;
    if (!fs::is_regular_file(p, ec)) config_error(std::string(what) + " file does not exist: " + p.string());
  };
  require_file(cfg.dataset, "dataset");
  require_file(cfg.vectors, "vectors");
  if (cfg.stopwords) require_file(*cfg.stopwords, "stopwords");
  if (cfg.sample_size == 0) config_error("sample_size must be at least 1");
  if (!(cfg.temperature >= 0.0)) config_error("temperature must be >= 0");
  if (cfg.questions_per_prompt == 0) config_error("questions_per_prompt must be at least 1");
  if (cfg.max_output_tokens == 0) config_error("max_output_tokens must be at least 1");
  if (!(cfg.threshold >= 0.0 && cfg.threshold <= 1.0)) config_error("threshold must lie in [0, 1]");
  if (cfg.prompts.empty()) config_error("prompt set is empty");
  if (std::set<promptgen::PromptId>(cfg.prompts.begin(), cfg.prompts.end()).size() != cfg.prompts.size()) {
    config_error("prompt set contains duplicates");
  }
  if (cfg.histogram_bin_width == 0) config_error("histogram_bin_width must be at least 1");
  if (cfg.top_k_keywords == 0) config_error("top_k_keywords must be at least 1");
  if (cfg.backend.max_in_flight == 0) config_error("backend.max_in_flight must be at least 1");
  if (cfg.backend.kind == BackendKind::Http) {
    if (cfg.backend.url.empty()) config_error(std::string("http backend needs a URL (config or ") + kBackendUrlEnv + ")");
    if (cfg.backend.max_attempts == 0) config_error("backend.max_attempts must be at least 1");
  }
}

std::unique_ptr<backend::GenerationBackend> make_backend(const RunConfig& cfg) {
  if (cfg.backend.kind == BackendKind::Mock) {
    return std::make_unique<backend::MockBackend>(cfg.seed, cfg.questions_per_prompt);
  }
  backend::HttpBackendConfig h;
  h.url = cfg.backend.url;
  h.token = cfg.backend.token;
  h.wire = cfg.backend.wire;
  h.model = cfg.backend.model;
  h.timeout = std::chrono::milliseconds(cfg.backend.timeout_ms);
  h.retry.max_attempts = cfg.backend.max_attempts;
  h.retry.initial_backoff = std::chrono::milliseconds(cfg.backend.initial_backoff_ms);
  return std::make_unique<backend::HttpBackend>(std::move(h));
}

}  // namespace qgen
