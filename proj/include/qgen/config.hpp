#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qgen/backend.hpp"
#include "qgen/eval.hpp"
#include "qgen/promptgen.hpp"

namespace qgen {

enum class BackendKind { Mock, Http };

struct BackendSettings {
  BackendKind kind = BackendKind::Mock;
  std::string url;
  std::string token;  // never written to disk
  backend::WireFormat wire = backend::WireFormat::Native;
  std::string model;
  std::size_t timeout_ms = 60000;
  std::size_t max_attempts = 3;
  std::size_t initial_backoff_ms = 1000;
  std::size_t max_in_flight = 4;
};

// Defaults reproduce the published setup: 50 sampled contexts, temperature
// 0.5, five questions per prompt, prompts A-D, match threshold 0.7.
struct RunConfig {
  std::filesystem::path dataset;
  std::filesystem::path vectors;
  std::optional<std::filesystem::path> stopwords;  // bundled list when absent
  BackendSettings backend;
  std::uint64_t seed = 0;
  std::size_t sample_size = 50;
  double temperature = 0.5;
  std::size_t questions_per_prompt = 5;
  std::size_t max_output_tokens = 256;
  double threshold = 0.7;
  eval::MatchRule match_rule = eval::MatchRule::Strict;
  std::vector<promptgen::PromptId> prompts{promptgen::kAllPrompts.begin(), promptgen::kAllPrompts.end()};
  std::filesystem::path out_dir = "qgen-run";
  std::size_t histogram_bin_width = 1;
  std::size_t top_k_keywords = 25;
  std::size_t scoring_threads = 0;  // 0: hardware concurrency

  promptgen::GenerationConfig generation() const;
};

inline constexpr const char* kBackendUrlEnv = "QGEN_BACKEND_URL";
inline constexpr const char* kBackendTokenEnv = "QGEN_BACKEND_TOKEN";

// Unknown keys are rejected. Relative paths are resolved against base_dir.
// A run manifest is accepted too: its "config" object is used. Throws
// ConfigError.
RunConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& path);

// Serialises everything needed to repeat a run. The auth token and the
// output directory are left out.
nlohmann::json config_to_json(const RunConfig& cfg);

using EnvLookup = std::function<std::optional<std::string>(const char*)>;
EnvLookup process_env();
// Only the backend URL and token are taken from the environment.
void apply_env_overrides(RunConfig& cfg, const EnvLookup& env);

// Checks value ranges and that input paths exist. Throws ConfigError.
void validate(const RunConfig& cfg);

std::unique_ptr<backend::GenerationBackend> make_backend(const RunConfig& cfg);

}  // namespace qgen
