#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>

#include "qgen/promptgen.hpp"

// Text-generation backends. Implementations must tolerate concurrent
// complete() calls.
namespace qgen::backend {

struct BackendRequest {
  std::string prompt;
  double temperature = 0.5;
  std::size_t max_tokens = 256;
};

struct BackendResponse {
  std::string text;
  std::chrono::milliseconds latency{0};
  std::size_t retries = 0;
};

class GenerationBackend {
 public:
  virtual ~GenerationBackend() = default;

  // Throws Error{BackendUnavailable | BackendRejected | Timeout}.
  virtual BackendResponse complete(const BackendRequest& request) = 0;

  // Recorded in the run manifest, e.g. "mock:xoshiro256**/splitmix64:seed=7".
  virtual std::string identity() const = 0;
};

// Sends the rendered prompt with the sampling parameters from cfg and stamps
// the wall-clock latency on the response.
BackendResponse generate(GenerationBackend& backend, const std::string& prompt,
                         const promptgen::GenerationConfig& cfg);

// Deterministic stand-in for a language model. For each prompt it seeds
// xoshiro256** with seed ^ fnv1a64(prompt, temperature), picks sentences of
// the framed context with replacement, and rewrites each one into a
// What/Who/When question around its first capitalised token span (a crude
// stand-in for the leading noun phrase). Output is a numbered list of
// `questions` lines.
class MockBackend final : public GenerationBackend {
 public:
  explicit MockBackend(std::uint64_t seed, std::size_t questions = 5);

  BackendResponse complete(const BackendRequest& request) override;
  std::string identity() const override;

 private:
  std::uint64_t seed_;
  std::size_t questions_;
};

enum class WireFormat {
  Native,  // {"prompt","temperature","max_tokens"} -> {"text"}
  OpenAi,  // same request fields (+ "model") -> {"choices":[{"text"}]}
};

struct RetryPolicy {
  std::size_t max_attempts = 3;
  std::chrono::milliseconds initial_backoff{1000};
  double multiplier = 2.0;
};

struct HttpBackendConfig {
  std::string url;  // scheme://host[:port]/path
  std::string token;  // sent as "Authorization: Bearer <token>" when non-empty
  WireFormat wire = WireFormat::Native;
  std::string model;  // OpenAI wire only; omitted when empty
  std::chrono::milliseconds timeout{60000};
  RetryPolicy retry;
};

// POSTs JSON requests to a configured endpoint. Transport errors and 5xx
// responses are retried with exponential backoff up to retry.max_attempts
// total attempts; 4xx responses fail immediately with BackendRejected.
class HttpBackend final : public GenerationBackend {
 public:
  using Sleeper = std::function<void(std::chrono::milliseconds)>;

  explicit HttpBackend(HttpBackendConfig config, Sleeper sleeper = {});

  BackendResponse complete(const BackendRequest& request) override;
  std::string identity() const override;

  // Exposed for tests of the two wire formats.
  std::string encode_request(const BackendRequest& request) const;
  std::string decode_response(const std::string& body) const;

 private:
  HttpBackendConfig config_;
  Sleeper sleeper_;
  std::string origin_;
  std::string path_;
};

WireFormat parse_wire_format(std::string_view s);
std::string_view to_string(WireFormat w);

}  // namespace qgen::backend
