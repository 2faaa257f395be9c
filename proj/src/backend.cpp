#include "qgen/backend.hpp"

#include <bit>
#include <cmath>
#include <regex>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "qgen/error.hpp"
#include "qgen/rng.hpp"
#include "qgen/text.hpp"

namespace qgen::backend {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

BackendResponse generate(GenerationBackend& backend, const std::string& prompt,
                         const promptgen::GenerationConfig& cfg) {
  BackendRequest req{prompt, cfg.temperature, cfg.max_output_tokens};
  const auto t0 = Clock::now();
  BackendResponse resp = backend.complete(req);
  resp.latency = std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - t0);
  return resp;
}

// ---- mock -----------------------------------------------------------------

namespace {

std::vector<std::string> split_sentences(std::string_view context) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i < context.size(); ++i) {
    const char c = context[i];
    const bool terminal = c == '.' || c == '!' || c == '?';
    const bool boundary = i + 1 == context.size() || context[i + 1] == ' ' || context[i + 1] == '\n';
    if (terminal && boundary) {
      const auto s = text::trim(context.substr(start, i + 1 - start));
      if (!s.empty()) out.emplace_back(s);
      start = i + 1;
    }
  }
  const auto tail = text::trim(context.substr(std::min(start, context.size())));
  if (!tail.empty()) out.emplace_back(tail);
  return out;
}

std::vector<std::string> split_words(std::string_view s) {
  std::vector<std::string> words;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && s[i] == ' ') ++i;
    const std::size_t b = i;
    while (i < s.size() && s[i] != ' ') ++i;
    if (i > b) words.emplace_back(s.substr(b, i - b));
  }
  return words;
}

bool starts_upper(const std::string& word) {
  const std::u32string cps = text::decode_utf8(word);
  return !cps.empty() && text::is_upper(cps.front());
}

std::string strip_edge_punct(const std::string& word) {
  const std::u32string cps = text::decode_utf8(word);
  std::size_t b = 0;
  std::size_t e = cps.size();
  while (b < e && text::is_punct(cps[b])) ++b;
  while (e > b && text::is_punct(cps[e - 1])) --e;
  return text::encode_utf8(std::u32string_view(cps).substr(b, e - b));
}

bool ends_with_punct(const std::string& word) {
  const std::u32string cps = text::decode_utf8(word);
  return !cps.empty() && text::is_punct(cps.back());
}

std::string join(const std::vector<std::string>& words, std::size_t b, std::size_t e) {
  std::string out;
  for (std::size_t i = b; i < e; ++i) {
    if (!out.empty()) out += ' ';
    out += words[i];
  }
  return out;
}

std::string mock_question(const std::string& sentence, std::uint64_t form) {
  constexpr std::size_t kMaxRemainder = 16;
  const std::vector<std::string> words = split_words(sentence);

  std::size_t span_b = 0;
  while (span_b < words.size() && !starts_upper(words[span_b])) ++span_b;
  std::string span;
  std::size_t span_e = span_b;
  if (span_b < words.size()) {
    while (span_e < words.size() && starts_upper(words[span_e])) {
      ++span_e;
      if (ends_with_punct(words[span_e - 1])) break;
    }
    span = strip_edge_punct(join(words, span_b, span_e));
  } else {
    span_b = 0;
    span_e = std::min<std::size_t>(3, words.size());
    span = strip_edge_punct(join(words, 0, span_e));
  }
  if (span.empty()) span = "the text";

  std::string remainder;
  if (span_b == 0 && span_e < words.size()) {
    remainder = strip_edge_punct(join(words, span_e, std::min(words.size(), span_e + kMaxRemainder)));
  }

  switch (form) {
    case 0: return remainder.empty() ? "Who is " + span + "?" : "Who " + remainder + "?";
    case 1: return remainder.empty() ? "What is " + span + "?" : "What " + remainder + "?";
    case 2: return "When was " + span + " mentioned?";
    default: return "What is known about " + span + "?";
  }
}

}  // namespace

MockBackend::MockBackend(std::uint64_t seed, std::size_t questions) : seed_(seed), questions_(questions) {
  if (questions == 0) throw Error(ErrorKind::InvalidArgument, "mock backend must produce at least one question");
}

BackendResponse MockBackend::complete(const BackendRequest& request) {
  const std::uint64_t temp_bits = std::bit_cast<std::uint64_t>(request.temperature);
  std::uint64_t h = fnv1a64(request.prompt);
  h = fnv1a64(std::string_view(reinterpret_cast<const char*>(&temp_bits), sizeof temp_bits), h);
  Xoshiro256StarStar rng(seed_ ^ h);

  const std::string context = promptgen::extract_context(request.prompt).value_or(request.prompt);
  std::vector<std::string> sentences = split_sentences(context);
  if (sentences.empty()) sentences.push_back(context);

  BackendResponse resp;
  for (std::size_t i = 0; i < questions_; ++i) {
    const std::string& s = sentences[rng.bounded(sentences.size())];
    resp.text += std::to_string(i + 1) + ". " + mock_question(s, rng.bounded(4)) + "\n";
  }
  return resp;
}

std::string MockBackend::identity() const {
  return "mock:" + std::string(Xoshiro256StarStar::kAlgorithmName) + ":seed=" + std::to_string(seed_) +
         ":questions=" + std::to_string(questions_);
}

// ---- http -----------------------------------------------------------------

WireFormat parse_wire_format(std::string_view s) {
  if (s == "native") return WireFormat::Native;
  if (s == "openai") return WireFormat::OpenAi;
  throw Error(ErrorKind::ConfigError, "unknown wire format \"" + std::string(s) + "\" (expected native|openai)");
}

std::string_view to_string(WireFormat w) { return w == WireFormat::Native ? "native" : "openai"; }

HttpBackend::HttpBackend(HttpBackendConfig config, Sleeper sleeper)
    : config_(std::move(config)), sleeper_(std::move(sleeper)) {
  static const std::regex kUrl(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(config_.url, m, kUrl)) {
    throw Error(ErrorKind::ConfigError, "backend URL must look like http(s)://host[:port]/path, got \"" +
                                            config_.url + "\"");
  }
  origin_ = m[1].str();
  path_ = m[2].matched ? m[2].str() : "/";
  if (config_.retry.max_attempts == 0) throw Error(ErrorKind::ConfigError, "retry.max_attempts must be >= 1");
  if (!sleeper_) sleeper_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

std::string HttpBackend::encode_request(const BackendRequest& request) const {
  json body{{"prompt", request.prompt}, {"temperature", request.temperature}, {"max_tokens", request.max_tokens}};
  if (config_.wire == WireFormat::OpenAi && !config_.model.empty()) body["model"] = config_.model;
  return body.dump();
}

std::string HttpBackend::decode_response(const std::string& body) const {
  try {
    const json j = json::parse(body);
    if (config_.wire == WireFormat::OpenAi) return j.at("choices").at(0).at("text").get<std::string>();
    return j.at("text").get<std::string>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::BackendUnavailable, std::string("unreadable backend response: ") + e.what());
  }
}

BackendResponse HttpBackend::complete(const BackendRequest& request) {
  httplib::Client client(origin_);
  const auto timeout_s = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
  const auto timeout_us = std::chrono::duration_cast<std::chrono::microseconds>(config_.timeout - timeout_s);
  client.set_connection_timeout(timeout_s.count(), timeout_us.count());
  client.set_read_timeout(timeout_s.count(), timeout_us.count());
  client.set_write_timeout(timeout_s.count(), timeout_us.count());

  httplib::Headers headers;
  if (!config_.token.empty()) headers.emplace("Authorization", "Bearer " + config_.token);
  const std::string body = encode_request(request);

  std::string last_failure;
  bool last_was_timeout = false;
  auto backoff = config_.retry.initial_backoff;
  for (std::size_t attempt = 1;; ++attempt) {
    const auto t0 = Clock::now();
    const httplib::Result res = client.Post(path_, headers, body, "application/json");
    const auto elapsed = Clock::now() - t0;
    if (res) {
      const int status = res->status;
      if (status >= 200 && status < 300) {
        BackendResponse resp;
        resp.text = decode_response(res->body);
        resp.retries = attempt - 1;
        return resp;
      }
      if (status < 500) {
        throw Error(ErrorKind::BackendRejected,
                    "HTTP " + std::to_string(status) + " from " + config_.url + ": " + res->body.substr(0, 200));
      }
      last_failure = "HTTP " + std::to_string(status);
      last_was_timeout = false;
    } else {
      const httplib::Error err = res.error();
      last_was_timeout = err == httplib::Error::ConnectionTimeout ||
                         (err == httplib::Error::Read && elapsed >= config_.timeout);
      last_failure = httplib::to_string(err);
    }
    if (attempt >= config_.retry.max_attempts) break;
    sleeper_(backoff);
    backoff = std::chrono::milliseconds(
        static_cast<std::int64_t>(std::llround(static_cast<double>(backoff.count()) * config_.retry.multiplier)));
  }
  const std::string msg = config_.url + " failed after " + std::to_string(config_.retry.max_attempts) +
                          " attempts (last: " + last_failure + ")";
  throw Error(last_was_timeout ? ErrorKind::Timeout : ErrorKind::BackendUnavailable, msg);
}

std::string HttpBackend::identity() const {
  std::string id = "http:" + std::string(to_string(config_.wire)) + ":" + config_.url;
  if (!config_.model.empty()) id += ":model=" + config_.model;
  return id;
}

}  // namespace qgen::backend
