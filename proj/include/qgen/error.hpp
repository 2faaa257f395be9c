#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace qgen {

enum class ErrorKind {
  MalformedJson,
  SchemaError,
  SpanError,
  SampleTooLarge,
  InvalidChunkParams,
  EmptyInput,
  DimensionMismatch,
  BadFloat,
  DuplicateToken,
  BackendUnavailable,
  BackendRejected,
  Timeout,
  NoQuestionsFound,
  EmptyRecords,
  MissingCell,
  InvalidArgument,
  IoError,
  ConfigError,
};

std::string_view to_string(ErrorKind kind);
std::optional<ErrorKind> parse_error_kind(std::string_view name);

// Every failure surfaced by the library is an Error carrying a kind, so
// callers (and the CLI exit-code mapping) can branch without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace qgen
