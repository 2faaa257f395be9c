#include "qgen/error.hpp"

namespace qgen {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MalformedJson: return "MalformedJson";
    case ErrorKind::SchemaError: return "SchemaError";
    case ErrorKind::SpanError: return "SpanError";
    case ErrorKind::SampleTooLarge: return "SampleTooLarge";
    case ErrorKind::InvalidChunkParams: return "InvalidChunkParams";
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::BadFloat: return "BadFloat";
    case ErrorKind::DuplicateToken: return "DuplicateToken";
    case ErrorKind::BackendUnavailable: return "BackendUnavailable";
    case ErrorKind::BackendRejected: return "BackendRejected";
    case ErrorKind::Timeout: return "Timeout";
    case ErrorKind::NoQuestionsFound: return "NoQuestionsFound";
    case ErrorKind::EmptyRecords: return "EmptyRecords";
    case ErrorKind::MissingCell: return "MissingCell";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

std::optional<ErrorKind> parse_error_kind(std::string_view name) {
  for (int k = 0; k <= static_cast<int>(ErrorKind::ConfigError); ++k) {
    if (to_string(static_cast<ErrorKind>(k)) == name) return static_cast<ErrorKind>(k);
  }
  return std::nullopt;
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

}  // namespace qgen
