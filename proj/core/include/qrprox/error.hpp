#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace qrprox {

enum class ErrorCode {
  EmptyFingerprint,
  InsufficientOverlap,
  DegenerateRanks,
  EmptyRadioMap,
  NotAUrl,
  MalformedApParam,
  AmbiguousContext,
  NoContext,
  InvalidContextId,
  MissingSalt,
  UnknownContext,
  InvalidInterval,
  ParseError,
  OutOfBounds,
  InvalidArgument,
  IoError,
};

constexpr const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::EmptyFingerprint: return "EmptyFingerprint";
    case ErrorCode::InsufficientOverlap: return "InsufficientOverlap";
    case ErrorCode::DegenerateRanks: return "DegenerateRanks";
    case ErrorCode::EmptyRadioMap: return "EmptyRadioMap";
    case ErrorCode::NotAUrl: return "NotAUrl";
    case ErrorCode::MalformedApParam: return "MalformedApParam";
    case ErrorCode::AmbiguousContext: return "AmbiguousContext";
    case ErrorCode::NoContext: return "NoContext";
    case ErrorCode::InvalidContextId: return "InvalidContextId";
    case ErrorCode::MissingSalt: return "MissingSalt";
    case ErrorCode::UnknownContext: return "UnknownContext";
    case ErrorCode::InvalidInterval: return "InvalidInterval";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::OutOfBounds: return "OutOfBounds";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::IoError: return "IoError";
  }
  return "UnknownError";
}

/// Exception carrying a stable error code plus a human-readable detail.
/// The code is what maps onto CLI exit status and HTTP status.
class Error : public std::runtime_error {
public:
  Error(ErrorCode code, std::string detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail),
        code_(code), detail_(std::move(detail)) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

private:
  ErrorCode code_;
  std::string detail_;
};

/// Rule-text parse failure with source location and the token set that
/// would have been accepted. Covers both syntax errors and out-of-range
/// interval literals, distinguished by code().
class RuleParseError : public Error {
public:
  RuleParseError(ErrorCode code, int line, int column, std::string detail,
                 std::vector<std::string> expected = {})
      : Error(code, "line " + std::to_string(line) + ", column " + std::to_string(column) +
                        ": " + detail),
        line_(line), column_(column), expected_(std::move(expected)) {}

  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }
  const std::vector<std::string>& expected() const noexcept { return expected_; }

private:
  int line_;
  int column_;
  std::vector<std::string> expected_;
};

}  // namespace qrprox
