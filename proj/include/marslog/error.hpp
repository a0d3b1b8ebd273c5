#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace marslog {

enum class ErrorCode {
  kInvalidArgument,
  kClockMismatch,
  kNonMonotonicTimestamp,
  kEmptyStream,
  kDegenerateMarks,
  kMixedClockPairs,
  kMissingClockMarks,
  kTooFewSamples,
  kInvalidConfig,
  kMissingFile,
  kMalformedLine,
  kIoFailure,
  kUnsyncedInput,
};

const char* to_string(ErrorCode code);

/// Base exception for every failure raised by the library.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// A row in an input file could not be parsed. Carries the location so the
/// message can point the user at the offending line.
class MalformedLineError : public Error {
 public:
  MalformedLineError(std::string file, std::size_t line, std::string reason);

  const std::string& file() const noexcept { return file_; }
  std::size_t line() const noexcept { return line_; }
  const std::string& reason() const noexcept { return reason_; }

 private:
  std::string file_;
  std::size_t line_;
  std::string reason_;
};

}  // namespace marslog
