#include "marslog/error.hpp"

namespace marslog {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kClockMismatch: return "ClockMismatch";
    case ErrorCode::kNonMonotonicTimestamp: return "NonMonotonicTimestamp";
    case ErrorCode::kEmptyStream: return "EmptyStream";
    case ErrorCode::kDegenerateMarks: return "DegenerateMarks";
    case ErrorCode::kMixedClockPairs: return "MixedClockPairs";
    case ErrorCode::kMissingClockMarks: return "MissingClockMarks";
    case ErrorCode::kTooFewSamples: return "TooFewSamples";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kMissingFile: return "MissingFile";
    case ErrorCode::kMalformedLine: return "MalformedLine";
    case ErrorCode::kIoFailure: return "IoFailure";
    case ErrorCode::kUnsyncedInput: return "UnsyncedInput";
  }
  return "Unknown";
}

MalformedLineError::MalformedLineError(std::string file, std::size_t line, std::string reason)
    : Error(ErrorCode::kMalformedLine, file + ":" + std::to_string(line) + ": " + reason),
      file_(std::move(file)),
      line_(line),
      reason_(std::move(reason)) {}

}  // namespace marslog
