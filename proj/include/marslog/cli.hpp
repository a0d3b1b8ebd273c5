#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "marslog/simulator.hpp"

namespace marslog::cli {

enum ExitCode : int {
  kSuccess = 0,
  kValidationFailed = 1,
  kUsageError = 2,
  kIoOrParseError = 3,
};

/// Entry point of the `marslog` tool. argv[0] is the program name.
/// Results go to `out`, diagnostics and usage to `err`.
int run(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err);

/// Applies `key = value` lines (with `#` comments) onto `config`.
/// Throws kInvalidConfig on unknown keys or unparsable values.
void apply_config_text(const std::string& text, SimConfig& config);
void apply_config_entry(const std::string& key, const std::string& value, SimConfig& config);

}  // namespace marslog::cli
