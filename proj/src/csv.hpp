#pragma once

// Minimal strict CSV reader for the session layout: header row required,
// `#` comment lines allowed, LF line endings, no quoting.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "marslog/error.hpp"

namespace marslog::csv {

class Reader {
 public:
  Reader(std::string file_label, std::string content, std::string_view expected_header)
      : file_(std::move(file_label)), content_(std::move(content)) {
    std::string_view header;
    if (!next_raw(header)) throw MalformedLineError(file_, line_ == 0 ? 1 : line_, "missing header row");
    if (header != expected_header) {
      throw MalformedLineError(file_, line_,
                               "header '" + std::string(header) + "', expected '" + std::string(expected_header) +
                                   "'");
    }
    columns_ = static_cast<std::size_t>(std::count(expected_header.begin(), expected_header.end(), ',')) + 1;
  }

  /// Next data row split into fields; false at end of file.
  bool next(std::vector<std::string_view>& fields) {
    std::string_view line;
    if (!next_raw(line)) return false;
    fields.clear();
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      fields.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (fields.size() != columns_) {
      fail("expected " + std::to_string(columns_) + " columns, got " + std::to_string(fields.size()));
    }
    return true;
  }

  std::size_t line() const noexcept { return line_; }
  const std::string& file() const noexcept { return file_; }

  [[noreturn]] void fail(const std::string& reason) const { throw MalformedLineError(file_, line_, reason); }

  std::int64_t to_int(std::string_view field, const char* name) const {
    std::int64_t v = 0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (field.empty() || ec != std::errc() || ptr != field.data() + field.size()) {
      fail(std::string("invalid integer for ") + name + ": '" + std::string(field) + "'");
    }
    return v;
  }

  std::uint64_t to_uint(std::string_view field, const char* name) const {
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (field.empty() || ec != std::errc() || ptr != field.data() + field.size()) {
      fail(std::string("invalid non-negative integer for ") + name + ": '" + std::string(field) + "'");
    }
    return v;
  }

  double to_double(std::string_view field, const char* name) const {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (field.empty() || ec != std::errc() || ptr != field.data() + field.size()) {
      fail(std::string("invalid number for ") + name + ": '" + std::string(field) + "'");
    }
    return v;
  }

  std::optional<double> to_optional_double(std::string_view field, const char* name) const {
    if (field.empty()) return std::nullopt;
    return to_double(field, name);
  }

 private:
  // Next non-comment line. A final LF does not start an extra line; any other
  // empty line is an error.
  bool next_raw(std::string_view& out) {
    while (pos_ < content_.size()) {
      const std::size_t nl = content_.find('\n', pos_);
      const std::size_t end = nl == std::string::npos ? content_.size() : nl;
      std::string_view line(content_.data() + pos_, end - pos_);
      pos_ = nl == std::string::npos ? content_.size() : nl + 1;
      ++line_;
      if (!line.empty() && line.front() == '#') continue;
      if (line.empty()) fail("empty line");
      if (line.back() == '\r') fail("CR line ending");
      out = line;
      return true;
    }
    return false;
  }

  std::string file_;
  std::string content_;
  std::size_t pos_ = 0;
  std::size_t line_ = 0;
  std::size_t columns_ = 0;
};

}  // namespace marslog::csv
