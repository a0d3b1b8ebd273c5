#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "marslog/core.hpp"

namespace marslog {

/// Statistics of successive timestamp differences of one stream.
struct IntervalStats {
  std::string stream;
  std::size_t count = 0;  // number of intervals
  std::int64_t sum_ns = 0;
  double mean_ns = 0.0;
  /// Population standard deviation.
  double std_ns = 0.0;
  std::int64_t min_ns = 0;
  std::int64_t max_ns = 0;
  double median_ns = 0.0;
  /// Nearest-rank 99th percentile.
  std::int64_t p99_ns = 0;
  std::optional<std::int64_t> nominal_interval_ns;
  double achieved_rate_hz = 0.0;
};

/// Throws kTooFewSamples for fewer than two timestamps and
/// kNonMonotonicTimestamp / kClockMismatch on invalid input.
IntervalStats interval_stats(std::span<const Instant> timestamps,
                             std::optional<double> nominal_rate_hz = std::nullopt,
                             std::string stream = "stream");

struct Gap {
  Instant start;
  std::int64_t duration_ns;
};

struct GapReport {
  std::vector<Gap> gaps;
  std::int64_t nominal_interval_ns = 0;
  double multiplier = 1.5;
  /// Intervals strictly greater than this are gaps.
  double threshold_ns = 0.0;
};

GapReport detect_gaps(std::span<const Instant> timestamps, std::int64_t nominal_interval_ns,
                      double multiplier = 1.5);

struct HistogramBin {
  std::int64_t start_ns;
  std::int64_t end_ns;
  std::size_t count;
};

/// `bins` equal-width bins over [0, span_multiple * nominal) followed by one
/// overflow bin covering everything above, up to the largest interval.
std::vector<HistogramBin> interval_histogram(std::span<const Instant> timestamps,
                                             std::int64_t nominal_interval_ns,
                                             std::size_t bins = 60, std::int64_t span_multiple = 3);

struct StreamReport {
  std::string name;
  /// False when the stream is missing or has fewer than two samples.
  bool present = false;
  std::size_t samples = 0;
  std::optional<IntervalStats> stats;
  std::optional<GapReport> gaps;
  std::vector<HistogramBin> histogram;
};

struct MetadataSummary {
  std::size_t frames = 0;
  std::size_t measured = 0;
  std::size_t empirical = 0;
  double fraction_measured = 0.0;
  double fraction_empirical = 0.0;
};

struct SessionReport {
  std::string device_name;
  OsFamily os_family = OsFamily::kUnknown;
  std::vector<StreamReport> streams;
  MetadataSummary metadata;
};

/// Interval statistics, gaps and histogram for every stream of the session.
/// Nominal intervals come from the manifest rates when recorded, otherwise
/// from the stream's median interval.
SessionReport session_report(const Session& session);

nlohmann::json to_json(const IntervalStats& stats);
nlohmann::json to_json(const GapReport& report);
nlohmann::json to_json(const SessionReport& report);

/// Human-readable multi-line summary.
std::string to_text(const SessionReport& report);

/// CSV `bin_start_ns,bin_end_ns,count`, one `# stream: <name>` comment line
/// before each present stream's rows.
std::string histogram_csv(const SessionReport& report);

}  // namespace marslog
