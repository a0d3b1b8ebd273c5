#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace marslog {

/// Name of the clock a timestamp was read from ("boottime", "monotonic",
/// "host", ...). Never empty; compared by exact string equality.
class ClockId {
 public:
  ClockId() : name_("unknown") {}
  explicit ClockId(std::string name);

  const std::string& name() const noexcept { return name_; }

  friend bool operator==(const ClockId&, const ClockId&) = default;

 private:
  std::string name_;
};

/// Integer-nanosecond timestamp tagged with its clock. Comparisons and
/// arithmetic between two instants throw ErrorCode::kClockMismatch when the
/// clocks differ.
class Instant {
 public:
  Instant() = default;
  Instant(std::int64_t ns, ClockId clock) : ns_(ns), clock_(std::move(clock)) {}

  std::int64_t ns() const noexcept { return ns_; }
  const ClockId& clock() const noexcept { return clock_; }

  /// Same clock, shifted by a signed duration.
  Instant shifted(std::int64_t delta_ns) const;

  /// Signed duration `*this - earlier`; both must share a clock.
  std::int64_t since(const Instant& earlier) const;

  /// Ordering across a single clock; throws on mixed clocks.
  std::strong_ordering compare(const Instant& other) const;

  friend bool operator==(const Instant&, const Instant&) = default;

 private:
  std::int64_t ns_ = 0;
  ClockId clock_;
};

void require_same_clock(const ClockId& a, const ClockId& b, std::string_view context);

/// floor(num / den) for den > 0.
__int128 floor_div(__int128 num, __int128 den);

/// num / den rounded to nearest, ties toward +infinity. den > 0.
std::int64_t round_half_up_div(__int128 num, __int128 den);

/// Value rounded to nearest integer, ties toward +infinity.
std::int64_t round_half_up(double value);

}  // namespace marslog
