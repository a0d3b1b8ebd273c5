#include "marslog/time.hpp"

#include <cmath>
#include <limits>

#include "marslog/error.hpp"

namespace marslog {

ClockId::ClockId(std::string name) : name_(std::move(name)) {
  if (name_.empty()) throw Error(ErrorCode::kInvalidArgument, "clock name must not be empty");
}

void require_same_clock(const ClockId& a, const ClockId& b, std::string_view context) {
  if (a != b) {
    throw Error(ErrorCode::kClockMismatch, std::string(context) + ": clock '" + a.name() +
                                               "' vs '" + b.name() + "'");
  }
}

Instant Instant::shifted(std::int64_t delta_ns) const {
  std::int64_t out;
  if (__builtin_add_overflow(ns_, delta_ns, &out)) {
    throw Error(ErrorCode::kInvalidArgument, "timestamp overflow");
  }
  return {out, clock_};
}

std::int64_t Instant::since(const Instant& earlier) const {
  require_same_clock(clock_, earlier.clock_, "instant difference");
  std::int64_t out;
  if (__builtin_sub_overflow(ns_, earlier.ns_, &out)) {
    throw Error(ErrorCode::kInvalidArgument, "duration overflow");
  }
  return out;
}

std::strong_ordering Instant::compare(const Instant& other) const {
  require_same_clock(clock_, other.clock_, "instant comparison");
  return ns_ <=> other.ns_;
}

__int128 floor_div(__int128 num, __int128 den) {
  __int128 q = num / den;
  if ((num % den != 0) && ((num < 0) != (den < 0))) --q;
  return q;
}

std::int64_t round_half_up_div(__int128 num, __int128 den) {
  // floor(num/den + 1/2) == floor((2 num + den) / (2 den))
  const __int128 q = floor_div(2 * num + den, 2 * den);
  if (q > std::numeric_limits<std::int64_t>::max() || q < std::numeric_limits<std::int64_t>::min()) {
    throw Error(ErrorCode::kInvalidArgument, "rounded value out of int64 range");
  }
  return static_cast<std::int64_t>(q);
}

std::int64_t round_half_up(double value) {
  if (!std::isfinite(value) || std::abs(value) > 9.2e18) {
    throw Error(ErrorCode::kInvalidArgument, "value out of int64 range");
  }
  // floor(v + 0.5) can round incorrectly when v + 0.5 is inexact; go through
  // the floor of v itself instead.
  const double fl = std::floor(value);
  return static_cast<std::int64_t>(fl) + ((value - fl) >= 0.5 ? 1 : 0);
}

}  // namespace marslog
