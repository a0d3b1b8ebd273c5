#pragma once

#include <cstdint>

#include "marslog/time.hpp"

namespace marslog {

/// Affine relation between two clocks:
///
///   t_to = round_half_up(scale * t_from) + offset_ns
///
/// The product is evaluated exactly (the double `scale` is expanded into its
/// integer mantissa and binary exponent), so a map yields the same
/// nanosecond on every platform.
class ClockMap {
 public:
  /// Throws kInvalidArgument unless scale is finite and > 0.
  ClockMap(ClockId from, ClockId to, double scale, std::int64_t offset_ns);

  static ClockMap identity(const ClockId& clock) { return {clock, clock, 1.0, 0}; }

  const ClockId& from() const noexcept { return from_; }
  const ClockId& to() const noexcept { return to_; }
  double scale() const noexcept { return scale_; }
  std::int64_t offset_ns() const noexcept { return offset_ns_; }

  /// Rate difference of the destination clock relative to the source, in
  /// parts per million: (scale - 1) * 1e6.
  double drift_ppm() const noexcept { return (scale_ - 1.0) * 1e6; }

  std::int64_t apply(std::int64_t t_from_ns) const;

  /// Remaps an instant; throws kClockMismatch unless it is on `from()`.
  Instant apply(const Instant& t) const;

  /// Map from `to()` back to `from()`. Composition with *this reproduces the
  /// input within +-1 ns.
  ClockMap inverse() const;

  friend bool operator==(const ClockMap&, const ClockMap&) = default;

 private:
  ClockId from_;
  ClockId to_;
  double scale_;
  std::int64_t offset_ns_;
};

/// round_half_up(scale * value) computed without intermediate rounding.
std::int64_t scale_exact(double scale, std::int64_t value);

}  // namespace marslog
