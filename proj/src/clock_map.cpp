#include "marslog/clock_map.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "marslog/error.hpp"

namespace marslog {

std::int64_t scale_exact(double scale, std::int64_t value) {
  if (!std::isfinite(scale)) throw Error(ErrorCode::kInvalidArgument, "non-finite scale");
  if (scale == 0.0 || value == 0) return 0;

  // scale == mantissa * 2^exponent exactly, with |mantissa| < 2^53.
  int exp2 = 0;
  const double frac = std::frexp(scale, &exp2);
  const auto mantissa = static_cast<std::int64_t>(std::ldexp(frac, 53));
  const int exponent = exp2 - 53;
  const __int128 product = static_cast<__int128>(mantissa) * value;

  if (exponent >= 0) {
    if (exponent > 10) throw Error(ErrorCode::kInvalidArgument, "scaled timestamp out of range");
    const __int128 shifted = product * (static_cast<__int128>(1) << exponent);
    if (shifted > std::numeric_limits<std::int64_t>::max() ||
        shifted < std::numeric_limits<std::int64_t>::min()) {
      throw Error(ErrorCode::kInvalidArgument, "scaled timestamp out of range");
    }
    return static_cast<std::int64_t>(shifted);
  }
  const int shift = -exponent;
  // |product| < 2^116, so anything shifted further is below 1/32 and rounds to 0.
  if (shift > 120) return 0;
  return round_half_up_div(product, static_cast<__int128>(1) << shift);
}

ClockMap::ClockMap(ClockId from, ClockId to, double scale, std::int64_t offset_ns)
    : from_(std::move(from)), to_(std::move(to)), scale_(scale), offset_ns_(offset_ns) {
  if (!std::isfinite(scale_) || scale_ <= 0.0) {
    throw Error(ErrorCode::kInvalidArgument,
                "clock map scale must be finite and positive, got " + std::to_string(scale_));
  }
}

std::int64_t ClockMap::apply(std::int64_t t_from_ns) const {
  std::int64_t out;
  if (__builtin_add_overflow(scale_exact(scale_, t_from_ns), offset_ns_, &out)) {
    throw Error(ErrorCode::kInvalidArgument, "remapped timestamp overflow");
  }
  return out;
}

Instant ClockMap::apply(const Instant& t) const {
  require_same_clock(t.clock(), from_, "clock map input");
  return {apply(t.ns()), to_};
}

ClockMap ClockMap::inverse() const {
  const double inv_scale = 1.0 / scale_;
  // t_from = (t_to - offset) / scale ~= inv_scale * t_to - offset * inv_scale
  return {to_, from_, inv_scale, scale_exact(inv_scale, -offset_ns_)};
}

}  // namespace marslog
