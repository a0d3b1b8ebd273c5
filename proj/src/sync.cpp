#include "marslog/sync.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "marslog/error.hpp"

namespace marslog {

namespace {

void require_strictly_increasing(const RawSampleStream& s, const char* name) {
  if (s.samples.empty()) return;
  const ClockId& clock = s.samples.front().t.clock();
  for (std::size_t i = 1; i < s.samples.size(); ++i) {
    require_same_clock(s.samples[i].t.clock(), clock, name);
    if (s.samples[i].t.ns() <= s.samples[i - 1].t.ns()) {
      throw Error(ErrorCode::kNonMonotonicTimestamp,
                  std::string(name) + "[" + std::to_string(i) + "] does not increase");
    }
  }
}

// Linear interpolation strictly inside (t0, t1), clamped to the bracket so
// rounding cannot leave [min, max] of the two knots.
double lerp_between(double v0, double v1, std::int64_t t0, std::int64_t t1, std::int64_t t) {
  const double w = static_cast<double>(t - t0) / static_cast<double>(t1 - t0);
  const double v = v0 + w * (v1 - v0);
  return std::clamp(v, std::min(v0, v1), std::max(v0, v1));
}

}  // namespace

InterpolationResult interpolate_accel_at_gyro(const RawSampleStream& gyro, const RawSampleStream& accel) {
  if (gyro.samples.empty()) throw Error(ErrorCode::kEmptyStream, "gyro stream has no samples");
  require_strictly_increasing(gyro, "gyro");
  require_strictly_increasing(accel, "accel");
  if (!accel.samples.empty()) {
    require_same_clock(gyro.samples.front().t.clock(), accel.samples.front().t.clock(),
                       "accel interpolation");
  }

  InterpolationResult result;
  result.samples.reserve(gyro.samples.size());
  const auto& acc = accel.samples;

  std::size_t j = 0;  // acc[j].t <= current epoch once inside the span
  for (const auto& g : gyro.samples) {
    const std::int64_t t = g.t.ns();
    if (acc.empty() || t < acc.front().t.ns()) {
      ++result.dropped_before;
      continue;
    }
    if (t > acc.back().t.ns()) {
      ++result.dropped_after;
      continue;
    }
    while (j + 1 < acc.size() && acc[j + 1].t.ns() <= t) ++j;

    Vec3 a;
    if (acc[j].t.ns() == t) {
      a = acc[j].value;
    } else {
      const auto& lo = acc[j];
      const auto& hi = acc[j + 1];
      for (int k = 0; k < 3; ++k) a[k] = lerp_between(lo.value[k], hi.value[k], lo.t.ns(), hi.t.ns(), t);
    }
    result.samples.emplace_back(g.t, g.value, a);
  }
  return result;
}

ClockMap fit_clock_map(std::span<const ClockCorrespondence> marks) {
  if (marks.empty()) throw Error(ErrorCode::kInvalidArgument, "fit_clock_map needs at least one mark");

  const ClockId& clock_a = marks.front().t_a().clock();
  const ClockId& clock_b = marks.front().t_b().clock();
  for (const auto& m : marks) {
    if (m.t_a().clock() != clock_a || m.t_b().clock() != clock_b) {
      throw Error(ErrorCode::kMixedClockPairs, "marks relate different clock pairs ('" + clock_a.name() +
                                                   "'->'" + clock_b.name() + "' vs '" +
                                                   m.t_a().clock().name() + "'->'" +
                                                   m.t_b().clock().name() + "')");
    }
  }

  if (marks.size() == 1) {
    return {clock_a, clock_b, 1.0, marks.front().t_b().ns() - marks.front().t_a().ns()};
  }

  std::vector<std::int64_t> seen;
  seen.reserve(marks.size());
  for (const auto& m : marks) seen.push_back(m.t_a().ns());
  std::sort(seen.begin(), seen.end());
  if (std::adjacent_find(seen.begin(), seen.end()) != seen.end()) {
    throw Error(ErrorCode::kDegenerateMarks, "two marks share the same t_a");
  }

  // Slope from exact integer moments of the marks, centered on the first one
  // to keep the sums small.
  const std::int64_t a0 = marks.front().t_a().ns();
  const std::int64_t b0 = marks.front().t_b().ns();
  const auto n = static_cast<__int128>(marks.size());
  __int128 sx = 0, sy = 0, sxx = 0, sxy = 0, sum_a = 0, sum_b = 0;
  for (const auto& m : marks) {
    const __int128 x = static_cast<__int128>(m.t_a().ns()) - a0;
    const __int128 y = static_cast<__int128>(m.t_b().ns()) - b0;
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    sum_a += m.t_a().ns();
    sum_b += m.t_b().ns();
  }
  const __int128 num = n * sxy - sx * sy;
  const __int128 den = n * sxx - sx * sx;
  const double scale =
      static_cast<double>(static_cast<long double>(num) / static_cast<long double>(den));
  if (!(scale > 0.0)) {
    throw Error(ErrorCode::kDegenerateMarks, "marks do not describe an increasing clock relation");
  }

  // Intercept through the centroid: (sum_b - scale * sum_a) / n, rounded once.
  int exp2 = 0;
  const double frac = std::frexp(scale, &exp2);
  const auto mantissa = static_cast<std::int64_t>(std::ldexp(frac, 53));
  const int shift = 53 - exp2;
  if (shift < 1 || shift > 120) {
    throw Error(ErrorCode::kDegenerateMarks, "fitted clock scale out of range");
  }
  const __int128 pow2 = static_cast<__int128>(1) << shift;
  __int128 scaled_b = 0, scaled_a = 0, numer = 0;
  if (__builtin_mul_overflow(sum_b, pow2, &scaled_b) ||
      __builtin_mul_overflow(sum_a, static_cast<__int128>(mantissa), &scaled_a) ||
      __builtin_sub_overflow(scaled_b, scaled_a, &numer)) {
    throw Error(ErrorCode::kDegenerateMarks, "clock marks too large to fit exactly");
  }
  const std::int64_t offset = round_half_up_div(numer, n * pow2);
  return {clock_a, clock_b, scale, offset};
}

std::vector<FrameRecord> remap_stream(std::span<const FrameRecord> frames, const ClockMap& map) {
  std::vector<FrameRecord> out;
  out.reserve(frames.size());
  for (const auto& f : frames) out.push_back(f.with_t_start(map.apply(f.t_start())));
  return out;
}

std::vector<ImuSample> remap_stream(std::span<const ImuSample> samples, const ClockMap& map) {
  std::vector<ImuSample> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.emplace_back(map.apply(s.t), s.gyro, s.accel);
  return out;
}

RawSampleStream remap_stream(const RawSampleStream& stream, const ClockMap& map) {
  RawSampleStream out{stream.kind, {}};
  out.samples.reserve(stream.samples.size());
  for (const auto& s : stream.samples) out.samples.push_back({map.apply(s.t), s.value});
  return out;
}

Instant center_frame_time(const FrameRecord& frame) {
  const __int128 both = static_cast<__int128>(frame.exposure_ns()) + frame.readout_ns();
  return frame.t_start().shifted(round_half_up_div(both, 2));
}

void require_single_clock(const SyncedSession& synced) {
  auto check = [&](const Instant& t, const char* what) {
    if (t.clock() != synced.clock) {
      throw Error(ErrorCode::kUnsyncedInput, std::string(what) + " on clock '" + t.clock().name() +
                                                 "', expected '" + synced.clock.name() + "'");
    }
  };
  for (const auto& f : synced.frames) {
    check(f.frame.t_start(), "frame");
    check(f.t_center, "centered frame time");
  }
  for (const auto& s : synced.imu) check(s.t, "IMU sample");
}

SyncedSession synchronize_session(const Session& session, const ClockId& target_clock) {
  const DeviceManifest& m = session.manifest;
  require_same_clock(target_clock, m.imu_clock, "synchronization target must be the IMU clock");

  SyncedSession out;
  out.manifest = m;
  out.clock = target_clock;

  // Frames already on the IMU clock keep the provenance of an earlier sync.
  ClockMap frame_map = ClockMap::identity(target_clock);
  if (m.frame_clock == m.imu_clock) {
    out.applied_map = session.applied_clock_map.value_or(frame_map);
  } else {
    if (session.clock_marks.empty()) {
      throw Error(ErrorCode::kMissingClockMarks, "frame clock '" + m.frame_clock.name() +
                                                     "' differs from IMU clock '" + m.imu_clock.name() +
                                                     "' and the session has no clock marks");
    }
    ClockMap fitted = fit_clock_map(session.clock_marks);
    if (fitted.from() == m.imu_clock && fitted.to() == m.frame_clock) fitted = fitted.inverse();
    require_same_clock(fitted.from(), m.frame_clock, "clock marks");
    require_same_clock(fitted.to(), m.imu_clock, "clock marks");
    frame_map = fitted;
    out.applied_map = fitted;
  }

  const bool center = session.frame_time_reference == FrameTimeReference::kStartOfExposure;
  const auto remapped = remap_stream(session.frames, frame_map);
  out.frames.reserve(remapped.size());
  for (const auto& f : remapped) {
    Instant t_center = center ? center_frame_time(f) : f.t_start();
    if (!out.frames.empty() && t_center.ns() <= out.frames.back().t_center.ns()) {
      throw Error(ErrorCode::kNonMonotonicTimestamp,
                  "centered frame " + std::to_string(f.index()) + " does not follow its predecessor");
    }
    out.frames.push_back({f, std::move(t_center)});
  }
  out.manifest.frame_clock = target_clock;

  if (session.imu_combined && !session.imu_combined->empty()) {
    out.imu = *session.imu_combined;
  } else if (session.gyro_raw && session.accel_raw) {
    auto interp = interpolate_accel_at_gyro(*session.gyro_raw, *session.accel_raw);
    out.imu = std::move(interp.samples);
    out.gyro_epochs_dropped = interp.dropped();
  } else {
    throw Error(ErrorCode::kEmptyStream, "session has no IMU samples to synchronize");
  }
  for (const auto& s : out.imu) require_same_clock(s.t.clock(), target_clock, "IMU stream");
  return out;
}

Session to_session(const SyncedSession& synced) {
  require_single_clock(synced);
  Session s;
  s.manifest = synced.manifest;
  s.manifest.frame_clock = synced.clock;
  s.manifest.imu_clock = synced.clock;
  s.frames.reserve(synced.frames.size());
  for (const auto& f : synced.frames) s.frames.push_back(f.frame.with_t_start(f.t_center));
  s.imu_combined = synced.imu;
  s.frame_time_reference = FrameTimeReference::kCentered;
  s.applied_clock_map = synced.applied_map;
  return s;
}

}  // namespace marslog
