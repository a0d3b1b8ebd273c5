#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "marslog/clock_map.hpp"
#include "marslog/core.hpp"

namespace marslog {

struct InterpolationResult {
  std::vector<ImuSample> samples;
  /// Gyro epochs before the first / after the last accel sample. They are
  /// dropped, never extrapolated.
  std::size_t dropped_before = 0;
  std::size_t dropped_after = 0;

  std::size_t dropped() const noexcept { return dropped_before + dropped_after; }
};

/// Resamples the accelerometer onto each gyro epoch by linear interpolation
/// between the two bracketing accel readings.
///
/// Throws kEmptyStream if gyro is empty, kClockMismatch if the streams use
/// different clocks, kNonMonotonicTimestamp if either stream is not strictly
/// increasing.
InterpolationResult interpolate_accel_at_gyro(const RawSampleStream& gyro,
                                              const RawSampleStream& accel);

/// Affine map from clock a to clock b of the marks. One mark gives a pure
/// offset; two or more give the least-squares line through the marks (exact
/// for two).
///
/// Throws kMixedClockPairs, kDegenerateMarks (repeated t_a, or a fitted
/// slope <= 0) and kInvalidArgument on an empty list.
ClockMap fit_clock_map(std::span<const ClockCorrespondence> marks);

std::vector<FrameRecord> remap_stream(std::span<const FrameRecord> frames, const ClockMap& map);
std::vector<ImuSample> remap_stream(std::span<const ImuSample> samples, const ClockMap& map);
RawSampleStream remap_stream(const RawSampleStream& stream, const ClockMap& map);

/// Mid-exposure instant of the middle row: t_start + (exposure + readout) / 2,
/// rounded half up.
Instant center_frame_time(const FrameRecord& frame);

struct SyncedFrame {
  /// Frame with t_start remapped into the target clock.
  FrameRecord frame;
  Instant t_center;

  friend bool operator==(const SyncedFrame&, const SyncedFrame&) = default;
};

struct SyncedSession {
  DeviceManifest manifest;
  ClockId clock;
  std::vector<SyncedFrame> frames;
  std::vector<ImuSample> imu;
  ClockMap applied_map = ClockMap::identity(ClockId{});
  std::size_t gyro_epochs_dropped = 0;
};

/// Throws kUnsyncedInput unless every instant is on `synced.clock`.
void require_single_clock(const SyncedSession& synced);

/// Fits (or skips, when clocks already agree) the camera-to-IMU map, remaps
/// and centers the frames, and builds the combined IMU stream.
///
/// `target_clock` must be the session's IMU clock. Throws kMissingClockMarks
/// when the clocks differ and no marks were recorded.
SyncedSession synchronize_session(const Session& session, const ClockId& target_clock);

/// Session form of a synchronized result, suitable for write_session. Frame
/// timestamps are the centered ones and the session is tagged
/// FrameTimeReference::kCentered so re-synchronizing does not center twice.
Session to_session(const SyncedSession& synced);

}  // namespace marslog
