#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "marslog/clock_map.hpp"
#include "marslog/time.hpp"

namespace marslog {

using Vec3 = std::array<double, 3>;

/// One synchronized inertial reading: gyro in rad/s, accel in m/s^2.
/// All six components must be finite.
struct ImuSample {
  ImuSample(Instant t, Vec3 gyro, Vec3 accel);

  Instant t;
  Vec3 gyro;
  Vec3 accel;

  friend bool operator==(const ImuSample&, const ImuSample&) = default;
};

enum class SensorKind { kGyro, kAccel };

struct StampedVec3 {
  Instant t;
  Vec3 value;

  friend bool operator==(const StampedVec3&, const StampedVec3&) = default;
};

/// A single sensor's readings before accel/gyro synchronization.
struct RawSampleStream {
  SensorKind kind = SensorKind::kGyro;
  std::vector<StampedVec3> samples;

  friend bool operator==(const RawSampleStream&, const RawSampleStream&) = default;
};

enum class MetadataSource { kMeasured, kEmpiricalDefault };

struct PixelPair {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const PixelPair&, const PixelPair&) = default;
};

/// One video frame. `t_start` is the start of exposure of the first sensor
/// row; `readout_ns` is the rolling-shutter skew (first row to last row).
class FrameRecord {
 public:
  /// Throws kInvalidArgument on negative exposure or readout.
  FrameRecord(std::uint64_t index, Instant t_start, std::int64_t exposure_ns,
              std::int64_t readout_ns, std::optional<PixelPair> focal_px = std::nullopt,
              std::optional<PixelPair> principal_px = std::nullopt,
              MetadataSource source = MetadataSource::kMeasured);

  std::uint64_t index() const noexcept { return index_; }
  const Instant& t_start() const noexcept { return t_start_; }
  std::int64_t exposure_ns() const noexcept { return exposure_ns_; }
  std::int64_t readout_ns() const noexcept { return readout_ns_; }
  const std::optional<PixelPair>& focal_px() const noexcept { return focal_px_; }
  const std::optional<PixelPair>& principal_px() const noexcept { return principal_px_; }
  MetadataSource metadata_source() const noexcept { return source_; }

  /// Copy with a different start timestamp (e.g. after a clock remap).
  FrameRecord with_t_start(Instant t) const;

  friend bool operator==(const FrameRecord&, const FrameRecord&) = default;

 private:
  std::uint64_t index_;
  Instant t_start_;
  std::int64_t exposure_ns_;
  std::int64_t readout_ns_;
  std::optional<PixelPair> focal_px_;
  std::optional<PixelPair> principal_px_;
  MetadataSource source_;
};

enum class MarkLabel { kSessionStart, kSessionEnd, kExtra };

/// Simultaneous readings of two different clocks.
class ClockCorrespondence {
 public:
  /// Throws kClockMismatch when both readings come from the same clock.
  ClockCorrespondence(MarkLabel label, Instant t_a, Instant t_b);

  MarkLabel label() const noexcept { return label_; }
  const Instant& t_a() const noexcept { return t_a_; }
  const Instant& t_b() const noexcept { return t_b_; }

  friend bool operator==(const ClockCorrespondence&, const ClockCorrespondence&) = default;

 private:
  MarkLabel label_;
  Instant t_a_;
  Instant t_b_;
};

enum class OsFamily { kAndroid, kIos, kSimulated, kUnknown };

/// How frame timestamps relate to the exposure. Recorded sessions carry the
/// start of exposure of the first row; synchronized output carries the
/// mid-exposure instant of the middle row.
enum class FrameTimeReference { kStartOfExposure, kCentered };

struct DeviceManifest {
  std::string device_name = "unknown";
  OsFamily os_family = OsFamily::kUnknown;
  std::optional<double> frame_rate_hz;
  std::optional<double> imu_rate_hz;
  /// Focus and exposure locked before capture.
  bool focus_locked = false;
  bool exposure_locked = false;
  ClockId frame_clock;
  ClockId imu_clock;
  /// Opaque video blob next to the sidecar files; never decoded.
  std::optional<std::string> video_file;

  friend bool operator==(const DeviceManifest&, const DeviceManifest&) = default;
};

/// A complete recording. Camera and IMU may run on different clocks, in which
/// case `clock_marks` relate the two.
struct Session {
  DeviceManifest manifest;
  std::vector<FrameRecord> frames;
  std::optional<RawSampleStream> gyro_raw;
  std::optional<RawSampleStream> accel_raw;
  std::optional<std::vector<ImuSample>> imu_combined;
  std::vector<ClockCorrespondence> clock_marks;
  FrameTimeReference frame_time_reference = FrameTimeReference::kStartOfExposure;
  /// Set on sessions produced by synchronization: the map that brought the
  /// frames onto the IMU clock.
  std::optional<ClockMap> applied_clock_map;

  friend bool operator==(const Session&, const Session&) = default;
};

enum class ViolationKind {
  kNonMonotonic,
  kClockMixing,
  kMissingImu,
  kNonFinite,
  kMarkClockPair,
};

struct Violation {
  ViolationKind kind;
  /// Stream or element the violation refers to, e.g. "frames[12]".
  std::string where;
  std::string message;
};

const char* to_string(ViolationKind kind);
const char* to_string(OsFamily os);
const char* to_string(MetadataSource source);
const char* to_string(MarkLabel label);

/// Every invariant violation found in the session; empty means valid.
std::vector<Violation> validate_session(const Session& session);

}  // namespace marslog
