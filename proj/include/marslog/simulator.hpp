#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "marslog/clock_map.hpp"
#include "marslog/core.hpp"

namespace marslog {

/// Device at rest: gyro zero, accel (0, 0, 9.81).
struct StaticGravity {};

/// Per-axis sinusoids sharing frequency and phase between the two sensors:
///   gyro_i(t)  = gyro_amplitude_i  * sin(2 pi f_i t + phase_i)
///   accel_i(t) = gravity_i + accel_amplitude_i * sin(2 pi f_i t + phase_i)
struct Sinusoidal {
  Vec3 gyro_amplitude{0.0, 0.0, 0.0};   // rad/s
  Vec3 accel_amplitude{0.0, 0.0, 0.0};  // m/s^2
  Vec3 frequency_hz{1.0, 1.0, 1.0};
  Vec3 phase_rad{0.0, 0.0, 0.0};
};

using MotionProfile = std::variant<StaticGravity, Sinusoidal>;

inline constexpr Vec3 kGravity{0.0, 0.0, 9.81};

Vec3 gyro_signal(const MotionProfile& motion, std::int64_t t_ns);
Vec3 accel_signal(const MotionProfile& motion, std::int64_t t_ns);

/// Upper bound of |d^2/dt^2 accel_i| over all t, per axis, in m/s^2 per s^2.
Vec3 accel_second_derivative_bound(const MotionProfile& motion);

enum class ImuLayout { kCombined, kRaw };

struct SimConfig {
  double duration_s = 10.0;
  double imu_rate_hz = 100.0;
  double frame_rate_hz = 30.0;
  /// Raw accel stream rate; defaults to half the IMU (gyro) rate.
  std::optional<double> accel_rate_hz;
  std::int64_t exposure_ns = 5'000'000;
  std::int64_t readout_ns = 30'000'000;
  std::int64_t camera_clock_offset_ns = 30'000'000;
  double camera_clock_drift_ppm = 10.0;
  std::int64_t timestamp_jitter_std_ns = 500'000;
  double dropout_prob = 0.0;
  MotionProfile motion = StaticGravity{};
  std::uint64_t seed = 0;
  /// kRaw emits gyro.csv + accel.csv instead of the combined stream.
  ImuLayout imu_layout = ImuLayout::kCombined;
  MetadataSource optics = MetadataSource::kMeasured;

  /// Throws kInvalidConfig when an invariant does not hold.
  void validate() const;
};

struct SimGroundTruth {
  /// Camera clock to IMU clock.
  ClockMap camera_to_imu = ClockMap::identity(ClockId{});
  std::int64_t camera_clock_offset_ns = 0;
  double camera_clock_drift_ppm = 0.0;
  std::uint64_t seed = 0;
  MotionProfile motion;

  /// Jitter-free IMU-clock times, one per emitted sample (same order).
  std::vector<std::int64_t> nominal_imu_ns;
  /// Jitter-free IMU-clock start-of-exposure times, one per emitted frame.
  std::vector<std::int64_t> nominal_frame_ns;
  std::size_t generated_imu = 0;
  std::size_t generated_frames = 0;
  /// +1 ns bumps needed to keep jittered timestamps strictly increasing.
  std::size_t collision_bumps = 0;
  std::int64_t imu_nominal_interval_ns = 0;
  std::int64_t frame_nominal_interval_ns = 0;
};

/// Sidecar `groundtruth.json`: clock parameters, seed and a summary of the
/// nominal times.
nlohmann::json to_json(const SimGroundTruth& truth);

inline constexpr const char* kGroundTruthFile = "groundtruth.json";

/// Camera-clock reading for a true (IMU-clock) time:
/// round_half_up((t + offset) * (1 + drift_ppm * 1e-6)).
std::int64_t true_to_camera_ns(std::int64_t t_true_ns, std::int64_t offset_ns, double drift_ppm);

/// Deterministic session: same config (seed included) gives a bit-identical
/// session.
std::pair<Session, SimGroundTruth> simulate_session(const SimConfig& config);

struct RawStreams {
  RawSampleStream gyro;
  RawSampleStream accel;
};

/// Separate gyro and accel streams; accel runs at its own rate, shifted by
/// half an accel period, so interpolation onto gyro epochs is nontrivial.
RawStreams emit_raw_streams(const SimConfig& config);

}  // namespace marslog
