#include "marslog/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "marslog/error.hpp"

namespace marslog {

namespace {

const ClockId kImuClock{"boottime"};
const ClockId kCameraClock{"monotonic"};

constexpr PixelPair kSimFocal{1400.0, 1400.0};
constexpr PixelPair kSimPrincipal{640.0, 360.0};

// SplitMix64 (Steele, Lea, Flood 2014); derives independent engine seeds for
// each generated stream from the user seed.
std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

enum class StreamTag : std::uint64_t { kImu = 1, kFrames = 2, kAccel = 3 };

/// Mersenne Twister (std::mt19937_64, fully specified by the standard) with
/// hand-written uniform and Gaussian draws, so sequences do not depend on the
/// standard library's distribution implementations.
class SimRandom {
 public:
  SimRandom(std::uint64_t seed, StreamTag tag)
      : engine_(splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(tag)))) {}

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Standard normal via Marsaglia's polar method, rejected outside +-4.
  double truncated_normal() {
    while (true) {
      if (has_spare_) {
        has_spare_ = false;
        if (std::abs(spare_) <= 4.0) return spare_;
        continue;
      }
      double u, v, s;
      do {
        u = 2.0 * uniform() - 1.0;
        v = 2.0 * uniform() - 1.0;
        s = u * u + v * v;
      } while (s >= 1.0 || s == 0.0);
      const double f = std::sqrt(-2.0 * std::log(s) / s);
      spare_ = v * f;
      has_spare_ = true;
      const double z = u * f;
      if (std::abs(z) <= 4.0) return z;
    }
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

struct Timeline {
  std::vector<std::int64_t> nominal;  // kept samples only
  std::vector<std::int64_t> actual;
  std::vector<std::uint64_t> index;   // k of each kept sample
  std::size_t generated = 0;
  std::size_t bumps = 0;
};

// Resolves collisions after sorting: each value must exceed its predecessor.
std::size_t bump_strictly_increasing(std::vector<std::int64_t>& t) {
  std::size_t bumps = 0;
  for (std::size_t i = 1; i < t.size(); ++i) {
    if (t[i] <= t[i - 1]) {
      bumps += static_cast<std::size_t>(t[i - 1] + 1 - t[i]);
      t[i] = t[i - 1] + 1;
    }
  }
  return bumps;
}

std::int64_t duration_ns(const SimConfig& c) { return round_half_up(c.duration_s * 1e9); }

// Epochs (k + phase) / rate below the duration, jittered and thinned.
Timeline make_timeline(const SimConfig& c, double rate_hz, double phase, StreamTag tag) {
  SimRandom rng(c.seed, tag);
  const std::int64_t end = duration_ns(c);
  const double sigma = static_cast<double>(c.timestamp_jitter_std_ns);

  Timeline tl;
  for (std::uint64_t k = 0;; ++k) {
    const std::int64_t nominal = round_half_up((static_cast<double>(k) + phase) * 1e9 / rate_hz);
    if (nominal >= end) break;
    ++tl.generated;
    const bool dropped = rng.uniform() < c.dropout_prob;
    const std::int64_t jitter = sigma > 0.0 ? round_half_up(rng.truncated_normal() * sigma) : 0;
    if (dropped) continue;
    tl.nominal.push_back(nominal);
    tl.actual.push_back(nominal + jitter);
    tl.index.push_back(k);
  }
  std::sort(tl.actual.begin(), tl.actual.end());
  tl.bumps = bump_strictly_increasing(tl.actual);
  return tl;
}

double accel_rate(const SimConfig& c) { return c.accel_rate_hz.value_or(c.imu_rate_hz / 2.0); }

}  // namespace

Vec3 gyro_signal(const MotionProfile& motion, std::int64_t t_ns) {
  if (const auto* s = std::get_if<Sinusoidal>(&motion)) {
    const double t = static_cast<double>(t_ns) * 1e-9;
    Vec3 out;
    for (int i = 0; i < 3; ++i) {
      out[i] = s->gyro_amplitude[i] * std::sin(2.0 * std::numbers::pi * s->frequency_hz[i] * t + s->phase_rad[i]);
    }
    return out;
  }
  return {0.0, 0.0, 0.0};
}

Vec3 accel_signal(const MotionProfile& motion, std::int64_t t_ns) {
  if (const auto* s = std::get_if<Sinusoidal>(&motion)) {
    const double t = static_cast<double>(t_ns) * 1e-9;
    Vec3 out;
    for (int i = 0; i < 3; ++i) {
      out[i] = kGravity[i] +
               s->accel_amplitude[i] * std::sin(2.0 * std::numbers::pi * s->frequency_hz[i] * t + s->phase_rad[i]);
    }
    return out;
  }
  return kGravity;
}

Vec3 accel_second_derivative_bound(const MotionProfile& motion) {
  if (const auto* s = std::get_if<Sinusoidal>(&motion)) {
    Vec3 out;
    for (int i = 0; i < 3; ++i) {
      const double w = 2.0 * std::numbers::pi * s->frequency_hz[i];
      out[i] = std::abs(s->accel_amplitude[i]) * w * w;
    }
    return out;
  }
  return {0.0, 0.0, 0.0};
}

void SimConfig::validate() const {
  auto fail = [](const std::string& why) { throw Error(ErrorCode::kInvalidConfig, why); };
  if (!std::isfinite(duration_s) || duration_s < 0.0) fail("duration_s must be >= 0");
  if (duration_s > 1e6) fail("duration_s too large");
  if (!std::isfinite(imu_rate_hz) || imu_rate_hz <= 0.0) fail("imu_rate_hz must be > 0");
  if (!std::isfinite(frame_rate_hz) || frame_rate_hz <= 0.0) fail("frame_rate_hz must be > 0");
  if (accel_rate_hz && (!std::isfinite(*accel_rate_hz) || *accel_rate_hz <= 0.0)) fail("accel_rate_hz must be > 0");
  if (exposure_ns < 0) fail("exposure_ns must be >= 0");
  if (readout_ns < 0) fail("readout_ns must be >= 0");
  if (!std::isfinite(camera_clock_drift_ppm) || camera_clock_drift_ppm <= -1e6) {
    fail("camera_clock_drift_ppm must be finite and > -1e6");
  }
  if (timestamp_jitter_std_ns < 0) fail("timestamp_jitter_std_ns must be >= 0");
  if (!(dropout_prob >= 0.0 && dropout_prob < 1.0)) fail("dropout_prob must be in [0, 1)");
  if (const auto* s = std::get_if<Sinusoidal>(&motion)) {
    for (int i = 0; i < 3; ++i) {
      if (!std::isfinite(s->gyro_amplitude[i]) || !std::isfinite(s->accel_amplitude[i]) ||
          !std::isfinite(s->frequency_hz[i]) || !std::isfinite(s->phase_rad[i])) {
        fail("sinusoidal motion parameters must be finite");
      }
    }
  }
}

std::int64_t true_to_camera_ns(std::int64_t t_true_ns, std::int64_t offset_ns, double drift_ppm) {
  const std::int64_t base = t_true_ns + offset_ns;
  return base + round_half_up(static_cast<double>(base) * (drift_ppm * 1e-6));
}

RawStreams emit_raw_streams(const SimConfig& config) {
  config.validate();
  const Timeline gyro_tl = make_timeline(config, config.imu_rate_hz, 0.0, StreamTag::kImu);
  const Timeline accel_tl = make_timeline(config, accel_rate(config), 0.5, StreamTag::kAccel);

  RawStreams out{{SensorKind::kGyro, {}}, {SensorKind::kAccel, {}}};
  out.gyro.samples.reserve(gyro_tl.actual.size());
  for (std::int64_t t : gyro_tl.actual) out.gyro.samples.push_back({Instant(t, kImuClock), gyro_signal(config.motion, t)});
  out.accel.samples.reserve(accel_tl.actual.size());
  for (std::int64_t t : accel_tl.actual) {
    out.accel.samples.push_back({Instant(t, kImuClock), accel_signal(config.motion, t)});
  }
  return out;
}

std::pair<Session, SimGroundTruth> simulate_session(const SimConfig& config) {
  config.validate();
  const double drift = config.camera_clock_drift_ppm;
  const std::int64_t offset = config.camera_clock_offset_ns;
  const std::int64_t end = duration_ns(config);

  Session s;
  s.manifest.device_name = "marslog-simulator";
  s.manifest.os_family = OsFamily::kSimulated;
  s.manifest.frame_rate_hz = config.frame_rate_hz;
  s.manifest.imu_rate_hz = config.imu_rate_hz;
  s.manifest.focus_locked = true;
  s.manifest.exposure_locked = true;
  s.manifest.frame_clock = kCameraClock;
  s.manifest.imu_clock = kImuClock;

  SimGroundTruth truth;
  truth.camera_to_imu = ClockMap(kCameraClock, kImuClock, 1.0 / (1.0 + drift * 1e-6), -offset);
  truth.camera_clock_offset_ns = offset;
  truth.camera_clock_drift_ppm = drift;
  truth.seed = config.seed;
  truth.motion = config.motion;
  truth.imu_nominal_interval_ns = round_half_up(1e9 / config.imu_rate_hz);
  truth.frame_nominal_interval_ns = round_half_up(1e9 / config.frame_rate_hz);

  // IMU: gyro epochs drive both layouts.
  const Timeline imu_tl = make_timeline(config, config.imu_rate_hz, 0.0, StreamTag::kImu);
  truth.nominal_imu_ns = imu_tl.nominal;
  truth.generated_imu = imu_tl.generated;
  truth.collision_bumps += imu_tl.bumps;
  if (config.imu_layout == ImuLayout::kCombined) {
    std::vector<ImuSample> imu;
    imu.reserve(imu_tl.actual.size());
    for (std::int64_t t : imu_tl.actual) {
      imu.emplace_back(Instant(t, kImuClock), gyro_signal(config.motion, t), accel_signal(config.motion, t));
    }
    s.imu_combined = std::move(imu);
  } else {
    RawStreams raw = emit_raw_streams(config);
    truth.collision_bumps += make_timeline(config, accel_rate(config), 0.5, StreamTag::kAccel).bumps;
    s.gyro_raw = std::move(raw.gyro);
    s.accel_raw = std::move(raw.accel);
  }

  // Frames: sampled on the true clock, stamped on the camera clock.
  Timeline frame_tl = make_timeline(config, config.frame_rate_hz, 0.0, StreamTag::kFrames);
  std::vector<std::int64_t> cam(frame_tl.actual.size());
  for (std::size_t i = 0; i < cam.size(); ++i) cam[i] = true_to_camera_ns(frame_tl.actual[i], offset, drift);
  truth.collision_bumps += frame_tl.bumps + bump_strictly_increasing(cam);
  truth.nominal_frame_ns = frame_tl.nominal;
  truth.generated_frames = frame_tl.generated;

  const bool measured = config.optics == MetadataSource::kMeasured;
  s.frames.reserve(cam.size());
  for (std::size_t i = 0; i < cam.size(); ++i) {
    s.frames.emplace_back(frame_tl.index[i], Instant(cam[i], kCameraClock), config.exposure_ns, config.readout_ns,
                          kSimFocal, kSimPrincipal,
                          measured ? MetadataSource::kMeasured : MetadataSource::kEmpiricalDefault);
  }

  s.clock_marks.emplace_back(MarkLabel::kSessionStart, Instant(true_to_camera_ns(0, offset, drift), kCameraClock),
                             Instant(0, kImuClock));
  s.clock_marks.emplace_back(MarkLabel::kSessionEnd, Instant(true_to_camera_ns(end, offset, drift), kCameraClock),
                             Instant(end, kImuClock));
  return {std::move(s), std::move(truth)};
}

nlohmann::json to_json(const SimGroundTruth& truth) {
  using nlohmann::json;
  auto summary = [](const std::vector<std::int64_t>& nominal, std::size_t generated, std::int64_t interval) {
    json j = {{"generated", generated}, {"emitted", nominal.size()}, {"interval_ns", interval}};
    j["first_ns"] = nominal.empty() ? json() : json(nominal.front());
    j["last_ns"] = nominal.empty() ? json() : json(nominal.back());
    return j;
  };

  json motion;
  if (const auto* s = std::get_if<Sinusoidal>(&truth.motion)) {
    motion = {{"type", "sinusoidal"},
              {"gyro_amplitude", s->gyro_amplitude},
              {"accel_amplitude", s->accel_amplitude},
              {"frequency_hz", s->frequency_hz},
              {"phase_rad", s->phase_rad}};
  } else {
    motion = {{"type", "static-gravity"}};
  }
  motion["gravity"] = kGravity;

  const ClockMap& m = truth.camera_to_imu;
  return {
      {"camera_to_imu",
       {{"from", m.from().name()}, {"to", m.to().name()}, {"scale", m.scale()}, {"offset_ns", m.offset_ns()}}},
      {"camera_clock_offset_ns", truth.camera_clock_offset_ns},
      {"camera_clock_drift_ppm", truth.camera_clock_drift_ppm},
      {"seed", truth.seed},
      {"motion", std::move(motion)},
      {"nominal_times",
       {{"imu", summary(truth.nominal_imu_ns, truth.generated_imu, truth.imu_nominal_interval_ns)},
        {"frames", summary(truth.nominal_frame_ns, truth.generated_frames, truth.frame_nominal_interval_ns)}}},
      {"collision_bumps", truth.collision_bumps},
  };
}

}  // namespace marslog
