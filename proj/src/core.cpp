#include "marslog/core.hpp"

#include <cmath>
#include <string>

#include "marslog/error.hpp"

namespace marslog {

namespace {

bool all_finite(const Vec3& v) {
  return std::isfinite(v[0]) && std::isfinite(v[1]) && std::isfinite(v[2]);
}

class ViolationCollector {
 public:
  void add(ViolationKind kind, std::string where, std::string message) {
    out_.push_back({kind, std::move(where), std::move(message)});
  }
  std::vector<Violation> take() { return std::move(out_); }

 private:
  std::vector<Violation> out_;
};

std::string at(const std::string& stream, std::size_t i) {
  return stream + "[" + std::to_string(i) + "]";
}

// Clock tags and strict ordering of a sequence of instants.
template <typename Range, typename TimeOf>
void check_timeline(const Range& items, TimeOf time_of, const ClockId& clock, const std::string& stream,
                    ViolationCollector& v) {
  const Instant* prev = nullptr;
  for (std::size_t i = 0; i < items.size(); ++i) {
    const Instant& t = time_of(items[i]);
    if (t.clock() != clock) {
      v.add(ViolationKind::kClockMixing, at(stream, i),
            "timestamp on clock '" + t.clock().name() + "', stream clock is '" + clock.name() + "'");
      prev = nullptr;
      continue;
    }
    if (prev != nullptr && t.ns() <= prev->ns()) {
      v.add(ViolationKind::kNonMonotonic, at(stream, i),
            "timestamp " + std::to_string(t.ns()) + " does not increase on previous " +
                std::to_string(prev->ns()));
    }
    prev = &t;
  }
}

void check_raw(const RawSampleStream& s, SensorKind expected, const std::string& name, const ClockId& clock,
               ViolationCollector& v) {
  if (s.kind != expected) {
    v.add(ViolationKind::kMissingImu, name, "stream holds the wrong sensor kind");
  }
  check_timeline(s.samples, [](const StampedVec3& x) -> const Instant& { return x.t; }, clock, name, v);
  for (std::size_t i = 0; i < s.samples.size(); ++i) {
    if (!all_finite(s.samples[i].value)) v.add(ViolationKind::kNonFinite, at(name, i), "non-finite value");
  }
}

}  // namespace

ImuSample::ImuSample(Instant t_, Vec3 gyro_, Vec3 accel_) : t(std::move(t_)), gyro(gyro_), accel(accel_) {
  if (!all_finite(gyro) || !all_finite(accel)) {
    throw Error(ErrorCode::kInvalidArgument, "IMU sample components must be finite");
  }
}

FrameRecord::FrameRecord(std::uint64_t index, Instant t_start, std::int64_t exposure_ns,
                         std::int64_t readout_ns, std::optional<PixelPair> focal_px,
                         std::optional<PixelPair> principal_px, MetadataSource source)
    : index_(index),
      t_start_(std::move(t_start)),
      exposure_ns_(exposure_ns),
      readout_ns_(readout_ns),
      focal_px_(focal_px),
      principal_px_(principal_px),
      source_(source) {
  if (exposure_ns_ < 0) {
    throw Error(ErrorCode::kInvalidArgument, "frame " + std::to_string(index) + ": negative exposure_ns");
  }
  if (readout_ns_ < 0) {
    throw Error(ErrorCode::kInvalidArgument, "frame " + std::to_string(index) + ": negative readout_ns");
  }
}

FrameRecord FrameRecord::with_t_start(Instant t) const {
  FrameRecord copy = *this;
  copy.t_start_ = std::move(t);
  return copy;
}

ClockCorrespondence::ClockCorrespondence(MarkLabel label, Instant t_a, Instant t_b)
    : label_(label), t_a_(std::move(t_a)), t_b_(std::move(t_b)) {
  if (t_a_.clock() == t_b_.clock()) {
    throw Error(ErrorCode::kClockMismatch,
                "clock correspondence needs two different clocks, both are '" + t_a_.clock().name() + "'");
  }
}

const char* to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::kNonMonotonic: return "non-monotonic";
    case ViolationKind::kClockMixing: return "clock-mixing";
    case ViolationKind::kMissingImu: return "missing-imu";
    case ViolationKind::kNonFinite: return "non-finite";
    case ViolationKind::kMarkClockPair: return "mark-clock-pair";
  }
  return "unknown";
}

const char* to_string(OsFamily os) {
  switch (os) {
    case OsFamily::kAndroid: return "android";
    case OsFamily::kIos: return "ios";
    case OsFamily::kSimulated: return "simulated";
    case OsFamily::kUnknown: return "unknown";
  }
  return "unknown";
}

const char* to_string(MetadataSource source) {
  return source == MetadataSource::kMeasured ? "measured" : "empirical";
}

const char* to_string(MarkLabel label) {
  switch (label) {
    case MarkLabel::kSessionStart: return "session-start";
    case MarkLabel::kSessionEnd: return "session-end";
    case MarkLabel::kExtra: return "extra";
  }
  return "extra";
}

std::vector<Violation> validate_session(const Session& session) {
  ViolationCollector v;
  const DeviceManifest& m = session.manifest;

  check_timeline(session.frames, [](const FrameRecord& f) -> const Instant& { return f.t_start(); },
                 m.frame_clock, "frames", v);
  for (std::size_t i = 1; i < session.frames.size(); ++i) {
    if (session.frames[i].index() <= session.frames[i - 1].index()) {
      v.add(ViolationKind::kNonMonotonic, at("frames", i),
            "frame index " + std::to_string(session.frames[i].index()) + " does not increase");
    }
  }

  const bool has_raw = session.gyro_raw.has_value() && session.accel_raw.has_value();
  if (session.gyro_raw.has_value() != session.accel_raw.has_value()) {
    v.add(ViolationKind::kMissingImu, session.gyro_raw ? "accel" : "gyro",
          "raw gyro and accel streams must be present together");
  }
  if (!has_raw && !session.imu_combined) {
    v.add(ViolationKind::kMissingImu, "imu", "session has no IMU data");
  }
  if (session.imu_combined) {
    const auto& imu = *session.imu_combined;
    if (imu.empty()) v.add(ViolationKind::kMissingImu, "imu", "combined IMU stream is empty");
    check_timeline(imu, [](const ImuSample& s) -> const Instant& { return s.t; }, m.imu_clock, "imu", v);
  }
  if (session.gyro_raw) {
    if (session.gyro_raw->samples.empty()) v.add(ViolationKind::kMissingImu, "gyro", "gyro stream is empty");
    check_raw(*session.gyro_raw, SensorKind::kGyro, "gyro", m.imu_clock, v);
  }
  if (session.accel_raw) {
    if (session.accel_raw->samples.empty()) v.add(ViolationKind::kMissingImu, "accel", "accel stream is empty");
    check_raw(*session.accel_raw, SensorKind::kAccel, "accel", m.imu_clock, v);
  }

  // Marks relate the frame clock and the IMU clock, in either order, and all
  // use the same pair.
  for (std::size_t i = 0; i < session.clock_marks.size(); ++i) {
    const auto& mark = session.clock_marks[i];
    const ClockId& a = mark.t_a().clock();
    const ClockId& b = mark.t_b().clock();
    const ClockId& a0 = session.clock_marks.front().t_a().clock();
    const ClockId& b0 = session.clock_marks.front().t_b().clock();
    if (a != a0 || b != b0) {
      v.add(ViolationKind::kMarkClockPair, at("clock_marks", i), "marks use different clock pairs");
      continue;
    }
    const bool forward = a == m.frame_clock && b == m.imu_clock;
    const bool backward = a == m.imu_clock && b == m.frame_clock;
    if (!forward && !backward) {
      v.add(ViolationKind::kMarkClockPair, at("clock_marks", i),
            "mark relates '" + a.name() + "' and '" + b.name() + "', not the frame and IMU clocks");
    }
  }

  if (session.applied_clock_map && session.applied_clock_map->to() != m.imu_clock) {
    v.add(ViolationKind::kClockMixing, "applied_clock_map", "applied map does not target the IMU clock");
  }
  return v.take();
}

}  // namespace marslog
