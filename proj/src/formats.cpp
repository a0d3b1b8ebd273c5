#include "marslog/formats.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

#include <nlohmann/json.hpp>

#include "csv.hpp"
#include "marslog/error.hpp"

namespace marslog {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw Error(ErrorCode::kInvalidArgument, "cannot format double");
  return {buf, ptr};
}

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kMissingFile, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoFailure, "cannot open " + path.string() + " for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.close();
  if (!out) throw Error(ErrorCode::kIoFailure, "failed writing " + path.string());
}

void make_dirs(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw Error(ErrorCode::kIoFailure, "cannot create directory " + dir.string() + ": " + ec.message());
  }
}

// ---------------------------------------------------------------------------
// Enumerations as they appear on disk.

OsFamily parse_os(const std::string& s) {
  if (s == "android") return OsFamily::kAndroid;
  if (s == "ios") return OsFamily::kIos;
  if (s == "simulated") return OsFamily::kSimulated;
  if (s == "unknown") return OsFamily::kUnknown;
  throw MalformedLineError(layout::kManifest, 1, "unknown os_family '" + s + "'");
}

const char* reference_name(FrameTimeReference r) {
  return r == FrameTimeReference::kCentered ? "centered" : "start-of-exposure";
}

FrameTimeReference parse_reference(const std::string& s) {
  if (s == "start-of-exposure") return FrameTimeReference::kStartOfExposure;
  if (s == "centered") return FrameTimeReference::kCentered;
  throw MalformedLineError(layout::kManifest, 1, "unknown frame_time_reference '" + s + "'");
}

MarkLabel parse_label(std::string_view s, const csv::Reader& r) {
  if (s == "session-start") return MarkLabel::kSessionStart;
  if (s == "session-end") return MarkLabel::kSessionEnd;
  if (s == "extra") return MarkLabel::kExtra;
  r.fail("unknown mark label '" + std::string(s) + "'");
}

// ---------------------------------------------------------------------------
// Manifest

struct ManifestFiles {
  std::optional<std::string> frames, imu, gyro, accel, clockmarks;
};

struct ParsedManifest {
  DeviceManifest device;
  ManifestFiles files;
  std::optional<ClockId> marks_a, marks_b;
  FrameTimeReference reference = FrameTimeReference::kStartOfExposure;
  std::optional<ClockMap> applied;
};

// Line number of a byte offset, for parse errors.
std::size_t line_of(const std::string& text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

ParsedManifest parse_manifest(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw MalformedLineError(layout::kManifest, line_of(text, e.byte), "invalid JSON");
  }

  ParsedManifest out;
  try {
    const json& device = j.at("device");
    out.device.device_name = device.at("name").get<std::string>();
    out.device.os_family = parse_os(device.at("os_family").get<std::string>());

    const json& rates = j.at("nominal_rates");
    if (!rates.at("frame_hz").is_null()) out.device.frame_rate_hz = rates.at("frame_hz").get<double>();
    if (!rates.at("imu_hz").is_null()) out.device.imu_rate_hz = rates.at("imu_hz").get<double>();

    const json& camera = j.at("camera");
    out.device.focus_locked = camera.at("focus_locked").get<bool>();
    out.device.exposure_locked = camera.at("exposure_locked").get<bool>();
    out.reference = parse_reference(camera.at("frame_time_reference").get<std::string>());

    const json& clocks = j.at("clocks");
    out.device.frame_clock = ClockId(clocks.at("frames").get<std::string>());
    out.device.imu_clock = ClockId(clocks.at("imu").get<std::string>());
    if (clocks.contains("marks_a")) out.marks_a = ClockId(clocks.at("marks_a").get<std::string>());
    if (clocks.contains("marks_b")) out.marks_b = ClockId(clocks.at("marks_b").get<std::string>());

    const json& files = j.at("files");
    auto file = [&](const char* key) -> std::optional<std::string> {
      if (!files.contains(key)) return std::nullopt;
      return files.at(key).get<std::string>();
    };
    out.files = {file("frames"), file("imu"), file("gyro"), file("accel"), file("clockmarks")};
    out.device.video_file = file("video");

    if (j.contains("applied_clock_map")) {
      const json& m = j.at("applied_clock_map");
      out.applied = ClockMap(ClockId(m.at("from").get<std::string>()), ClockId(m.at("to").get<std::string>()),
                             m.at("scale").get<double>(), m.at("offset_ns").get<std::int64_t>());
    }
  } catch (const json::exception& e) {
    throw MalformedLineError(layout::kManifest, 1, e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kMalformedLine) throw;
    throw MalformedLineError(layout::kManifest, 1, e.what());
  }
  if (!out.files.frames) throw MalformedLineError(layout::kManifest, 1, "files.frames is required");
  return out;
}

json manifest_json(const Session& s, bool with_marks) {
  const DeviceManifest& m = s.manifest;
  json files = {{"frames", layout::kFrames}};
  if (s.imu_combined) files["imu"] = layout::kImu;
  if (s.gyro_raw) files["gyro"] = layout::kGyro;
  if (s.accel_raw) files["accel"] = layout::kAccel;
  if (with_marks) files["clockmarks"] = layout::kClockMarks;
  if (m.video_file) files["video"] = *m.video_file;

  json clocks = {{"frames", m.frame_clock.name()}, {"imu", m.imu_clock.name()}};
  if (with_marks) {
    clocks["marks_a"] = s.clock_marks.front().t_a().clock().name();
    clocks["marks_b"] = s.clock_marks.front().t_b().clock().name();
  }

  json j = {
      {"format", "marslog-session"},
      {"version", 1},
      {"device", {{"name", m.device_name}, {"os_family", to_string(m.os_family)}}},
      {"nominal_rates",
       {{"frame_hz", m.frame_rate_hz ? json(*m.frame_rate_hz) : json()},
        {"imu_hz", m.imu_rate_hz ? json(*m.imu_rate_hz) : json()}}},
      {"camera",
       {{"focus_locked", m.focus_locked},
        {"exposure_locked", m.exposure_locked},
        {"frame_time_reference", reference_name(s.frame_time_reference)}}},
      {"clocks", std::move(clocks)},
      {"files", std::move(files)},
  };
  if (s.applied_clock_map) {
    const ClockMap& c = *s.applied_clock_map;
    j["applied_clock_map"] = {
        {"from", c.from().name()}, {"to", c.to().name()}, {"scale", c.scale()}, {"offset_ns", c.offset_ns()}};
  }
  return j;
}

// ---------------------------------------------------------------------------
// Stream files

template <typename T>
void require_increasing(const csv::Reader& r, std::optional<T>& prev, T now, const char* what) {
  if (prev && now <= *prev) {
    throw Error(ErrorCode::kNonMonotonicTimestamp, r.file() + ":" + std::to_string(r.line()) + ": " + what + " " +
                                                       std::to_string(now) + " does not increase on " +
                                                       std::to_string(*prev));
  }
  prev = now;
}

std::vector<FrameRecord> read_frames(const std::string& label, std::string content, const ClockId& clock) {
  csv::Reader r(label, std::move(content), layout::kFramesHeader);
  std::vector<FrameRecord> out;
  std::vector<std::string_view> f;
  std::optional<std::uint64_t> prev_index;
  std::optional<std::int64_t> prev_t;
  while (r.next(f)) {
    const std::uint64_t index = r.to_uint(f[0], "index");
    const std::int64_t t = r.to_int(f[1], "t_start_ns");
    const std::int64_t exposure = r.to_int(f[2], "exposure_ns");
    const std::int64_t readout = r.to_int(f[3], "readout_ns");
    if (exposure < 0) r.fail("negative exposure_ns");
    if (readout < 0) r.fail("negative readout_ns");
    auto pair = [&](std::size_t col, const char* nx, const char* ny) -> std::optional<PixelPair> {
      const auto x = r.to_optional_double(f[col], nx);
      const auto y = r.to_optional_double(f[col + 1], ny);
      if (x.has_value() != y.has_value()) r.fail(std::string(nx) + "/" + ny + " must be both set or both empty");
      if (!x) return std::nullopt;
      return PixelPair{*x, *y};
    };
    const auto focal = pair(4, "fx", "fy");
    const auto principal = pair(6, "cx", "cy");
    MetadataSource source;
    if (f[8] == "measured") {
      source = MetadataSource::kMeasured;
    } else if (f[8] == "empirical") {
      source = MetadataSource::kEmpiricalDefault;
    } else {
      r.fail("source must be 'measured' or 'empirical', got '" + std::string(f[8]) + "'");
    }
    require_increasing(r, prev_index, index, "frame index");
    require_increasing(r, prev_t, t, "t_start_ns");
    out.emplace_back(index, Instant(t, clock), exposure, readout, focal, principal, source);
  }
  return out;
}

std::vector<ImuSample> read_imu(const std::string& label, std::string content, const ClockId& clock) {
  csv::Reader r(label, std::move(content), layout::kImuHeader);
  std::vector<ImuSample> out;
  std::vector<std::string_view> f;
  std::optional<std::int64_t> prev_t;
  static constexpr const char* kNames[] = {"gx", "gy", "gz", "ax", "ay", "az"};
  while (r.next(f)) {
    const std::int64_t t = r.to_int(f[0], "t_ns");
    double v[6];
    for (int k = 0; k < 6; ++k) {
      v[k] = r.to_double(f[static_cast<std::size_t>(k) + 1], kNames[k]);
      if (!std::isfinite(v[k])) r.fail(std::string("non-finite ") + kNames[k]);
    }
    require_increasing(r, prev_t, t, "t_ns");
    out.emplace_back(Instant(t, clock), Vec3{v[0], v[1], v[2]}, Vec3{v[3], v[4], v[5]});
  }
  return out;
}

RawSampleStream read_raw(const std::string& label, std::string content, const ClockId& clock, SensorKind kind) {
  csv::Reader r(label, std::move(content), layout::kRawHeader);
  RawSampleStream out{kind, {}};
  std::vector<std::string_view> f;
  std::optional<std::int64_t> prev_t;
  while (r.next(f)) {
    const std::int64_t t = r.to_int(f[0], "t_ns");
    const Vec3 v{r.to_double(f[1], "x"), r.to_double(f[2], "y"), r.to_double(f[3], "z")};
    for (double x : v) {
      if (!std::isfinite(x)) r.fail("non-finite value");
    }
    require_increasing(r, prev_t, t, "t_ns");
    out.samples.push_back({Instant(t, clock), v});
  }
  return out;
}

std::vector<ClockCorrespondence> read_marks(const std::string& label, std::string content, const ClockId& a,
                                            const ClockId& b) {
  csv::Reader r(label, std::move(content), layout::kClockMarksHeader);
  std::vector<ClockCorrespondence> out;
  std::vector<std::string_view> f;
  while (r.next(f)) {
    const MarkLabel l = parse_label(f[0], r);
    out.emplace_back(l, Instant(r.to_int(f[1], "t_a_ns"), a), Instant(r.to_int(f[2], "t_b_ns"), b));
  }
  return out;
}

void append_vec(std::string& out, const Vec3& v) {
  for (double x : v) {
    out += ',';
    out += format_double(x);
  }
}

void require_clock(const Instant& t, const ClockId& clock, const char* stream) {
  if (t.clock() != clock) {
    throw Error(ErrorCode::kClockMismatch, std::string(stream) + " timestamp on clock '" + t.clock().name() +
                                               "', manifest declares '" + clock.name() + "'");
  }
}

std::string frames_csv(const Session& s) {
  std::string out = layout::kFramesHeader;
  out += '\n';
  for (const auto& f : s.frames) {
    require_clock(f.t_start(), s.manifest.frame_clock, "frame");
    out += std::to_string(f.index());
    out += ',' + std::to_string(f.t_start().ns());
    out += ',' + std::to_string(f.exposure_ns());
    out += ',' + std::to_string(f.readout_ns());
    for (const auto* p : {&f.focal_px(), &f.principal_px()}) {
      if (*p) {
        out += ',' + format_double((*p)->x) + ',' + format_double((*p)->y);
      } else {
        out += ",,";
      }
    }
    out += ',';
    out += to_string(f.metadata_source());
    out += '\n';
  }
  return out;
}

std::string imu_csv(const Session& s) {
  std::string out = layout::kImuHeader;
  out += '\n';
  for (const auto& x : *s.imu_combined) {
    require_clock(x.t, s.manifest.imu_clock, "IMU");
    out += std::to_string(x.t.ns());
    append_vec(out, x.gyro);
    append_vec(out, x.accel);
    out += '\n';
  }
  return out;
}

std::string raw_csv(const RawSampleStream& stream, const ClockId& clock) {
  std::string out = layout::kRawHeader;
  out += '\n';
  for (const auto& x : stream.samples) {
    require_clock(x.t, clock, stream.kind == SensorKind::kGyro ? "gyro" : "accel");
    out += std::to_string(x.t.ns());
    append_vec(out, x.value);
    out += '\n';
  }
  return out;
}

std::string marks_csv(const Session& s) {
  std::string out = layout::kClockMarksHeader;
  out += '\n';
  const ClockId& a = s.clock_marks.front().t_a().clock();
  const ClockId& b = s.clock_marks.front().t_b().clock();
  for (const auto& m : s.clock_marks) {
    if (m.t_a().clock() != a || m.t_b().clock() != b) {
      throw Error(ErrorCode::kClockMismatch, "clock marks relate different clock pairs");
    }
    out += std::string(to_string(m.label())) + ',' + std::to_string(m.t_a().ns()) + ',' +
           std::to_string(m.t_b().ns()) + '\n';
  }
  return out;
}

}  // namespace

Session read_session(const fs::path& root) {
  const fs::path manifest_path = root / layout::kManifest;
  if (!fs::is_regular_file(manifest_path)) {
    throw Error(ErrorCode::kMissingFile, "missing " + manifest_path.string());
  }
  const ParsedManifest pm = parse_manifest(read_file(manifest_path));

  // Every layout file on disk must be named by the manifest.
  const std::pair<const char*, const std::optional<std::string>*> known[] = {
      {layout::kImu, &pm.files.imu},
      {layout::kGyro, &pm.files.gyro},
      {layout::kAccel, &pm.files.accel},
      {layout::kClockMarks, &pm.files.clockmarks},
  };
  for (const auto& [name, entry] : known) {
    if (!*entry && fs::exists(root / name)) {
      throw MalformedLineError(layout::kManifest, 1, std::string(name) + " exists but the manifest does not name it");
    }
  }

  auto load = [&](const std::string& name) {
    const fs::path p = root / name;
    if (!fs::is_regular_file(p)) throw Error(ErrorCode::kMissingFile, "missing " + p.string());
    return read_file(p);
  };

  Session s;
  s.manifest = pm.device;
  s.frame_time_reference = pm.reference;
  s.applied_clock_map = pm.applied;
  s.frames = read_frames(*pm.files.frames, load(*pm.files.frames), s.manifest.frame_clock);

  if (pm.files.imu) s.imu_combined = read_imu(*pm.files.imu, load(*pm.files.imu), s.manifest.imu_clock);
  if (pm.files.gyro) {
    s.gyro_raw = read_raw(*pm.files.gyro, load(*pm.files.gyro), s.manifest.imu_clock, SensorKind::kGyro);
  }
  if (pm.files.accel) {
    s.accel_raw = read_raw(*pm.files.accel, load(*pm.files.accel), s.manifest.imu_clock, SensorKind::kAccel);
  }

  if (pm.files.clockmarks) {
    if (!pm.marks_a || !pm.marks_b) {
      throw MalformedLineError(layout::kManifest, 1, "clockmarks.csv needs clocks.marks_a and clocks.marks_b");
    }
    const ClockId& a = *pm.marks_a;
    const ClockId& b = *pm.marks_b;
    const DeviceManifest& m = s.manifest;
    const bool forward = a == m.frame_clock && b == m.imu_clock;
    const bool backward = a == m.imu_clock && b == m.frame_clock;
    if (a == b || (!forward && !backward)) {
      throw Error(ErrorCode::kClockMismatch, "clock marks relate '" + a.name() + "' and '" + b.name() +
                                                 "', expected the frame clock '" + m.frame_clock.name() +
                                                 "' and IMU clock '" + m.imu_clock.name() + "'");
    }
    s.clock_marks = read_marks(*pm.files.clockmarks, load(*pm.files.clockmarks), a, b);
  }
  return s;
}

void write_session(const Session& session, const fs::path& root) {
  const bool with_marks = !session.clock_marks.empty();
  // Serialize everything before touching the disk so clock errors leave no
  // partial directory behind.
  const std::string manifest = manifest_json(session, with_marks).dump(2) + "\n";
  const std::string frames = frames_csv(session);
  const std::optional<std::string> imu = session.imu_combined ? std::optional(imu_csv(session)) : std::nullopt;
  const std::optional<std::string> gyro =
      session.gyro_raw ? std::optional(raw_csv(*session.gyro_raw, session.manifest.imu_clock)) : std::nullopt;
  const std::optional<std::string> accel =
      session.accel_raw ? std::optional(raw_csv(*session.accel_raw, session.manifest.imu_clock)) : std::nullopt;
  const std::optional<std::string> marks = with_marks ? std::optional(marks_csv(session)) : std::nullopt;

  make_dirs(root);
  const std::pair<const char*, const std::optional<std::string>*> optional_files[] = {
      {layout::kImu, &imu}, {layout::kGyro, &gyro}, {layout::kAccel, &accel}, {layout::kClockMarks, &marks}};
  for (const auto& [name, content] : optional_files) {
    const fs::path p = root / name;
    if (*content) {
      write_file(p, **content);
    } else {
      std::error_code ec;
      fs::remove(p, ec);  // stale file from an earlier write
      if (ec) throw Error(ErrorCode::kIoFailure, "cannot remove stale " + p.string());
    }
  }
  write_file(root / layout::kFrames, frames);
  write_file(root / layout::kManifest, manifest);
}

void export_slam_layout(const SyncedSession& synced, const fs::path& root) {
  require_single_clock(synced);

  std::string imu = "timestamp_ns,wx,wy,wz,ax,ay,az\n";
  for (const auto& s : synced.imu) {
    imu += std::to_string(s.t.ns());
    append_vec(imu, s.gyro);
    append_vec(imu, s.accel);
    imu += '\n';
  }

  std::string cam = "timestamp_ns,frame_index\n";
  for (const auto& f : synced.frames) cam += std::to_string(f.t_center.ns()) + ',' + std::to_string(f.frame.index()) + '\n';

  // Camera metadata. Intrinsics come from the first frame that carries them.
  std::ostringstream yaml;
  yaml << "# camera metadata exported by marslog\n";
  yaml << "sensor_type: camera\n";
  yaml << "device: \"" << synced.manifest.device_name << "\"\n";
  yaml << "os_family: " << to_string(synced.manifest.os_family) << "\n";
  yaml << "clock: " << synced.clock.name() << "\n";
  yaml << "timestamp_reference: mid_exposure_middle_row\n";
  if (synced.manifest.frame_rate_hz) yaml << "rate_hz: " << format_double(*synced.manifest.frame_rate_hz) << "\n";
  yaml << "frames: " << synced.frames.size() << "\n";
  yaml << "focus_locked: " << (synced.manifest.focus_locked ? "true" : "false") << "\n";
  yaml << "exposure_locked: " << (synced.manifest.exposure_locked ? "true" : "false") << "\n";

  const FrameRecord* with_focal = nullptr;
  const FrameRecord* with_principal = nullptr;
  std::size_t measured = 0;
  std::int64_t readout_min = 0, readout_max = 0, exposure_min = 0, exposure_max = 0;
  for (std::size_t i = 0; i < synced.frames.size(); ++i) {
    const FrameRecord& f = synced.frames[i].frame;
    if (!with_focal && f.focal_px()) with_focal = &f;
    if (!with_principal && f.principal_px()) with_principal = &f;
    if (f.metadata_source() == MetadataSource::kMeasured) ++measured;
    if (i == 0) {
      readout_min = readout_max = f.readout_ns();
      exposure_min = exposure_max = f.exposure_ns();
    }
    readout_min = std::min(readout_min, f.readout_ns());
    readout_max = std::max(readout_max, f.readout_ns());
    exposure_min = std::min(exposure_min, f.exposure_ns());
    exposure_max = std::max(exposure_max, f.exposure_ns());
  }
  if (with_focal) {
    yaml << "focal_length_px: [" << format_double(with_focal->focal_px()->x) << ", "
         << format_double(with_focal->focal_px()->y) << "]\n";
  }
  if (with_principal) {
    yaml << "principal_point_px: [" << format_double(with_principal->principal_px()->x) << ", "
         << format_double(with_principal->principal_px()->y) << "]\n";
  }
  if (!synced.frames.empty()) {
    yaml << "intrinsics_source: "
         << (measured == synced.frames.size() ? "measured" : measured == 0 ? "empirical" : "mixed") << "\n";
    yaml << "readout_ns: [" << readout_min << ", " << readout_max << "]\n";
    yaml << "exposure_ns: [" << exposure_min << ", " << exposure_max << "]\n";
  }
  const ClockMap& map = synced.applied_map;
  yaml << "clock_map:\n";
  yaml << "  from: " << map.from().name() << "\n";
  yaml << "  to: " << map.to().name() << "\n";
  yaml << "  scale: " << format_double(map.scale()) << "\n";
  yaml << "  offset_ns: " << map.offset_ns() << "\n";

  std::ostringstream imu_yaml;
  imu_yaml << "# IMU metadata exported by marslog\n";
  imu_yaml << "sensor_type: imu\n";
  imu_yaml << "clock: " << synced.clock.name() << "\n";
  if (synced.manifest.imu_rate_hz) imu_yaml << "rate_hz: " << format_double(*synced.manifest.imu_rate_hz) << "\n";
  imu_yaml << "samples: " << synced.imu.size() << "\n";
  imu_yaml << "gyro_epochs_dropped: " << synced.gyro_epochs_dropped << "\n";

  make_dirs(root / "imu0");
  make_dirs(root / "cam0");
  write_file(root / "imu0" / "data.csv", imu);
  write_file(root / "imu0" / "sensor.yaml", imu_yaml.str());
  write_file(root / "cam0" / "data.csv", cam);
  write_file(root / "cam0" / "sensor.yaml", yaml.str());
}

}  // namespace marslog
