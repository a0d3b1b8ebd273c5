#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "marslog/cli.hpp"
#include "marslog/core.hpp"
#include "marslog/diagnostics.hpp"
#include "marslog/error.hpp"
#include "marslog/formats.hpp"
#include "marslog/simulator.hpp"
#include "marslog/sync.hpp"

namespace py = pybind11;
using namespace marslog;

namespace {

std::vector<Instant> on_clock(const std::vector<std::int64_t>& ns, const std::string& clock) {
  const ClockId id(clock);
  std::vector<Instant> out;
  out.reserve(ns.size());
  for (auto t : ns) out.emplace_back(t, id);
  return out;
}

RawSampleStream raw_stream(SensorKind kind, const std::vector<std::pair<std::int64_t, Vec3>>& samples,
                           const std::string& clock) {
  const ClockId id(clock);
  RawSampleStream s{kind, {}};
  for (const auto& [t, v] : samples) s.samples.push_back({Instant(t, id), v});
  return s;
}

// JSON documents cross into Python as text and are decoded by the package.
std::string dump(const nlohmann::json& j) { return j.dump(); }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Native core of marslog";

  static py::exception<Error> error(m, "MarslogError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(error, (std::string(to_string(e.code())) + ": " + e.what()).c_str());
    }
  });

  py::class_<Instant>(m, "Instant")
      .def(py::init([](std::int64_t ns, const std::string& clock) { return Instant(ns, ClockId(clock)); }),
           py::arg("ns"), py::arg("clock"))
      .def_property_readonly("ns", &Instant::ns)
      .def_property_readonly("clock", [](const Instant& t) { return t.clock().name(); })
      .def("__eq__", [](const Instant& a, const Instant& b) { return a == b; })
      .def("__repr__", [](const Instant& t) {
        return "Instant(" + std::to_string(t.ns()) + ", '" + t.clock().name() + "')";
      });

  py::class_<ClockMap>(m, "ClockMap")
      .def(py::init([](const std::string& from, const std::string& to, double scale, std::int64_t offset) {
             return ClockMap(ClockId(from), ClockId(to), scale, offset);
           }),
           py::arg("from_clock"), py::arg("to_clock"), py::arg("scale"), py::arg("offset_ns"))
      .def_property_readonly("from_clock", [](const ClockMap& c) { return c.from().name(); })
      .def_property_readonly("to_clock", [](const ClockMap& c) { return c.to().name(); })
      .def_property_readonly("scale", &ClockMap::scale)
      .def_property_readonly("offset_ns", &ClockMap::offset_ns)
      .def_property_readonly("drift_ppm", &ClockMap::drift_ppm)
      .def("apply", py::overload_cast<std::int64_t>(&ClockMap::apply, py::const_), py::arg("t_ns"))
      .def("inverse", &ClockMap::inverse);

  py::class_<FrameRecord>(m, "FrameRecord")
      .def(py::init([](std::uint64_t index, std::int64_t t_start, const std::string& clock, std::int64_t exposure,
                       std::int64_t readout) {
             return FrameRecord(index, Instant(t_start, ClockId(clock)), exposure, readout);
           }),
           py::arg("index"), py::arg("t_start_ns"), py::arg("clock"), py::arg("exposure_ns"), py::arg("readout_ns"))
      .def_property_readonly("index", &FrameRecord::index)
      .def_property_readonly("t_start", &FrameRecord::t_start)
      .def_property_readonly("exposure_ns", &FrameRecord::exposure_ns)
      .def_property_readonly("readout_ns", &FrameRecord::readout_ns)
      .def_property_readonly("measured", [](const FrameRecord& f) {
        return f.metadata_source() == MetadataSource::kMeasured;
      });

  py::class_<ImuSample>(m, "ImuSample")
      .def_readonly("t", &ImuSample::t)
      .def_readonly("gyro", &ImuSample::gyro)
      .def_readonly("accel", &ImuSample::accel);

  py::class_<Session>(m, "Session")
      .def_readonly("frames", &Session::frames)
      .def_readonly("imu_combined", &Session::imu_combined)
      .def_property_readonly("frame_clock", [](const Session& s) { return s.manifest.frame_clock.name(); })
      .def_property_readonly("imu_clock", [](const Session& s) { return s.manifest.imu_clock.name(); })
      .def_property_readonly("device_name", [](const Session& s) { return s.manifest.device_name; })
      .def_property_readonly("clock_mark_count", [](const Session& s) { return s.clock_marks.size(); })
      .def_property_readonly("has_raw_imu", [](const Session& s) { return s.gyro_raw.has_value(); })
      .def("__eq__", [](const Session& a, const Session& b) { return a == b; });

  py::class_<SyncedSession>(m, "SyncedSession")
      .def_property_readonly("clock", [](const SyncedSession& s) { return s.clock.name(); })
      .def_readonly("applied_map", &SyncedSession::applied_map)
      .def_readonly("imu", &SyncedSession::imu)
      .def_readonly("gyro_epochs_dropped", &SyncedSession::gyro_epochs_dropped)
      .def_property_readonly("centered_frame_ns", [](const SyncedSession& s) {
        std::vector<std::int64_t> out;
        for (const auto& f : s.frames) out.push_back(f.t_center.ns());
        return out;
      });

  py::class_<SimConfig>(m, "SimConfig")
      .def(py::init<>())
      .def_readwrite("duration_s", &SimConfig::duration_s)
      .def_readwrite("imu_rate_hz", &SimConfig::imu_rate_hz)
      .def_readwrite("frame_rate_hz", &SimConfig::frame_rate_hz)
      .def_readwrite("accel_rate_hz", &SimConfig::accel_rate_hz)
      .def_readwrite("exposure_ns", &SimConfig::exposure_ns)
      .def_readwrite("readout_ns", &SimConfig::readout_ns)
      .def_readwrite("camera_clock_offset_ns", &SimConfig::camera_clock_offset_ns)
      .def_readwrite("camera_clock_drift_ppm", &SimConfig::camera_clock_drift_ppm)
      .def_readwrite("timestamp_jitter_std_ns", &SimConfig::timestamp_jitter_std_ns)
      .def_readwrite("dropout_prob", &SimConfig::dropout_prob)
      .def_readwrite("seed", &SimConfig::seed)
      .def("set", [](SimConfig& c, const std::string& key, const std::string& value) {
        cli::apply_config_entry(key, value, c);
      }, py::arg("key"), py::arg("value"), "Set any config key using the config-file syntax");

  py::class_<SimGroundTruth>(m, "SimGroundTruth")
      .def_readonly("camera_to_imu", &SimGroundTruth::camera_to_imu)
      .def_readonly("nominal_frame_ns", &SimGroundTruth::nominal_frame_ns)
      .def_readonly("nominal_imu_ns", &SimGroundTruth::nominal_imu_ns)
      .def_readonly("collision_bumps", &SimGroundTruth::collision_bumps)
      .def("to_json", [](const SimGroundTruth& t) { return dump(to_json(t)); });

  py::class_<IntervalStats>(m, "IntervalStats")
      .def_readonly("count", &IntervalStats::count)
      .def_readonly("sum_ns", &IntervalStats::sum_ns)
      .def_readonly("mean_ns", &IntervalStats::mean_ns)
      .def_readonly("std_ns", &IntervalStats::std_ns)
      .def_readonly("min_ns", &IntervalStats::min_ns)
      .def_readonly("max_ns", &IntervalStats::max_ns)
      .def_readonly("median_ns", &IntervalStats::median_ns)
      .def_readonly("p99_ns", &IntervalStats::p99_ns)
      .def_readonly("achieved_rate_hz", &IntervalStats::achieved_rate_hz);

  m.def("simulate_session", &simulate_session, py::arg("config"));
  m.def("read_session", &read_session, py::arg("root"));
  m.def("write_session", &write_session, py::arg("session"), py::arg("root"));
  m.def("validate_session", [](const Session& s) {
    std::vector<std::tuple<std::string, std::string, std::string>> out;
    for (const auto& v : validate_session(s)) out.emplace_back(to_string(v.kind), v.where, v.message);
    return out;
  }, py::arg("session"));
  m.def("synchronize_session", [](const Session& s, std::optional<std::string> target) {
    return synchronize_session(s, target ? ClockId(*target) : s.manifest.imu_clock);
  }, py::arg("session"), py::arg("target_clock") = py::none());
  m.def("to_session", &to_session, py::arg("synced"));
  m.def("export_slam_layout", &export_slam_layout, py::arg("synced"), py::arg("root"));

  m.def("fit_clock_map", [](const std::vector<std::pair<std::int64_t, std::int64_t>>& marks,
                            const std::string& clock_a, const std::string& clock_b) {
    std::vector<ClockCorrespondence> cs;
    for (const auto& [a, b] : marks) {
      cs.emplace_back(MarkLabel::kExtra, Instant(a, ClockId(clock_a)), Instant(b, ClockId(clock_b)));
    }
    return fit_clock_map(cs);
  }, py::arg("marks"), py::arg("clock_a") = "camera", py::arg("clock_b") = "imu");
  m.def("center_frame_time", [](const FrameRecord& f) { return center_frame_time(f).ns(); }, py::arg("frame"));
  m.def("interpolate_accel_at_gyro",
        [](const std::vector<std::pair<std::int64_t, Vec3>>& gyro,
           const std::vector<std::pair<std::int64_t, Vec3>>& accel, const std::string& clock) {
          auto r = interpolate_accel_at_gyro(raw_stream(SensorKind::kGyro, gyro, clock),
                                             raw_stream(SensorKind::kAccel, accel, clock));
          return py::make_tuple(r.samples, r.dropped_before, r.dropped_after);
        },
        py::arg("gyro"), py::arg("accel"), py::arg("clock") = "imu");

  m.def("interval_stats", [](const std::vector<std::int64_t>& ns, std::optional<double> rate) {
    return interval_stats(on_clock(ns, "stream"), rate);
  }, py::arg("timestamps_ns"), py::arg("nominal_rate_hz") = py::none());
  m.def("detect_gaps", [](const std::vector<std::int64_t>& ns, std::int64_t nominal, double multiplier) {
    std::vector<std::pair<std::int64_t, std::int64_t>> out;
    for (const auto& g : detect_gaps(on_clock(ns, "stream"), nominal, multiplier).gaps) {
      out.emplace_back(g.start.ns(), g.duration_ns);
    }
    return out;
  }, py::arg("timestamps_ns"), py::arg("nominal_interval_ns"), py::arg("multiplier") = 1.5);
  m.def("session_report_json", [](const Session& s) { return dump(to_json(session_report(s))); },
        py::arg("session"));
  m.def("histogram_csv", [](const Session& s) { return histogram_csv(session_report(s)); }, py::arg("session"));

  m.def("run_cli", [](const std::vector<std::string>& args) {
    std::ostringstream out, err;
    std::vector<std::string> argv{"marslog"};
    argv.insert(argv.end(), args.begin(), args.end());
    const int code = cli::run(argv, out, err);
    return py::make_tuple(code, out.str(), err.str());
  }, py::arg("args"), "Run the command-line tool in-process; returns (exit_code, stdout, stderr)");
}
