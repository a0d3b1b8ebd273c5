#include "marslog/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "marslog/error.hpp"

namespace marslog {

namespace {

std::vector<std::int64_t> intervals_of(std::span<const Instant> ts) {
  if (ts.size() < 2) {
    throw Error(ErrorCode::kTooFewSamples,
                "need at least 2 timestamps, got " + std::to_string(ts.size()));
  }
  std::vector<std::int64_t> out;
  out.reserve(ts.size() - 1);
  for (std::size_t i = 1; i < ts.size(); ++i) {
    const std::int64_t d = ts[i].since(ts[i - 1]);
    if (d <= 0) {
      throw Error(ErrorCode::kNonMonotonicTimestamp,
                  "timestamp " + std::to_string(i) + " does not increase");
    }
    out.push_back(d);
  }
  return out;
}

std::int64_t nominal_interval_from_rate(double rate_hz) {
  if (!(rate_hz > 0.0) || !std::isfinite(rate_hz)) {
    throw Error(ErrorCode::kInvalidArgument, "nominal rate must be positive");
  }
  return round_half_up(1e9 / rate_hz);
}

std::vector<Instant> frame_times(const Session& s) {
  std::vector<Instant> out;
  out.reserve(s.frames.size());
  for (const auto& f : s.frames) out.push_back(f.t_start());
  return out;
}

StreamReport report_stream(std::string name, const std::vector<Instant>& ts, std::optional<double> rate_hz) {
  StreamReport r;
  r.name = std::move(name);
  r.samples = ts.size();
  if (ts.size() < 2) return r;
  r.present = true;
  r.stats = interval_stats(ts, rate_hz, r.name);
  const std::int64_t nominal = r.stats->nominal_interval_ns.value_or(
      std::max<std::int64_t>(1, round_half_up(r.stats->median_ns)));
  r.gaps = detect_gaps(ts, nominal);
  r.histogram = interval_histogram(ts, nominal);
  return r;
}

}  // namespace

IntervalStats interval_stats(std::span<const Instant> timestamps, std::optional<double> nominal_rate_hz,
                             std::string stream) {
  std::vector<std::int64_t> d = intervals_of(timestamps);

  IntervalStats s;
  s.stream = std::move(stream);
  s.count = d.size();

  // Welford's single-pass update; squares of 1e7-scale intervals would
  // overflow a naive int64 sum of squares over long sessions.
  double mean = 0.0;
  double m2 = 0.0;
  std::size_t k = 0;
  s.min_ns = d.front();
  s.max_ns = d.front();
  for (std::int64_t v : d) {
    s.sum_ns += v;
    s.min_ns = std::min(s.min_ns, v);
    s.max_ns = std::max(s.max_ns, v);
    ++k;
    const double delta = static_cast<double>(v) - mean;
    mean += delta / static_cast<double>(k);
    m2 += delta * (static_cast<double>(v) - mean);
  }
  s.mean_ns = static_cast<double>(s.sum_ns) / static_cast<double>(s.count);
  s.std_ns = std::sqrt(std::max(0.0, m2 / static_cast<double>(s.count)));

  const std::size_t n = d.size();
  const std::size_t mid = n / 2;
  std::nth_element(d.begin(), d.begin() + mid, d.end());
  const std::int64_t upper = d[mid];
  if (n % 2 == 1) {
    s.median_ns = static_cast<double>(upper);
  } else {
    const std::int64_t lower = *std::max_element(d.begin(), d.begin() + mid);
    s.median_ns = (static_cast<double>(lower) + static_cast<double>(upper)) / 2.0;
  }
  const std::size_t rank = (99 * n + 99) / 100;  // ceil(0.99 n), 1-based
  std::nth_element(d.begin(), d.begin() + (rank - 1), d.end());
  s.p99_ns = d[rank - 1];

  if (nominal_rate_hz) s.nominal_interval_ns = nominal_interval_from_rate(*nominal_rate_hz);
  s.achieved_rate_hz = static_cast<double>(s.count) / (static_cast<double>(s.sum_ns) * 1e-9);
  return s;
}

GapReport detect_gaps(std::span<const Instant> timestamps, std::int64_t nominal_interval_ns, double multiplier) {
  if (nominal_interval_ns <= 0) throw Error(ErrorCode::kInvalidArgument, "nominal interval must be positive");
  if (!(multiplier > 0.0)) throw Error(ErrorCode::kInvalidArgument, "gap multiplier must be positive");
  const std::vector<std::int64_t> d = intervals_of(timestamps);

  GapReport r;
  r.nominal_interval_ns = nominal_interval_ns;
  r.multiplier = multiplier;
  r.threshold_ns = multiplier * static_cast<double>(nominal_interval_ns);
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (static_cast<double>(d[i]) > r.threshold_ns) r.gaps.push_back({timestamps[i], d[i]});
  }
  return r;
}

std::vector<HistogramBin> interval_histogram(std::span<const Instant> timestamps, std::int64_t nominal_interval_ns,
                                             std::size_t bins, std::int64_t span_multiple) {
  if (nominal_interval_ns <= 0 || bins == 0 || span_multiple <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "histogram needs positive nominal interval, bins and span");
  }
  const std::vector<std::int64_t> d = intervals_of(timestamps);

  const __int128 span = static_cast<__int128>(span_multiple) * nominal_interval_ns;
  std::vector<std::int64_t> edges(bins + 1);
  for (std::size_t k = 0; k <= bins; ++k) {
    edges[k] = static_cast<std::int64_t>(span * static_cast<__int128>(k) / static_cast<__int128>(bins));
  }

  std::vector<HistogramBin> out;
  out.reserve(bins + 1);
  for (std::size_t k = 0; k < bins; ++k) out.push_back({edges[k], edges[k + 1], 0});
  const std::int64_t top = edges[bins];
  const std::int64_t max_interval = *std::max_element(d.begin(), d.end());
  out.push_back({top, std::max(top, max_interval + 1), 0});

  for (std::int64_t v : d) {
    if (v >= top) {
      ++out.back().count;
      continue;
    }
    const auto it = std::upper_bound(edges.begin(), edges.end(), v);
    ++out[static_cast<std::size_t>(it - edges.begin()) - 1].count;
  }
  return out;
}

SessionReport session_report(const Session& session) {
  SessionReport r;
  r.device_name = session.manifest.device_name;
  r.os_family = session.manifest.os_family;
  const auto& m = session.manifest;

  r.streams.push_back(report_stream("frames", frame_times(session), m.frame_rate_hz));

  std::vector<Instant> imu;
  if (session.imu_combined) {
    imu.reserve(session.imu_combined->size());
    for (const auto& s : *session.imu_combined) imu.push_back(s.t);
  }
  r.streams.push_back(report_stream("imu", imu, m.imu_rate_hz));

  auto raw_times = [](const RawSampleStream& s) {
    std::vector<Instant> out;
    out.reserve(s.samples.size());
    for (const auto& x : s.samples) out.push_back(x.t);
    return out;
  };
  if (session.gyro_raw) r.streams.push_back(report_stream("gyro", raw_times(*session.gyro_raw), m.imu_rate_hz));
  if (session.accel_raw) r.streams.push_back(report_stream("accel", raw_times(*session.accel_raw), std::nullopt));

  r.metadata.frames = session.frames.size();
  for (const auto& f : session.frames) {
    if (f.metadata_source() == MetadataSource::kMeasured) {
      ++r.metadata.measured;
    } else {
      ++r.metadata.empirical;
    }
  }
  if (r.metadata.frames > 0) {
    r.metadata.fraction_measured = static_cast<double>(r.metadata.measured) / static_cast<double>(r.metadata.frames);
    r.metadata.fraction_empirical =
        static_cast<double>(r.metadata.empirical) / static_cast<double>(r.metadata.frames);
  }
  return r;
}

nlohmann::json to_json(const IntervalStats& s) {
  nlohmann::json j = {
      {"stream", s.stream},     {"count", s.count},   {"sum_ns", s.sum_ns},
      {"mean_ns", s.mean_ns},   {"std_ns", s.std_ns}, {"min_ns", s.min_ns},
      {"max_ns", s.max_ns},     {"median_ns", s.median_ns}, {"p99_ns", s.p99_ns},
      {"achieved_rate_hz", s.achieved_rate_hz},
  };
  j["nominal_interval_ns"] = s.nominal_interval_ns ? nlohmann::json(*s.nominal_interval_ns) : nlohmann::json();
  return j;
}

nlohmann::json to_json(const GapReport& g) {
  nlohmann::json gaps = nlohmann::json::array();
  for (const auto& gap : g.gaps) gaps.push_back({{"start_ns", gap.start.ns()}, {"duration_ns", gap.duration_ns}});
  return {{"nominal_interval_ns", g.nominal_interval_ns},
          {"multiplier", g.multiplier},
          {"threshold_ns", g.threshold_ns},
          {"gaps", std::move(gaps)}};
}

nlohmann::json to_json(const SessionReport& r) {
  nlohmann::json streams = nlohmann::json::array();
  for (const auto& s : r.streams) {
    nlohmann::json js = {{"name", s.name}, {"present", s.present}, {"samples", s.samples}};
    if (s.stats) js["stats"] = to_json(*s.stats);
    if (s.gaps) js["gaps"] = to_json(*s.gaps);
    streams.push_back(std::move(js));
  }
  return {{"device", r.device_name},
          {"os_family", to_string(r.os_family)},
          {"streams", std::move(streams)},
          {"metadata",
           {{"frames", r.metadata.frames},
            {"measured", r.metadata.measured},
            {"empirical", r.metadata.empirical},
            {"fraction_measured", r.metadata.fraction_measured},
            {"fraction_empirical", r.metadata.fraction_empirical}}}};
}

std::string to_text(const SessionReport& r) {
  std::ostringstream os;
  os << "device: " << r.device_name << " (" << to_string(r.os_family) << ")\n";
  for (const auto& s : r.streams) {
    os << s.name << ": ";
    if (!s.present) {
      os << "absent (" << s.samples << " samples)\n";
      continue;
    }
    const auto& st = *s.stats;
    os << s.samples << " samples, " << st.achieved_rate_hz << " Hz, interval mean " << st.mean_ns / 1e6
       << " ms std " << st.std_ns / 1e6 << " ms min " << st.min_ns / 1e6 << " ms max " << st.max_ns / 1e6
       << " ms, " << s.gaps->gaps.size() << " gaps\n";
  }
  os << "optics: " << r.metadata.measured << " measured, " << r.metadata.empirical << " empirical of "
     << r.metadata.frames << " frames\n";
  return os.str();
}

std::string histogram_csv(const SessionReport& r) {
  std::ostringstream os;
  os << "bin_start_ns,bin_end_ns,count\n";
  for (const auto& s : r.streams) {
    if (!s.present) continue;
    os << "# stream: " << s.name << '\n';
    for (const auto& b : s.histogram) os << b.start_ns << ',' << b.end_ns << ',' << b.count << '\n';
  }
  return os.str();
}

}  // namespace marslog
