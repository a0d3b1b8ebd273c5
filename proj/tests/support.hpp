#pragma once

// Test-only helpers and independent oracles. Nothing here calls into the
// library code paths the oracles are used to check.

#include <unistd.h>

#include <atomic>
#include <bit>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "marslog/core.hpp"
#include "marslog/error.hpp"

namespace marslog::testing {

/// Error code thrown by f, or nullopt when it returns normally.
template <class F>
std::optional<ErrorCode> code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return std::nullopt;
}

/// Directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "t") {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("marslog-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& s) const { return path_ / s; }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void spit(const std::filesystem::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << content;
}

/// Relative path -> bytes for every regular file under root.
inline std::map<std::string, std::string> snapshot(const std::filesystem::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : std::filesystem::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out[std::filesystem::relative(e.path(), root).string()] = slurp(e.path());
  }
  return out;
}

/// Distance in units in the last place between two finite doubles.
inline std::uint64_t ulp_distance(double a, double b) {
  if (a == b) return 0;
  auto key = [](double x) {
    const auto bits = std::bit_cast<std::int64_t>(x);
    return bits < 0 ? std::numeric_limits<std::int64_t>::min() - bits : bits;
  };
  const std::int64_t ka = key(a), kb = key(b);
  return ka > kb ? static_cast<std::uint64_t>(ka) - static_cast<std::uint64_t>(kb)
                 : static_cast<std::uint64_t>(kb) - static_cast<std::uint64_t>(ka);
}

/// Brute-force linear interpolation: scans every accel sample for the
/// bracketing pair of the epoch. Returns nullopt outside the accel span.
inline std::optional<Vec3> brute_force_accel_at(const std::vector<StampedVec3>& accel, std::int64_t t) {
  const StampedVec3* lo = nullptr;
  const StampedVec3* hi = nullptr;
  for (const auto& a : accel) {
    if (a.t.ns() <= t && (lo == nullptr || a.t.ns() > lo->t.ns())) lo = &a;
    if (a.t.ns() >= t && (hi == nullptr || a.t.ns() < hi->t.ns())) hi = &a;
  }
  if (lo == nullptr || hi == nullptr) return std::nullopt;
  if (lo->t.ns() == t) return lo->value;
  if (hi->t.ns() == t) return hi->value;
  Vec3 out;
  const double w = static_cast<double>(t - lo->t.ns()) / static_cast<double>(hi->t.ns() - lo->t.ns());
  for (int k = 0; k < 3; ++k) out[k] = lo->value[k] + w * (hi->value[k] - lo->value[k]);
  return out;
}

/// Two-pass population variance: mean first, then squared deviations.
inline double two_pass_std(const std::vector<std::int64_t>& v) {
  long double mean = 0.0L;
  for (auto x : v) mean += static_cast<long double>(x);
  mean /= static_cast<long double>(v.size());
  long double ss = 0.0L;
  for (auto x : v) {
    const long double d = static_cast<long double>(x) - mean;
    ss += d * d;
  }
  return static_cast<double>(std::sqrt(ss / static_cast<long double>(v.size())));
}

/// Cramer's rule on [a1 1; a2 1] [s o]^T = [b1 b2]^T in long double.
struct TwoPointLine {
  long double scale;
  long double offset;
};
inline TwoPointLine solve_two_point(std::int64_t a1, std::int64_t b1, std::int64_t a2, std::int64_t b2) {
  const long double det = static_cast<long double>(a1) - static_cast<long double>(a2);
  const long double s = (static_cast<long double>(b1) - static_cast<long double>(b2)) / det;
  const long double o = (static_cast<long double>(a1) * static_cast<long double>(b2) -
                         static_cast<long double>(a2) * static_cast<long double>(b1)) /
                        det;
  return {s, o};
}

inline std::vector<Instant> instants(const std::vector<std::int64_t>& ns, const std::string& clock = "c") {
  std::vector<Instant> out;
  for (auto t : ns) out.emplace_back(t, ClockId(clock));
  return out;
}

/// Random strictly increasing timestamps with gaps in [min_gap, max_gap].
inline std::vector<std::int64_t> random_times(std::mt19937_64& rng, std::size_t n, std::int64_t start,
                                              std::int64_t min_gap, std::int64_t max_gap) {
  std::uniform_int_distribution<std::int64_t> gap(min_gap, max_gap);
  std::vector<std::int64_t> out;
  std::int64_t t = start;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(t);
    t += gap(rng);
  }
  return out;
}

/// Small valid session: frames on "cam", combined IMU on "imu", two marks
/// relating them with a pure offset of `offset_ns`.
inline Session tiny_session(std::size_t frames = 3, std::size_t imu = 10, std::int64_t offset_ns = 1000) {
  Session s;
  s.manifest.device_name = "bench";
  s.manifest.os_family = OsFamily::kSimulated;
  s.manifest.frame_rate_hz = 30.0;
  s.manifest.imu_rate_hz = 100.0;
  s.manifest.frame_clock = ClockId("cam");
  s.manifest.imu_clock = ClockId("imu");
  for (std::size_t i = 0; i < frames; ++i) {
    s.frames.emplace_back(i, Instant(static_cast<std::int64_t>(i) * 33'333'333, ClockId("cam")), 4'000'000,
                          10'000'000, PixelPair{1400.0, 1400.0}, PixelPair{640.0, 360.0});
  }
  std::vector<ImuSample> samples;
  for (std::size_t i = 0; i < imu; ++i) {
    const double k = static_cast<double>(i);
    samples.emplace_back(Instant(static_cast<std::int64_t>(i) * 10'000'000, ClockId("imu")),
                         Vec3{0.01 * k, -0.02, 0.1}, Vec3{0.0, 0.1 * k, 9.81});
  }
  s.imu_combined = std::move(samples);
  s.clock_marks.emplace_back(MarkLabel::kSessionStart, Instant(0, ClockId("cam")),
                             Instant(offset_ns, ClockId("imu")));
  s.clock_marks.emplace_back(MarkLabel::kSessionEnd, Instant(1'000'000'000, ClockId("cam")),
                             Instant(1'000'000'000 + offset_ns, ClockId("imu")));
  return s;
}

}  // namespace marslog::testing
