#include <doctest.h>

#include <cmath>

#include "marslog/simulator.hpp"
#include "marslog/sync.hpp"
#include "support.hpp"

using namespace marslog;
using marslog::testing::code_of;

namespace {

SimConfig quiet(double duration_s) {
  SimConfig c;
  c.duration_s = duration_s;
  c.timestamp_jitter_std_ns = 0;
  c.dropout_prob = 0.0;
  return c;
}

}  // namespace

TEST_SUITE("simulator") {
  TEST_CASE("zero duration gives empty streams and coincident marks") {
    const auto [s, truth] = simulate_session(quiet(0.0));
    CHECK(s.frames.empty());
    REQUIRE(s.imu_combined.has_value());
    CHECK(s.imu_combined->empty());
    REQUIRE(s.clock_marks.size() == 2);
    CHECK(s.clock_marks[0].t_a() == s.clock_marks[1].t_a());
    CHECK(s.clock_marks[0].t_b() == s.clock_marks[1].t_b());
  }

  TEST_CASE("10 s at 100 Hz without jitter gives 1000 samples 10 ms apart") {
    const auto [s, truth] = simulate_session(quiet(10.0));
    const auto& imu = *s.imu_combined;
    REQUIRE(imu.size() == 1000);
    for (std::size_t i = 0; i < imu.size(); ++i) CHECK(imu[i].t.ns() == static_cast<std::int64_t>(i) * 10'000'000);
    CHECK(s.frames.size() == 300);
    CHECK(truth.collision_bumps == 0);
  }

  TEST_CASE("clock tags and marks") {
    const auto [s, truth] = simulate_session(SimConfig{});
    CHECK(s.manifest.frame_clock == truth.camera_to_imu.from());
    CHECK(s.manifest.imu_clock == truth.camera_to_imu.to());
    for (const auto& f : s.frames) CHECK(f.t_start().clock() == s.manifest.frame_clock);
    REQUIRE(s.clock_marks.size() == 2);
    CHECK(s.clock_marks[1].t_b().ns() == 10'000'000'000);
    CHECK(s.clock_marks[0].t_a().ns() == true_to_camera_ns(0, 30'000'000, 10.0));
  }

  TEST_CASE("same seed is bit-identical, different seed differs") {
    SimConfig c;
    c.duration_s = 20.0;
    c.dropout_prob = 0.05;
    c.seed = 42;
    const auto a = simulate_session(c);
    const auto b = simulate_session(c);
    CHECK(a.first == b.first);
    CHECK(a.second.nominal_imu_ns == b.second.nominal_imu_ns);
    c.seed = 43;
    CHECK_FALSE(simulate_session(c).first == a.first);
  }

  TEST_CASE("timestamps strictly increase under heavy jitter") {
    SimConfig c;
    c.duration_s = 30.0;
    c.imu_rate_hz = 1000.0;
    c.timestamp_jitter_std_ns = 2'000'000;
    const auto [s, truth] = simulate_session(c);
    const auto& imu = *s.imu_combined;
    for (std::size_t i = 1; i < imu.size(); ++i) CHECK(imu[i].t.ns() > imu[i - 1].t.ns());
    CHECK(validate_session(s).empty());
  }

  TEST_CASE("static motion gives exact gravity") {
    SimConfig c;
    c.duration_s = 5.0;
    c.imu_layout = ImuLayout::kRaw;
    const auto raw = emit_raw_streams(c);
    REQUIRE(!raw.accel.samples.empty());
    for (const auto& a : raw.accel.samples) CHECK(a.value == Vec3{0.0, 0.0, 9.81});
    for (const auto& g : raw.gyro.samples) CHECK(g.value == Vec3{0.0, 0.0, 0.0});
    CHECK(raw.accel.samples.size() == 250);
    // Half an accel period: the first accel epoch sits between gyro epochs.
    CHECK(std::llabs(raw.accel.samples[0].t.ns() - 10'000'000) < 4 * 500'000 + 2);
  }

  TEST_CASE("zero-amplitude sinusoid matches static gravity") {
    SimConfig a;
    a.duration_s = 5.0;
    SimConfig b = a;
    b.motion = Sinusoidal{{0, 0, 0}, {0, 0, 0}, {1.3, 2.0, 0.1}, {0.2, 0.0, 3.0}};
    CHECK(simulate_session(a).first == simulate_session(b).first);
    a.imu_layout = b.imu_layout = ImuLayout::kRaw;
    CHECK(simulate_session(a).first == simulate_session(b).first);
  }

  TEST_CASE("interpolated sinusoid respects the h^2/8 bound") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      SimConfig c;
      c.duration_s = 20.0;
      c.seed = seed;
      c.motion = Sinusoidal{{0.3, 0.2, 0.1}, {1.0, 0.5, 2.0}, {2.0, 0.7, 1.3}, {0.0, 1.0, 2.0}};
      const auto raw = emit_raw_streams(c);
      const auto r = interpolate_accel_at_gyro(raw.gyro, raw.accel);
      const Vec3 bound2 = accel_second_derivative_bound(c.motion);
      const auto& acc = raw.accel.samples;
      std::size_t j = 0;
      for (const auto& s : r.samples) {
        while (acc[j + 1].t.ns() < s.t.ns()) ++j;
        const double h = static_cast<double>(acc[j + 1].t.ns() - acc[j].t.ns()) * 1e-9;
        const Vec3 exact = accel_signal(c.motion, s.t.ns());
        for (int k = 0; k < 3; ++k) {
          CHECK(std::fabs(s.accel[k] - exact[k]) <= h * h / 8.0 * bound2[k] + 1e-12);
        }
      }
    }
  }

  TEST_CASE("ground-truth map reproduces camera timestamps within 1 ns") {
    SimConfig c = quiet(120.0);
    c.camera_clock_offset_ns = 27'123'457;
    c.camera_clock_drift_ppm = -13.7;
    const auto [s, truth] = simulate_session(c);
    REQUIRE(s.frames.size() == truth.nominal_frame_ns.size());
    const ClockMap to_cam = truth.camera_to_imu.inverse();
    for (std::size_t i = 0; i < s.frames.size(); ++i) {
      const std::int64_t cam = s.frames[i].t_start().ns();
      CHECK(std::llabs(to_cam.apply(truth.nominal_frame_ns[i]) - cam) <= 1);
      CHECK(std::llabs(truth.camera_to_imu.apply(cam) - truth.nominal_frame_ns[i]) <= 1);
    }
  }

  TEST_CASE("dropout counts stay within 5 sigma of the binomial expectation") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      SimConfig c;
      c.duration_s = 120.0;
      c.dropout_prob = 0.2;
      c.seed = seed;
      const auto [s, truth] = simulate_session(c);
      auto within = [&](std::size_t kept, std::size_t generated) {
        const double n = static_cast<double>(generated);
        const double mean = n * (1.0 - c.dropout_prob);
        const double sd = std::sqrt(n * c.dropout_prob * (1.0 - c.dropout_prob));
        return std::fabs(static_cast<double>(kept) - mean) <= 5.0 * sd;
      };
      CHECK(truth.generated_imu == 12'000);
      CHECK(truth.generated_frames == 3'600);
      CHECK(within(s.imu_combined->size(), truth.generated_imu));
      CHECK(within(s.frames.size(), truth.generated_frames));
    }
  }

  TEST_CASE("invalid configs") {
    auto bad = [](auto mutate) {
      SimConfig c;
      mutate(c);
      return code_of([&] { simulate_session(c); });
    };
    CHECK(bad([](SimConfig& c) { c.duration_s = -1.0; }) == ErrorCode::kInvalidConfig);
    CHECK(bad([](SimConfig& c) { c.imu_rate_hz = 0.0; }) == ErrorCode::kInvalidConfig);
    CHECK(bad([](SimConfig& c) { c.frame_rate_hz = NAN; }) == ErrorCode::kInvalidConfig);
    CHECK(bad([](SimConfig& c) { c.exposure_ns = -5; }) == ErrorCode::kInvalidConfig);
    CHECK(bad([](SimConfig& c) { c.dropout_prob = 1.0; }) == ErrorCode::kInvalidConfig);
    CHECK(bad([](SimConfig& c) { c.timestamp_jitter_std_ns = -1; }) == ErrorCode::kInvalidConfig);
    CHECK(bad([](SimConfig& c) { c.accel_rate_hz = -3.0; }) == ErrorCode::kInvalidConfig);
  }

  TEST_CASE("ground-truth sidecar") {
    const auto [s, truth] = simulate_session(SimConfig{});
    const auto j = to_json(truth);
    CHECK(j["camera_clock_offset_ns"] == 30'000'000);
    CHECK(j["camera_clock_drift_ppm"] == 10.0);
    CHECK(j["seed"] == 0);
    CHECK(j["nominal_times"]["imu"]["emitted"] == s.imu_combined->size());
    CHECK(j["camera_to_imu"]["offset_ns"] == -30'000'000);
  }
}
