#include <doctest.h>

#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <set>

#include "marslog/diagnostics.hpp"
#include "marslog/simulator.hpp"
#include "support.hpp"

using namespace marslog;
using marslog::testing::code_of;
using marslog::testing::instants;

namespace {

std::vector<std::int64_t> regular(std::size_t n, std::int64_t step, std::int64_t start = 0) {
  std::vector<std::int64_t> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(start + static_cast<std::int64_t>(i) * step);
  return out;
}

const StreamReport& stream_named(const SessionReport& r, const std::string& name) {
  for (const auto& s : r.streams) {
    if (s.name == name) return s;
  }
  FAIL("no stream " << name);
  return r.streams.front();
}

}  // namespace

TEST_SUITE("diagnostics") {
  TEST_CASE("three equal intervals") {
    const auto st = interval_stats(instants({0, 33'333'333, 66'666'666}), 30.0);
    CHECK(st.count == 2);
    CHECK(st.sum_ns == 66'666'666);
    CHECK(st.mean_ns == 33'333'333.0);
    CHECK(st.std_ns == 0.0);
    CHECK(st.median_ns == 33'333'333.0);
    CHECK(st.achieved_rate_hz == doctest::Approx(30.0).epsilon(1e-6));
    CHECK(st.nominal_interval_ns == 33'333'333);
  }

  TEST_CASE("jitter-free 100 Hz stream over 600 s") {
    const auto st = interval_stats(instants(regular(60'001, 10'000'000)));
    CHECK(st.count == 60'000);
    CHECK(st.mean_ns == 10'000'000.0);
    CHECK(st.p99_ns == 10'000'000);
    CHECK(st.std_ns == 0.0);
    CHECK(st.achieved_rate_hz == doctest::Approx(100.0).epsilon(1e-12));
  }

  TEST_CASE("order statistics") {
    // Intervals 1, 2, 3, 10.
    const auto st = interval_stats(instants({0, 1, 3, 6, 16}));
    CHECK(st.min_ns == 1);
    CHECK(st.max_ns == 10);
    CHECK(st.median_ns == 2.5);
    CHECK(st.p99_ns == 10);
    CHECK(st.std_ns == doctest::Approx(testing::two_pass_std({1, 2, 3, 10})).epsilon(1e-12));
  }

  TEST_CASE("nearest-rank p99") {
    // 200 intervals: 198 of 1 ns and two of 5 ns; rank ceil(0.99 * 200) = 198.
    std::vector<std::int64_t> t{0};
    for (int i = 0; i < 198; ++i) t.push_back(t.back() + 1);
    t.push_back(t.back() + 5);
    t.push_back(t.back() + 5);
    CHECK(interval_stats(instants(t)).p99_ns == 1);
    t.push_back(t.back() + 5);  // 201 intervals: rank 199
    CHECK(interval_stats(instants(t)).p99_ns == 5);
  }

  TEST_CASE("errors") {
    CHECK(code_of([] { interval_stats(instants({5})); }) == ErrorCode::kTooFewSamples);
    CHECK(code_of([] { interval_stats(instants({})); }) == ErrorCode::kTooFewSamples);
    CHECK(code_of([] { interval_stats(instants({5, 5})); }) == ErrorCode::kNonMonotonicTimestamp);
    std::vector<Instant> mixed{Instant(0, ClockId("a")), Instant(1, ClockId("b"))};
    CHECK(code_of([&] { interval_stats(mixed); }) == ErrorCode::kClockMismatch);
    CHECK(code_of([] { detect_gaps(instants({1}), 10); }) == ErrorCode::kTooFewSamples);
  }

  TEST_CASE("variance of jittered simulator streams against the two-pass oracle") {
    SimConfig cfg;
    cfg.duration_s = 60.0;
    cfg.timestamp_jitter_std_ns = 500'000;
    for (std::uint64_t seed : {0u, 1u, 2u}) {
      cfg.seed = seed;
      const auto s = simulate_session(cfg).first;
      std::vector<Instant> ts;
      for (const auto& x : *s.imu_combined) ts.push_back(x.t);
      std::vector<std::int64_t> d;
      for (std::size_t i = 1; i < ts.size(); ++i) d.push_back(ts[i].ns() - ts[i - 1].ns());
      const auto st = interval_stats(ts);
      const double oracle = testing::two_pass_std(d);
      CHECK(std::fabs(st.std_ns - oracle) <= 0.05 * oracle);
      CHECK(st.sum_ns == ts.back().ns() - ts.front().ns());
    }
  }

  TEST_CASE("large offsets do not lose precision") {
    const auto st = interval_stats(instants(regular(1000, 1000, 4'000'000'000'000'000'000)));
    CHECK(st.std_ns == 0.0);
    CHECK(st.mean_ns == 1000.0);
  }

  TEST_CASE("gaps: perfect stream, single gap, infinite multiplier") {
    CHECK(detect_gaps(instants(regular(300, 33'333'333)), 33'333'333).gaps.empty());
    auto t = regular(10, 33'333'333);
    for (std::size_t i = 5; i < t.size(); ++i) t[i] += 100'000'000 - 33'333'333;
    const auto r = detect_gaps(instants(t), 33'333'333, 1.5);
    REQUIRE(r.gaps.size() == 1);
    CHECK(r.gaps[0].duration_ns == 100'000'000);
    CHECK(r.gaps[0].start.ns() == t[4]);
    CHECK(detect_gaps(instants(t), 33'333'333, std::numeric_limits<double>::infinity()).gaps.empty());
  }

  TEST_CASE("gaps: planted gaps are all found where planted") {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
      std::mt19937_64 rng(seed);
      const std::int64_t nominal = 10'000'000;
      std::uniform_int_distribution<std::int64_t> jitter(-2'000'000, 2'000'000);
      std::uniform_int_distribution<std::int64_t> extra(6'000'000, 500'000'000);
      std::uniform_int_distribution<std::size_t> pos(1, 999);
      std::set<std::size_t> planted;
      const std::size_t k = seed % 8;
      while (planted.size() < k) planted.insert(pos(rng));
      std::vector<std::int64_t> t{0};
      std::vector<std::int64_t> starts;
      for (std::size_t i = 1; i < 1000; ++i) {
        std::int64_t step = nominal + jitter(rng);
        if (planted.count(i)) {
          step = nominal + nominal / 2 + extra(rng);
          starts.push_back(t.back());
        }
        t.push_back(t.back() + step);
      }
      const auto r = detect_gaps(instants(t), nominal);
      REQUIRE(r.gaps.size() == k);
      for (std::size_t i = 0; i < k; ++i) CHECK(r.gaps[i].start.ns() == starts[i]);
    }
  }

  TEST_CASE("gap threshold is strict") {
    const auto r = detect_gaps(instants({0, 15, 30, 46}), 10, 1.5);
    REQUIRE(r.gaps.size() == 1);
    CHECK(r.gaps[0].duration_ns == 16);
    CHECK(r.threshold_ns == 15.0);
  }

  TEST_CASE("histogram covers every interval") {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 20; ++trial) {
      const auto t = testing::random_times(rng, 500, 0, 1, 40'000'000);
      const auto bins = interval_histogram(instants(t), 10'000'000);
      REQUIRE(bins.size() == 61);
      std::size_t total = 0;
      for (std::size_t i = 0; i < bins.size(); ++i) {
        total += bins[i].count;
        CHECK(bins[i].start_ns < bins[i].end_ns);
        if (i > 0) CHECK(bins[i].start_ns == bins[i - 1].end_ns);
      }
      CHECK(bins.front().start_ns == 0);
      CHECK(bins[60].start_ns == 30'000'000);
      CHECK(total == t.size() - 1);
      std::int64_t max_d = 0;
      for (std::size_t i = 1; i < t.size(); ++i) max_d = std::max(max_d, t[i] - t[i - 1]);
      CHECK(bins.back().end_ns > max_d);
    }
  }

  TEST_CASE("session report on a simulated 600 s session") {
    SimConfig cfg;
    cfg.duration_s = 600.0;
    const auto s = simulate_session(cfg).first;
    const auto r = session_report(s);
    const auto& frames = stream_named(r, "frames");
    const auto& imu = stream_named(r, "imu");
    CHECK(frames.present);
    CHECK(frames.samples == 18'000);
    CHECK(imu.samples == 60'000);
    CHECK(frames.stats->achieved_rate_hz == doctest::Approx(30.0).epsilon(0.01));
    CHECK(imu.stats->achieved_rate_hz == doctest::Approx(100.0).epsilon(0.01));
    CHECK(r.metadata.fraction_measured == 1.0);

    const auto j = to_json(r);
    CHECK(j.contains("streams"));
    CHECK(to_text(r).find("frames") != std::string::npos);
    const std::string csv = histogram_csv(r);
    CHECK(csv.rfind("bin_start_ns,bin_end_ns,count", 0) == 0);
    CHECK(csv.find("# stream: imu") != std::string::npos);
  }

  TEST_CASE("session report: empirical optics and absent imu") {
    Session s = testing::tiny_session(3, 0);
    for (auto& f : s.frames) {
      f = FrameRecord(f.index(), f.t_start(), f.exposure_ns(), f.readout_ns(), std::nullopt, std::nullopt,
                      MetadataSource::kEmpiricalDefault);
    }
    const auto r = session_report(s);
    CHECK(r.metadata.fraction_empirical == 1.0);
    CHECK(r.metadata.empirical == 3);
    const auto& imu = stream_named(r, "imu");
    CHECK_FALSE(imu.present);
    CHECK_FALSE(imu.stats.has_value());
    CHECK(to_json(r).dump().find("\"present\":false") != std::string::npos);
  }

  TEST_CASE("report json mirrors the stats fields") {
    const auto j = to_json(interval_stats(instants({0, 10, 30})));
    for (const char* key : {"count", "sum_ns", "mean_ns", "std_ns", "min_ns", "max_ns", "median_ns", "p99_ns",
                            "achieved_rate_hz"}) {
      CHECK_MESSAGE(j.contains(key), key);
    }
    CHECK(j["count"] == 2);
  }
}
