#include <doctest.h>

#include <sstream>

#include <nlohmann/json.hpp>

#include "marslog/cli.hpp"
#include "marslog/formats.hpp"
#include "support.hpp"

using namespace marslog;
using marslog::testing::code_of;
using marslog::testing::slurp;
using marslog::testing::spit;
using marslog::testing::TempDir;

namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "marslog");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("simulate then validate succeeds") {
    TempDir dir("cli-sim");
    const auto session = (dir / "s").string();
    REQUIRE(run({"-q", "simulate", "--set", "duration_s=3", "--out", session}).code == 0);
    CHECK(fs::exists(dir / "s" / "groundtruth.json"));
    const auto v = run({"validate", session});
    CHECK(v.code == 0);
    CHECK(v.out.empty());
    CHECK(v.err.find("valid") != std::string::npos);
  }

  TEST_CASE("validate reports violations with exit 1") {
    TempDir dir("cli-bad");
    Session s = testing::tiny_session(2, 0);
    write_session(s, dir.path());
    const auto v = run({"--format", "json", "validate", dir.path().string()});
    CHECK(v.code == 1);
    const auto j = nlohmann::json::parse(v.out);
    CHECK(j["valid"] == false);
    CHECK(j["violations"][0]["kind"] == "missing-imu");
  }

  TEST_CASE("stats on a two-timestamp session reports one interval") {
    TempDir dir("cli-toy");
    write_session(testing::tiny_session(2, 2), dir.path());
    const auto hist = (dir / "hist.csv").string();
    const auto r = run({"-q", "--format", "json", "stats", dir.path().string(), "--hist", hist});
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    for (const auto& s : j["streams"]) {
      if (s["name"] == "frames" || s["name"] == "imu") CHECK(s["stats"]["count"] == 1);
    }
    CHECK(slurp(hist).rfind("bin_start_ns,bin_end_ns,count", 0) == 0);
    const auto text = run({"-q", "stats", dir.path().string()});
    CHECK(text.code == 0);
    CHECK(text.out.find("frames") != std::string::npos);
  }

  TEST_CASE("usage errors exit 2 with usage text") {
    for (const auto& args : std::vector<std::vector<std::string>>{
             {"frobnicate"}, {}, {"simulate"}, {"--format", "xml", "validate", "."}}) {
      const auto r = run(args);
      CHECK(r.code == 2);
      CHECK(r.err.find("Usage") != std::string::npos);
    }
    TempDir dir("cli-cfg");
    const auto bad = run({"simulate", "--set", "nonsense=1", "--out", (dir / "x").string()});
    CHECK(bad.code == 2);
    CHECK(bad.err.find("nonsense") != std::string::npos);
  }

  TEST_CASE("input errors exit 3") {
    TempDir dir("cli-io");
    CHECK(run({"validate", dir.path().string()}).code == 3);
    spit(dir / "manifest.json", "[]");
    CHECK(run({"stats", dir.path().string()}).code == 3);
  }

  TEST_CASE("simulate, sync and export chain together") {
    TempDir dir("cli-chain");
    const auto raw = (dir / "raw").string();
    const auto synced = (dir / "synced").string();
    const auto slam = (dir / "slam").string();
    REQUIRE(run({"-q", "simulate", "--set", "duration_s=2", "--set", "imu_layout=raw", "--out", raw}).code == 0);
    const auto s = run({"--format", "json", "sync", raw, "--out", synced});
    REQUIRE(s.code == 0);
    const auto j = nlohmann::json::parse(s.out);
    CHECK(j["map"]["offset_ns"] == -30'000'000);
    CHECK(j["clock"] == "boottime");
    CHECK(run({"-q", "validate", synced}).code == 0);
    CHECK(run({"-q", "export", synced, "--out", slam}).code == 0);
    CHECK(fs::exists(dir / "slam" / "imu0" / "data.csv"));
    CHECK(fs::exists(dir / "slam" / "cam0" / "data.csv"));
    CHECK(run({"-q", "sync", raw, "--target-clock", "monotonic", "--out", (dir / "x").string()}).code == 3);
  }

  TEST_CASE("identical invocations produce identical bytes") {
    TempDir dir("cli-det");
    TempDir other("cli-det2");
    spit(dir / "sim.cfg", "# bench\nduration_s = 4\ndropout_prob = 0.1\nmotion = sinusoidal\n"
                          "motion.accel_amplitude = 0.5, 0.2, 0.1\n");
    const auto cfg = (dir / "sim.cfg").string();
    for (const auto* d : {&dir, &other}) {
      REQUIRE(run({"-q", "--seed", "9", "simulate", "--config", cfg, "--out", (*d / "out").string()}).code == 0);
    }
    CHECK(testing::snapshot(dir / "out") == testing::snapshot(other / "out"));
    REQUIRE(run({"-q", "--seed", "10", "simulate", "--config", cfg, "--out", (other / "out").string()}).code == 0);
    CHECK_FALSE(testing::snapshot(dir / "out") == testing::snapshot(other / "out"));
  }

  TEST_CASE("config text parsing") {
    SimConfig c;
    cli::apply_config_text("duration_s = 60  # one minute\n\nimu_rate_hz=200\nseed = 7\noptics = empirical\n"
                           "motion.frequency_hz = 1, 2, 3\n",
                           c);
    CHECK(c.duration_s == 60.0);
    CHECK(c.imu_rate_hz == 200.0);
    CHECK(c.seed == 7);
    CHECK(c.optics == MetadataSource::kEmpiricalDefault);
    REQUIRE(std::holds_alternative<Sinusoidal>(c.motion));
    CHECK(std::get<Sinusoidal>(c.motion).frequency_hz == Vec3{1, 2, 3});
    CHECK(code_of([&] { cli::apply_config_text("duration_s\n", c); }) == ErrorCode::kInvalidConfig);
    CHECK(code_of([&] { cli::apply_config_text("duration_s = ten\n", c); }) == ErrorCode::kInvalidConfig);
    CHECK(code_of([&] { cli::apply_config_text("motion.phase_rad = 1, 2\n", c); }) == ErrorCode::kInvalidConfig);
  }
}
