#include "marslog/cli.hpp"

#include <charconv>
#include <fstream>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "marslog/diagnostics.hpp"
#include "marslog/error.hpp"
#include "marslog/formats.hpp"
#include "marslog/sync.hpp"

namespace marslog::cli {

namespace {

namespace fs = std::filesystem;

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value) {
  throw Error(ErrorCode::kInvalidConfig, "invalid value for '" + key + "': '" + value + "'");
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T v{};
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (value.empty() || ec != std::errc() || ptr != value.data() + value.size()) bad_value(key, value);
  return v;
}

Vec3 parse_vec3(const std::string& key, const std::string& value) {
  Vec3 out{};
  std::size_t start = 0;
  for (int i = 0; i < 3; ++i) {
    const std::size_t comma = value.find(',', start);
    if ((i < 2) == (comma == std::string::npos)) bad_value(key, value);
    out[i] = parse_number<double>(key, trim(value.substr(start, comma - start)));
    start = comma + 1;
  }
  return out;
}

Sinusoidal& as_sinusoidal(SimConfig& c) {
  if (!std::holds_alternative<Sinusoidal>(c.motion)) c.motion = Sinusoidal{};
  return std::get<Sinusoidal>(c.motion);
}

struct Globals {
  bool quiet = false;
  std::optional<std::uint64_t> seed;
  std::string format = "text";
};

class Context {
 public:
  Context(const Globals& g, std::ostream& out, std::ostream& err) : g_(g), out_(out), err_(err) {}

  std::ostream& out() { return out_; }
  std::ostream& err() { return err_; }
  bool json() const { return g_.format == "json"; }

  void info(const std::string& msg) {
    if (!g_.quiet) err_ << msg << '\n';
  }

  const Globals& globals() const { return g_; }

 private:
  const Globals& g_;
  std::ostream& out_;
  std::ostream& err_;
};

int cmd_simulate(Context& ctx, const std::string& config_path, const std::vector<std::string>& overrides,
                 const std::string& out_dir) {
  SimConfig config;
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) throw Error(ErrorCode::kMissingFile, "cannot open " + config_path);
    std::stringstream ss;
    ss << in.rdbuf();
    apply_config_text(ss.str(), config);
  }
  for (const auto& kv : overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::kInvalidConfig, "--set expects key=value, got '" + kv + "'");
    apply_config_entry(trim(kv.substr(0, eq)), trim(kv.substr(eq + 1)), config);
  }
  if (ctx.globals().seed) config.seed = *ctx.globals().seed;

  auto [session, truth] = simulate_session(config);
  const fs::path root = fs::path(out_dir);
  write_session(session, root);
  std::ofstream gt(root / kGroundTruthFile, std::ios::binary | std::ios::trunc);
  gt << to_json(truth).dump(2) << '\n';
  if (!gt) throw Error(ErrorCode::kIoFailure, "cannot write " + (root / kGroundTruthFile).string());

  ctx.info("simulated " + std::to_string(session.frames.size()) + " frames into " + root.string());
  if (ctx.json()) {
    ctx.out() << nlohmann::json{{"out", root.string()},
                                {"frames", session.frames.size()},
                                {"seed", config.seed}}
                     .dump()
              << '\n';
  }
  return kSuccess;
}

int cmd_validate(Context& ctx, const std::string& dir) {
  const Session s = read_session(dir);
  const auto violations = validate_session(s);
  if (ctx.json()) {
    nlohmann::json list = nlohmann::json::array();
    for (const auto& v : violations) {
      list.push_back({{"kind", to_string(v.kind)}, {"where", v.where}, {"message", v.message}});
    }
    ctx.out() << nlohmann::json{{"valid", violations.empty()}, {"violations", std::move(list)}}.dump(2) << '\n';
  } else {
    for (const auto& v : violations) ctx.out() << to_string(v.kind) << '\t' << v.where << '\t' << v.message << '\n';
  }
  ctx.info(violations.empty() ? "session is valid" : std::to_string(violations.size()) + " violation(s)");
  return violations.empty() ? kSuccess : kValidationFailed;
}

int cmd_stats(Context& ctx, const std::string& dir, const std::string& hist) {
  const Session s = read_session(dir);
  const SessionReport report = session_report(s);
  if (ctx.json()) {
    ctx.out() << to_json(report).dump(2) << '\n';
  } else {
    ctx.out() << to_text(report);
  }
  if (!hist.empty()) {
    std::ofstream h(hist, std::ios::binary | std::ios::trunc);
    h << histogram_csv(report);
    if (!h) throw Error(ErrorCode::kIoFailure, "cannot write " + hist);
    ctx.info("histogram written to " + hist);
  }
  return kSuccess;
}

int cmd_sync(Context& ctx, const std::string& dir, const std::string& target, const std::string& out_dir) {
  const Session s = read_session(dir);
  const ClockId clock = target.empty() ? s.manifest.imu_clock : ClockId(target);
  const SyncedSession synced = synchronize_session(s, clock);
  write_session(to_session(synced), fs::path(out_dir));

  const ClockMap& m = synced.applied_map;
  ctx.info("applied " + m.from().name() + " -> " + m.to().name() + " scale " + format_double(m.scale()) +
           " offset " + std::to_string(m.offset_ns()) + " ns; " + std::to_string(synced.frames.size()) +
           " frames, " + std::to_string(synced.imu.size()) + " IMU samples, " +
           std::to_string(synced.gyro_epochs_dropped) + " gyro epochs dropped");
  if (ctx.json()) {
    ctx.out() << nlohmann::json{{"clock", synced.clock.name()},
                                {"map",
                                 {{"from", m.from().name()},
                                  {"to", m.to().name()},
                                  {"scale", m.scale()},
                                  {"offset_ns", m.offset_ns()}}},
                                {"frames", synced.frames.size()},
                                {"imu", synced.imu.size()},
                                {"gyro_epochs_dropped", synced.gyro_epochs_dropped}}
                     .dump(2)
              << '\n';
  }
  return kSuccess;
}

int cmd_export(Context& ctx, const std::string& dir, const std::string& out_dir) {
  const Session s = read_session(dir);
  const SyncedSession synced = synchronize_session(s, s.manifest.imu_clock);
  export_slam_layout(synced, fs::path(out_dir));
  ctx.info("exported " + std::to_string(synced.frames.size()) + " frames and " + std::to_string(synced.imu.size()) +
           " IMU samples to " + out_dir);
  return kSuccess;
}

int exit_code_for(const Error& e) {
  switch (e.code()) {
    case ErrorCode::kInvalidConfig:
    case ErrorCode::kInvalidArgument:
      return kUsageError;
    default:
      return kIoOrParseError;
  }
}

}  // namespace

void apply_config_entry(const std::string& key, const std::string& value, SimConfig& c) {
  if (key == "duration_s") {
    c.duration_s = parse_number<double>(key, value);
  } else if (key == "imu_rate_hz") {
    c.imu_rate_hz = parse_number<double>(key, value);
  } else if (key == "frame_rate_hz") {
    c.frame_rate_hz = parse_number<double>(key, value);
  } else if (key == "accel_rate_hz") {
    c.accel_rate_hz = parse_number<double>(key, value);
  } else if (key == "exposure_ns") {
    c.exposure_ns = parse_number<std::int64_t>(key, value);
  } else if (key == "readout_ns") {
    c.readout_ns = parse_number<std::int64_t>(key, value);
  } else if (key == "camera_clock_offset_ns") {
    c.camera_clock_offset_ns = parse_number<std::int64_t>(key, value);
  } else if (key == "camera_clock_drift_ppm") {
    c.camera_clock_drift_ppm = parse_number<double>(key, value);
  } else if (key == "timestamp_jitter_std_ns") {
    c.timestamp_jitter_std_ns = parse_number<std::int64_t>(key, value);
  } else if (key == "dropout_prob") {
    c.dropout_prob = parse_number<double>(key, value);
  } else if (key == "seed") {
    c.seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "imu_layout") {
    if (value == "combined") {
      c.imu_layout = ImuLayout::kCombined;
    } else if (value == "raw") {
      c.imu_layout = ImuLayout::kRaw;
    } else {
      bad_value(key, value);
    }
  } else if (key == "optics") {
    if (value == "measured") {
      c.optics = MetadataSource::kMeasured;
    } else if (value == "empirical") {
      c.optics = MetadataSource::kEmpiricalDefault;
    } else {
      bad_value(key, value);
    }
  } else if (key == "motion") {
    if (value == "static-gravity") {
      c.motion = StaticGravity{};
    } else if (value == "sinusoidal") {
      as_sinusoidal(c);
    } else {
      bad_value(key, value);
    }
  } else if (key == "motion.gyro_amplitude") {
    as_sinusoidal(c).gyro_amplitude = parse_vec3(key, value);
  } else if (key == "motion.accel_amplitude") {
    as_sinusoidal(c).accel_amplitude = parse_vec3(key, value);
  } else if (key == "motion.frequency_hz") {
    as_sinusoidal(c).frequency_hz = parse_vec3(key, value);
  } else if (key == "motion.phase_rad") {
    as_sinusoidal(c).phase_rad = parse_vec3(key, value);
  } else {
    throw Error(ErrorCode::kInvalidConfig, "unknown config key '" + key + "'");
  }
}

void apply_config_text(const std::string& text, SimConfig& config) {
  std::istringstream in(text);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    const std::string body = trim(line.substr(0, line.find('#')));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::kInvalidConfig, "config line " + std::to_string(n) + ": expected key = value");
    }
    try {
      apply_config_entry(trim(body.substr(0, eq)), trim(body.substr(eq + 1)), config);
    } catch (const Error& e) {
      throw Error(e.code(), "config line " + std::to_string(n) + ": " + e.what());
    }
  }
}

int run(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Parse, validate, synchronize, simulate and export visual-inertial session logs", "marslog"};
  app.require_subcommand(1);

  Globals g;
  app.add_flag("--quiet,-q", g.quiet, "Suppress informational messages");
  app.add_option("--seed", g.seed, "Simulator seed (overrides the config file)");
  app.add_option("--format", g.format, "Output format")->check(CLI::IsMember({"text", "json"}));

  std::string config_path, out_dir, in_dir, hist, target;
  std::vector<std::string> overrides;

  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic session with ground truth");
  simulate->add_option("--config", config_path, "key = value config file")->check(CLI::ExistingFile);
  simulate->add_option("--set", overrides, "Override one config entry, key=value");
  simulate->add_option("--out", out_dir, "Output session directory")->required();

  auto* validate = app.add_subcommand("validate", "Report session invariant violations");
  validate->add_option("dir", in_dir, "Session directory")->required()->check(CLI::ExistingDirectory);

  auto* stats = app.add_subcommand("stats", "Sampling-interval diagnostics");
  stats->add_option("dir", in_dir, "Session directory")->required()->check(CLI::ExistingDirectory);
  stats->add_option("--hist", hist, "Write interval histogram CSV");

  auto* sync = app.add_subcommand("sync", "Bring frames onto the IMU clock and center frame times");
  sync->add_option("dir", in_dir, "Session directory")->required()->check(CLI::ExistingDirectory);
  sync->add_option("--target-clock", target, "Target clock (defaults to the IMU clock)");
  sync->add_option("--out", out_dir, "Output session directory")->required();

  auto* exp = app.add_subcommand("export", "Write the imu0/ cam0/ SLAM dataset layout");
  exp->add_option("dir", in_dir, "Session directory")->required()->check(CLI::ExistingDirectory);
  exp->add_option("--out", out_dir, "Output directory")->required();

  std::vector<std::string> args(argv.begin() + (argv.empty() ? 0 : 1), argv.end());
  std::reverse(args.begin(), args.end());  // CLI11 consumes from the back
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kUsageError;
  }

  Context ctx(g, out, err);
  try {
    if (*simulate) return cmd_simulate(ctx, config_path, overrides, out_dir);
    if (*validate) return cmd_validate(ctx, in_dir);
    if (*stats) return cmd_stats(ctx, in_dir, hist);
    if (*sync) return cmd_sync(ctx, in_dir, target, out_dir);
    if (*exp) return cmd_export(ctx, in_dir, out_dir);
  } catch (const Error& e) {
    err << "error: " << to_string(e.code()) << ": " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kIoOrParseError;
  }
  err << app.help();
  return kUsageError;
}

}  // namespace marslog::cli
