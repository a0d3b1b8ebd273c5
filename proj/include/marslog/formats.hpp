#pragma once

#include <filesystem>
#include <string>

#include "marslog/core.hpp"
#include "marslog/sync.hpp"

namespace marslog {

/// File names of the session layout.
namespace layout {
inline constexpr const char* kManifest = "manifest.json";
inline constexpr const char* kFrames = "frames.csv";
inline constexpr const char* kImu = "imu.csv";
inline constexpr const char* kGyro = "gyro.csv";
inline constexpr const char* kAccel = "accel.csv";
inline constexpr const char* kClockMarks = "clockmarks.csv";

inline constexpr const char* kFramesHeader = "index,t_start_ns,exposure_ns,readout_ns,fx,fy,cx,cy,source";
inline constexpr const char* kImuHeader = "t_ns,gx,gy,gz,ax,ay,az";
inline constexpr const char* kRawHeader = "t_ns,x,y,z";
inline constexpr const char* kClockMarksHeader = "label,t_a_ns,t_b_ns";
}  // namespace layout

/// Reads a session directory. Every timestamp is tagged with the clock named
/// in manifest.json.
///
/// Errors: kMissingFile, kMalformedLine (MalformedLineError with file, line
/// and reason), kClockMismatch, kNonMonotonicTimestamp.
Session read_session(const std::filesystem::path& root);

/// Writes `session` under `root`, creating the directory. Optional streams
/// that are absent produce no file and no manifest entry. Throws kIoFailure
/// when anything cannot be written.
void write_session(const Session& session, const std::filesystem::path& root);

/// Writes imu0/data.csv, cam0/data.csv and a sensor.yaml in each directory.
/// Throws kUnsyncedInput if the streams carry different clocks.
void export_slam_layout(const SyncedSession& synced, const std::filesystem::path& root);

/// Shortest decimal text that parses back to exactly `value`.
std::string format_double(double value);

}  // namespace marslog
