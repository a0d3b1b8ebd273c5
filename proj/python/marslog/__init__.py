"""Visual-inertial session log tooling (Python bindings)."""

import json as _json

from ._core import (
    ClockMap,
    FrameRecord,
    ImuSample,
    Instant,
    IntervalStats,
    MarslogError,
    Session,
    SimConfig,
    SimGroundTruth,
    SyncedSession,
    center_frame_time,
    detect_gaps,
    export_slam_layout,
    fit_clock_map,
    histogram_csv,
    interpolate_accel_at_gyro,
    interval_stats,
    read_session,
    run_cli,
    simulate_session,
    synchronize_session,
    to_session,
    validate_session,
    write_session,
)


def session_report(session):
    """Diagnostics report of a session as a dict."""
    from ._core import session_report_json

    return _json.loads(session_report_json(session))


__all__ = [
    "ClockMap",
    "FrameRecord",
    "ImuSample",
    "Instant",
    "IntervalStats",
    "MarslogError",
    "Session",
    "SimConfig",
    "SimGroundTruth",
    "SyncedSession",
    "center_frame_time",
    "detect_gaps",
    "export_slam_layout",
    "fit_clock_map",
    "histogram_csv",
    "interpolate_accel_at_gyro",
    "interval_stats",
    "read_session",
    "run_cli",
    "session_report",
    "simulate_session",
    "synchronize_session",
    "to_session",
    "validate_session",
    "write_session",
]
