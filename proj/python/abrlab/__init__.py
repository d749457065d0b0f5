"""Playback-buffer simulator for adaptive streaming."""

from ._abrlab import (
    CapacityTrace,
    InvalidInput,
    IoError,
    SessionEvent,
    SessionLog,
    VideoManifest,
    sticky_rate_choice,
    algorithm_names,
    capacity_integral,
    compute_metrics,
    compute_reservoir,
    constant_trace,
    generate_outage_trace,
    generate_vbr_manifest,
    invert_capacity,
    load_capacity_trace,
    load_manifest,
    parse_capacity_trace,
    parse_manifest,
    run_cli,
    simulate,
    timeseries,
    trace_from_points,
)

__all__ = [
    "CapacityTrace",
    "InvalidInput",
    "IoError",
    "SessionEvent",
    "SessionLog",
    "VideoManifest",
    "sticky_rate_choice",
    "algorithm_names",
    "capacity_integral",
    "compute_metrics",
    "compute_reservoir",
    "constant_trace",
    "generate_outage_trace",
    "generate_vbr_manifest",
    "invert_capacity",
    "load_capacity_trace",
    "load_manifest",
    "parse_capacity_trace",
    "parse_manifest",
    "run_cli",
    "simulate",
    "timeseries",
    "trace_from_points",
]
