"""Conversational floor detection and adaptive mixing for multi-party audio spaces.

Typical use::

    from floorspace import SimConfig, generate_trace, evaluate, split_schedule

    ids = ("A", "B", "C", "D")
    trace = generate_trace(SimConfig(4, 120.0, schedule=split_schedule(ids, [60.0]), seed=7))
    report = evaluate(trace)
"""
from .errors import DataError
from .evaluate import EvalReport, PipelineConfig, evaluate, pairwise_accuracy, run_pipeline, schism_latency
from .features import Lapse, TransitionSample, extract_transitions, lapse_scan, window_slice
from .floors import (
    FloorChange,
    FloorTracker,
    GapModel,
    TrackConfig,
    fit_models,
    infer_partition,
    score_partition,
    track,
)
from .mix import GainMatrix, MixConfig, ramp_step, target_gains
from .model import FloorPartition, Trace, VadEvent, normalize_events, validate_trace
from .simulate import SimConfig, empirical_gap_stats, generate_trace, split_schedule
from .style import ChannelMode, ChannelState, EngagementSignals, StyleConfig, engagement_signals, update_mode
from .traceio import read_trace, write_trace

__version__ = "0.1.0"

__all__ = [
    "ChannelMode",
    "ChannelState",
    "DataError",
    "EngagementSignals",
    "EvalReport",
    "FloorChange",
    "FloorPartition",
    "FloorTracker",
    "GainMatrix",
    "GapModel",
    "Lapse",
    "MixConfig",
    "PipelineConfig",
    "SimConfig",
    "StyleConfig",
    "Trace",
    "TrackConfig",
    "TransitionSample",
    "VadEvent",
    "empirical_gap_stats",
    "engagement_signals",
    "evaluate",
    "extract_transitions",
    "fit_models",
    "generate_trace",
    "infer_partition",
    "lapse_scan",
    "normalize_events",
    "pairwise_accuracy",
    "ramp_step",
    "read_trace",
    "run_pipeline",
    "schism_latency",
    "score_partition",
    "split_schedule",
    "target_gains",
    "track",
    "update_mode",
    "validate_trace",
    "window_slice",
    "write_trace",
]
