"""End-to-end pipeline and detector-vs-ground-truth metrics."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterator, Optional, Sequence, Union

import numpy as np

from .errors import MissingGroundTruth, ParticipantMismatch
from .features import (
    DEFAULT_HORIZON,
    Lapse,
    SampleIndex,
    extract_transitions,
    lapse_scan,
    lapses_in_window,
)
from .floors import FloorChange, FloorTracker, GapModel, TrackConfig, tick_times
from .mix import GainMatrix, MixConfig, ramp_step, target_gains
from .model import DEFAULT_MERGE_GAP, FloorPartition, Floors, Trace, normalize_events
from .style import ChannelState, EngagementSignals, StyleConfig, mode_record, update_mode

MISSED = "missed"


def _pair_relation(floors: Floors) -> dict[tuple[str, str], bool]:
    block = {p: i for i, b in enumerate(floors) for p in b}
    ids = sorted(block)
    return {(a, b): block[a] == block[b] for a, b in itertools.combinations(ids, 2)}


def pairwise_accuracy(truth: FloorPartition | Floors, predicted: FloorPartition | Floors) -> float:
    """Fraction of unordered participant pairs whose same-floor status agrees."""
    t = truth.floors if isinstance(truth, FloorPartition) else truth
    p = predicted.floors if isinstance(predicted, FloorPartition) else predicted
    rt, rp = _pair_relation(t), _pair_relation(p)
    if rt.keys() != rp.keys():
        raise ParticipantMismatch("partitions cover different participants")
    if not rt:
        raise ValueError("pairwise accuracy needs at least two participants")
    return sum(rt[k] == rp[k] for k in rt) / len(rt)


@dataclass(frozen=True)
class LatencyEntry:
    truth_time: float
    detect_time: Optional[float]
    kind: str

    @property
    def latency(self) -> Union[float, str]:
        return MISSED if self.detect_time is None else self.detect_time - self.truth_time

    @property
    def missed(self) -> bool:
        return self.detect_time is None


def truth_changes(timeline: Sequence[FloorPartition]) -> list[tuple[FloorPartition, FloorPartition]]:
    return [(a, b) for a, b in zip(timeline, timeline[1:]) if a.floors != b.floors]


def schism_latency(
    truth_timeline: Sequence[FloorPartition],
    detected: Sequence[FloorChange],
    match_window: float = 30.0,
) -> list[LatencyEntry]:
    """Match every ground-truth change to the first exact detection after it.

    A detection matches when it lands in ``[truth_time, truth_time +
    match_window]`` and its resulting partition equals the new truth. Each
    detection is used at most once, earliest truth change first.
    """
    used: set[int] = set()
    out = []
    for before, after in truth_changes(truth_timeline):
        kind = FloorChange.classify(before, after)
        hit = None
        for i, d in enumerate(detected):
            if i in used or d.at < after.at or d.at > after.at + match_window:
                continue
            if d.after.floors == after.floors:
                hit = i
                break
        if hit is None:
            out.append(LatencyEntry(after.at, None, kind))
        else:
            used.add(hit)
            out.append(LatencyEntry(after.at, detected[hit].at, kind))
    return out


@dataclass(frozen=True)
class PipelineConfig:
    merge_gap: float = DEFAULT_MERGE_GAP
    horizon: float = DEFAULT_HORIZON
    match_window: float = 30.0
    track: TrackConfig = field(default_factory=TrackConfig)
    mix: MixConfig = field(default_factory=MixConfig)
    style: StyleConfig = field(default_factory=StyleConfig)


@dataclass(frozen=True)
class Tick:
    t: float
    partition: FloorPartition
    change: Optional[FloorChange]
    gains: GainMatrix
    channel: ChannelState


def known_lapses(lapses: Sequence[Lapse], t: float, threshold: float) -> list[Lapse]:
    """Lapses as a live system sees them at ``t``: qualified by now, clipped to now."""
    out = []
    for lp in lapses:
        if lp.start + threshold > t:
            break
        out.append(lp if lp.end <= t else Lapse(lp.start, t, lp.preceding_speaker))
    return out


def run_pipeline(
    trace: Trace, model: GapModel = GapModel(), config: PipelineConfig = PipelineConfig()
) -> Iterator[Tick]:
    """normalize -> features -> track -> mix -> style, one :class:`Tick` per tracker tick."""
    events = normalize_events(trace.events, config.merge_gap)
    samples = extract_transitions(events, config.horizon)
    lapses = lapse_scan(events, config.style.lapse_threshold, trace.duration)
    index = SampleIndex(samples)
    tracker = FloorTracker(trace.participants, model, config.track)
    channel = ChannelState()
    gains = None
    targets: dict[Floors, GainMatrix] = {}
    pos = 0
    for t in tick_times(trace.duration, config.track.tick):
        new, pos = index.upto(t, pos)
        partition, change = tracker.step(t, new)
        target = targets.get(partition.floors)
        if target is None:
            target = targets[partition.floors] = target_gains(partition, config.mix)
        gains = target if gains is None else ramp_step(gains, target, config.mix)
        style = config.style
        signals = EngagementSignals(
            tuple(index.response_gaps(t, style.window).tolist()),
            tuple(lapses_in_window(known_lapses(lapses, t, style.lapse_threshold), t, style.window)),
        )
        channel = update_mode(channel, signals, t, style)
        yield Tick(t, partition, change, gains, channel)


@dataclass(frozen=True)
class EvalReport:
    pairwise_accuracy: float
    per_tick_accuracy: tuple[tuple[float, float], ...]
    schism_latencies: tuple[LatencyEntry, ...]
    mode_timeline: tuple[dict, ...]
    changes: tuple[FloorChange, ...] = ()

    def records(self) -> list[dict]:
        out = [
            {
                "type": "summary",
                "pairwise_accuracy": self.pairwise_accuracy,
                "ticks": len(self.per_tick_accuracy),
                "floor_changes": len(self.changes),
                "truth_changes": len(self.schism_latencies),
                "missed": sum(e.missed for e in self.schism_latencies),
            }
        ]
        out += [{"type": "tick", "time": t, "accuracy": a} for t, a in self.per_tick_accuracy]
        out += [
            {
                "type": "latency",
                "kind": e.kind,
                "truth_time": e.truth_time,
                "detect_time": e.detect_time,
                "latency": e.latency,
            }
            for e in self.schism_latencies
        ]
        out += list(self.mode_timeline)
        return out

    def summary(self) -> str:
        lines = [
            f"{'pairwise accuracy':<22}{self.pairwise_accuracy:>10.4f}",
            f"{'ticks':<22}{len(self.per_tick_accuracy):>10d}",
            f"{'detected changes':<22}{len(self.changes):>10d}",
            f"{'mode changes':<22}{len(self.mode_timeline):>10d}",
            "",
            f"{'truth t':>10}{'kind':>11}{'detected':>10}{'latency':>10}",
        ]
        for e in self.schism_latencies:
            det = "-" if e.detect_time is None else f"{e.detect_time:.2f}"
            lat = MISSED if e.missed else f"{e.latency:.2f}"
            lines.append(f"{e.truth_time:>10.2f}{e.kind:>11}{det:>10}{lat:>10}")
        if not self.schism_latencies:
            lines.append(f"{'(no ground-truth changes)':>41}")
        return "\n".join(lines)


def _time_weighted(per_tick: Sequence[tuple[float, float]], duration: float) -> float:
    if not per_tick:
        return 1.0
    times = np.array([t for t, _ in per_tick])
    acc = np.array([a for _, a in per_tick])
    weights = np.diff(np.append(times, max(duration, times[-1])))
    if weights.sum() <= 0:
        return float(acc.mean())
    return float(np.dot(weights, acc) / weights.sum())


def evaluate(trace: Trace, model: GapModel = GapModel(), config: PipelineConfig = PipelineConfig()) -> EvalReport:
    if not trace.ground_truth:
        raise MissingGroundTruth("evaluate needs a trace with ground-truth records")
    per_tick, changes, modes = [], [], []
    single = len(trace.participants) < 2
    for tick in run_pipeline(trace, model, config):
        truth = trace.truth_at(tick.t)
        per_tick.append((tick.t, 1.0 if single else pairwise_accuracy(truth, tick.partition)))
        if tick.change is not None:
            changes.append(tick.change)
        if tick.channel.since == tick.t:
            modes.append(mode_record(tick.channel, tick.t))
    latencies = schism_latency(trace.ground_truth, changes, config.match_window)
    return EvalReport(
        _time_weighted(per_tick, trace.duration),
        tuple(per_tick),
        tuple(latencies),
        tuple(modes),
        tuple(changes),
    )


__all__ = [
    "EvalReport",
    "LatencyEntry",
    "PipelineConfig",
    "Tick",
    "evaluate",
    "pairwise_accuracy",
    "run_pipeline",
    "schism_latency",
]
