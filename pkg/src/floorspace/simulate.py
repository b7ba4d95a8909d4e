"""Synthetic multi-floor conversations with ground-truth floor labels.

Within a floor speakers alternate: the next speaker is drawn uniformly from
the other members and starts a Gaussian gap after the previous turn ends
(negative gaps overlap). Floors never exchange turns, so their timing is
independent. The floor layout follows a schedule of ``(time, floors)``
entries; at each entry every new floor restarts its turn cycle.
"""
from __future__ import annotations

import math
import string
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .errors import InvalidSchedule, MissingGroundTruth
from .features import DEFAULT_HORIZON, TransitionSample, extract_transitions, group_by_utterance
from .model import (
    DEFAULT_MERGE_GAP,
    FloorPartition,
    Floors,
    ParticipantId,
    Trace,
    VadEvent,
    canonical_floors,
    check_partition,
    event_order,
    normalize_events,
)

MIN_TURN = 0.3
_MAX_REDRAWS = 1000
_DECIMALS = 6


def participant_ids(n: int) -> tuple[ParticipantId, ...]:
    if n <= 26:
        return tuple(string.ascii_uppercase[:n])
    width = len(str(n - 1))
    return tuple(f"P{i:0{width}d}" for i in range(n))


@dataclass(frozen=True)
class SimConfig:
    """Simulation parameters.

    ``turn_length`` and ``gap`` are ``(mean, sd)`` pairs in seconds. Turn
    lengths are redrawn until at least ``MIN_TURN``. An empty ``schedule``
    means one floor for the whole session.
    """

    participants: int = 4
    duration: float = 120.0
    turn_length: tuple[float, float] = (0.5, 0.2)
    gap: tuple[float, float] = (0.2, 0.15)
    schedule: tuple[tuple[float, Floors], ...] = ()
    seed: int = 0

    @property
    def ids(self) -> tuple[ParticipantId, ...]:
        return participant_ids(self.participants)


def split_schedule(
    ids: Sequence[ParticipantId], schisms: Sequence[float] = (), merges: Sequence[float] = ()
) -> tuple[tuple[float, Floors], ...]:
    """Schedule starting as one floor; each schism splits the largest floor in
    half, each merge joins the two smallest floors."""
    layout = canonical_floors([ids])
    out = [(0.0, layout)]
    actions = sorted([(float(t), "schism") for t in schisms] + [(float(t), "merge") for t in merges])
    for t, action in actions:
        blocks = list(layout)
        if action == "schism":
            big = max(blocks, key=len)
            if len(big) < 2:
                raise InvalidSchedule(f"schism at {t}: no floor with two or more members")
            blocks.remove(big)
            half = (len(big) + 1) // 2
            blocks += [big[:half], big[half:]]
        else:
            if len(blocks) < 2:
                raise InvalidSchedule(f"merge at {t}: only one floor")
            blocks.sort(key=lambda b: (len(b), b))
            blocks = [blocks[0] + blocks[1]] + blocks[2:]
        layout = canonical_floors(blocks)
        if t == out[-1][0]:
            out[-1] = (t, layout)
        else:
            out.append((t, layout))
    return tuple(out)


def _check_schedule(config: SimConfig) -> tuple[tuple[float, Floors], ...]:
    schedule = [(float(t), canonical_floors(f)) for t, f in config.schedule]
    if not schedule or schedule[0][0] > 0:
        schedule.insert(0, (0.0, canonical_floors([config.ids])))
    prev = -math.inf
    for t, floors in schedule:
        if not t > prev:
            raise InvalidSchedule(f"schedule time {t} does not increase")
        if t < 0 or t > config.duration:
            raise InvalidSchedule(f"schedule time {t} outside [0, {config.duration}]")
        problems = check_partition(floors, config.ids)
        if problems:
            raise InvalidSchedule(f"schedule entry at {t}: " + "; ".join(problems))
        prev = t
    return tuple(schedule)


class _Draws:
    def __init__(self, config: SimConfig):
        self.rng = np.random.Generator(np.random.PCG64(config.seed))
        self.turn_mean, self.turn_sd = config.turn_length
        self.gap_mean, self.gap_sd = config.gap

    def turn(self) -> float:
        for _ in range(_MAX_REDRAWS):
            x = self.rng.normal(self.turn_mean, self.turn_sd)
            if x >= MIN_TURN:
                return x
        return max(self.turn_mean, MIN_TURN)

    def start_after(self, prev_end: float, lower: float) -> float:
        """Turn start ``prev_end + gap`` with the gap redrawn until start >= lower."""
        for _ in range(_MAX_REDRAWS):
            start = prev_end + self.rng.normal(self.gap_mean, self.gap_sd)
            if start >= lower:
                return start
        return lower

    def pick(self, options: list[ParticipantId]) -> ParticipantId:
        return options[int(self.rng.integers(len(options)))]


def generate_trace(config: SimConfig) -> Trace:
    """Generate a ground-truth-labelled trace; identical configs give identical traces."""
    schedule = _check_schedule(config)
    draws = _Draws(config)
    duration = float(config.duration)
    last_start = {p: -math.inf for p in config.ids}
    last_end = {p: -math.inf for p in config.ids}
    events: list[VadEvent] = []

    for k, (t0, floors) in enumerate(schedule):
        t1 = schedule[k + 1][0] if k + 1 < len(schedule) else duration
        for floor in floors:
            if len(floor) < 2:
                continue
            # resume from whichever member is still talking or spoke last after t0
            prev = max(floor, key=lambda p: (last_end[p], p))
            if last_end[prev] <= t0:
                prev, prev_start, prev_end = None, -math.inf, t0
            else:
                prev_start, prev_end = last_start[prev], last_end[prev]
            while True:
                nxt = draws.pick([p for p in floor if p != prev])
                lower = max(t0, prev_start + 10.0**-_DECIMALS, last_end[nxt] + DEFAULT_MERGE_GAP)
                start = round(draws.start_after(prev_end, lower), _DECIMALS)
                if start >= t1 or start >= duration:
                    break
                end = round(min(start + draws.turn(), duration), _DECIMALS)
                if end > start:
                    events.append(VadEvent(nxt, start, end))
                    last_start[nxt], last_end[nxt] = start, end
                prev, prev_start, prev_end = nxt, start, end

    events.sort(key=event_order)
    truth = tuple(FloorPartition(floors, 0.0, t) for t, floors in schedule)
    return Trace(config.ids, tuple(events), duration, truth)


# -- ground-truth gap statistics --------------------------------------------


class GapStats(NamedTuple):
    mean: float
    sd: float
    count: int

    @property
    def defined(self) -> bool:
        return self.count > 0


def truth_labelled_samples(
    trace: Trace, horizon: float = DEFAULT_HORIZON, merge_gap: float = DEFAULT_MERGE_GAP
) -> list[tuple[TransitionSample, bool]]:
    """Transition samples labelled with whether they are true same-floor transitions.

    A sample counts as a same-floor transition when it is the latest-ending
    prior, among speakers sharing ``next``'s ground-truth floor at ``at``, of
    its utterance, and that prior turn ended after the layout in force at
    ``at`` began. A turn that ended before a schedule change is not a
    steady-state response. All other samples are labelled ``False``.
    """
    if not trace.ground_truth:
        raise MissingGroundTruth("trace has no ground-truth records")
    samples = extract_transitions(normalize_events(trace.events, merge_gap), horizon)
    out = []
    for grp in group_by_utterance(samples):
        truth = trace.truth_at(grp[0].at)
        mates = [s for s in grp if truth.same_floor(s.prior, s.next)]
        anchor = min(mates, key=lambda s: (s.gap, s.prior)) if mates else None
        if anchor is not None and anchor.at - anchor.gap < truth.at:
            anchor = None
        out.extend((s, s is anchor) for s in grp)
    return out


def empirical_gap_stats(trace: Trace, horizon: float = DEFAULT_HORIZON) -> GapStats:
    """Mean and population sd of same-floor transition gaps in a labelled trace."""
    gaps = np.array([s.gap for s, same in truth_labelled_samples(trace, horizon) if same])
    if len(gaps) == 0:
        return GapStats(math.nan, math.nan, 0)
    return GapStats(float(gaps.mean()), float(gaps.std()), len(gaps))


__all__ = [
    "GapStats",
    "MIN_TURN",
    "SimConfig",
    "empirical_gap_stats",
    "generate_trace",
    "participant_ids",
    "split_schedule",
    "truth_labelled_samples",
]
