"""Core value types: participants, voice-activity events, partitions, traces."""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterable, Optional, Sequence

from .errors import MalformedEvent

ParticipantId = str

DEFAULT_MERGE_GAP = 0.05


@dataclass(frozen=True)
class VadEvent:
    """One voice-activity interval, in seconds from session start."""

    speaker: ParticipantId
    start: float
    end: float

    @property
    def length(self) -> float:
        return self.end - self.start


def event_order(e: VadEvent) -> tuple:
    return (e.start, e.speaker, e.end)


Floors = tuple[tuple[ParticipantId, ...], ...]


def canonical_floors(floors: Iterable[Iterable[ParticipantId]]) -> Floors:
    """Sort members inside each block and blocks by their smallest member."""
    blocks = [tuple(sorted(b)) for b in floors]
    return tuple(sorted(blocks))


def check_partition(floors: Floors, participants: Iterable[ParticipantId]) -> list[str]:
    """Return reasons ``floors`` is not a set partition of ``participants``."""
    problems = []
    seen: set[ParticipantId] = set()
    for i, block in enumerate(floors):
        if not block:
            problems.append(f"floor {i} is empty")
        for p in block:
            if p in seen:
                problems.append(f"participant {p!r} appears in more than one floor")
            seen.add(p)
    expected = set(participants)
    if seen - expected:
        problems.append(f"unknown participants {sorted(seen - expected)}")
    if expected - seen:
        problems.append(f"participants not covered {sorted(expected - seen)}")
    return problems


def block_labels(floors: Floors) -> dict[ParticipantId, int]:
    return {p: i for i, block in enumerate(floors) for p in block}


@dataclass(frozen=True)
class FloorPartition:
    """A set partition of the participants into conversational floors.

    ``floors`` is always stored canonically, so two partitions with the
    same blocks compare equal on ``floors`` regardless of input order.
    """

    floors: Floors
    score: float = 0.0
    at: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "floors", canonical_floors(self.floors))

    @classmethod
    def single(cls, participants: Iterable[ParticipantId], at: float = 0.0) -> "FloorPartition":
        return cls((tuple(participants),), 0.0, at)

    @property
    def n_blocks(self) -> int:
        return len(self.floors)

    @property
    def participants(self) -> tuple[ParticipantId, ...]:
        return tuple(sorted(p for b in self.floors for p in b))

    def block_of(self, participant: ParticipantId) -> tuple[ParticipantId, ...]:
        for block in self.floors:
            if participant in block:
                return block
        raise KeyError(participant)

    def same_floor(self, a: ParticipantId, b: ParticipantId) -> bool:
        return b in self.block_of(a)


@dataclass(frozen=True)
class Trace:
    participants: tuple[ParticipantId, ...]
    events: tuple[VadEvent, ...]
    duration: float
    ground_truth: Optional[tuple[FloorPartition, ...]] = None

    def __post_init__(self):
        object.__setattr__(self, "participants", tuple(sorted(self.participants)))
        object.__setattr__(self, "events", tuple(self.events))
        if self.ground_truth is not None:
            object.__setattr__(self, "ground_truth", tuple(self.ground_truth))

    def truth_at(self, t: float) -> FloorPartition:
        """Ground-truth partition in force at time ``t``."""
        if not self.ground_truth:
            raise ValueError("trace has no ground truth")
        current = self.ground_truth[0]
        for entry in self.ground_truth:
            if entry.at <= t:
                current = entry
            else:
                break
        return current

    def relabel(self, mapping: dict[ParticipantId, ParticipantId]) -> "Trace":
        events = sorted((VadEvent(mapping[e.speaker], e.start, e.end) for e in self.events), key=event_order)
        truth = None
        if self.ground_truth is not None:
            truth = tuple(
                replace(g, floors=tuple(tuple(mapping[p] for p in b) for b in g.floors))
                for g in self.ground_truth
            )
        return Trace(tuple(mapping[p] for p in self.participants), tuple(events), self.duration, truth)

    def shifted(self, offset: float) -> "Trace":
        """Delay every event by ``offset`` seconds; truth keeps its t=0 entry."""
        events = tuple(VadEvent(e.speaker, e.start + offset, e.end + offset) for e in self.events)
        truth = None
        if self.ground_truth is not None:
            truth = [self.ground_truth[0]] + [
                replace(g, at=g.at + offset) for g in self.ground_truth[1:]
            ]
        return Trace(self.participants, events, self.duration + offset, truth)


def normalize_events(events: Sequence[VadEvent], merge_gap: float = DEFAULT_MERGE_GAP) -> list[VadEvent]:
    """Merge overlapping or nearly-touching intervals of the same speaker.

    Two consecutive intervals of one speaker merge when the silence between
    them is shorter than ``merge_gap`` (overlap counts as negative silence).
    Intervals of different speakers are never touched.
    """
    if merge_gap < 0:
        raise ValueError("merge_gap must be non-negative")
    per_speaker: dict[ParticipantId, list[VadEvent]] = {}
    for i, e in enumerate(events):
        if not e.end > e.start:
            raise MalformedEvent(f"event {i} ({e.speaker}) has end {e.end} <= start {e.start}")
        per_speaker.setdefault(e.speaker, []).append(e)

    out: list[VadEvent] = []
    for speaker, evs in per_speaker.items():
        evs.sort(key=event_order)
        start, end = evs[0].start, evs[0].end
        for e in evs[1:]:
            if e.start - end < merge_gap:
                end = max(end, e.end)
            else:
                out.append(VadEvent(speaker, start, end))
                start, end = e.start, e.end
        out.append(VadEvent(speaker, start, end))
    out.sort(key=event_order)
    return out


def validate_trace(trace: Trace) -> list[str]:
    """List every violated trace invariant; empty means the trace is well formed."""
    violations = []
    known = set(trace.participants)
    if len(known) != len(trace.participants):
        violations.append("participants: duplicate ids")
    if any(not p for p in trace.participants):
        violations.append("participants: empty id")
    if trace.duration < 0:
        violations.append(f"duration: negative ({trace.duration})")

    last_start = float("-inf")
    for i, e in enumerate(trace.events):
        if e.speaker not in known:
            violations.append(f"event {i}: speaker {e.speaker!r} not in participants")
        if not e.end > e.start:
            violations.append(f"event {i}: end {e.end} <= start {e.start}")
        if e.start < 0 or e.end > trace.duration:
            violations.append(f"event {i}: [{e.start}, {e.end}] outside [0, {trace.duration}]")
        if e.start < last_start:
            violations.append(f"event {i}: not sorted by start")
        last_start = e.start

    if trace.ground_truth is not None:
        prev = float("-inf")
        for i, g in enumerate(trace.ground_truth):
            if not g.at > prev:
                violations.append(f"ground_truth {i}: timestamp {g.at} does not increase")
            if g.at < 0 or g.at > trace.duration:
                violations.append(f"ground_truth {i}: timestamp {g.at} outside [0, {trace.duration}]")
            for problem in check_partition(g.floors, trace.participants):
                violations.append(f"ground_truth {i}: {problem}")
            prev = g.at
    return violations
