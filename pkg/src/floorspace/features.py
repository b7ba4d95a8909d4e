"""Turn-taking features: ordered-pair transition samples and lapses."""
from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass
from itertools import groupby
from typing import Iterator, Optional, Sequence

import numpy as np

from .errors import NotNormalized
from .model import ParticipantId, VadEvent, event_order

DEFAULT_HORIZON = 8.0


@dataclass(frozen=True)
class TransitionSample:
    """Signed gap from ``prior``'s latest turn end to ``next``'s turn start.

    Negative gaps are overlaps: ``next`` started while ``prior`` was still
    talking. ``at`` is the start time of ``next``'s utterance.
    """

    prior: ParticipantId
    next: ParticipantId
    gap: float
    at: float


@dataclass(frozen=True)
class Lapse:
    start: float
    end: float
    preceding_speaker: Optional[ParticipantId] = None

    @property
    def length(self) -> float:
        return self.end - self.start


def _check_normalized(events: Sequence[VadEvent]) -> None:
    last_end: dict[ParticipantId, float] = {}
    for e in sorted(events, key=event_order):
        if e.speaker in last_end and e.start < last_end[e.speaker]:
            raise NotNormalized(f"speaker {e.speaker!r} has overlapping intervals near t={e.start}")
        last_end[e.speaker] = max(e.end, last_end.get(e.speaker, e.end))


def extract_transitions(events: Sequence[VadEvent], horizon: float = DEFAULT_HORIZON) -> list[TransitionSample]:
    """Pair every utterance start with each other speaker's most recent turn end.

    For an utterance by ``b`` starting at ``t`` and every other speaker ``a``,
    take ``a``'s latest utterance that started strictly before ``t``; if its
    end lies within ``horizon`` of ``t`` a sample with gap ``t - end`` is
    emitted. Output is ordered by ``at``, then ``next``, then ``prior``.
    """
    if horizon <= 0:
        raise ValueError("horizon must be positive")
    _check_normalized(events)
    ordered = sorted(events, key=event_order)
    last_end: dict[ParticipantId, float] = {}
    out: list[TransitionSample] = []
    for start, group in groupby(ordered, key=lambda e: e.start):
        group = list(group)
        for e in group:
            for a in sorted(last_end):
                if a == e.speaker:
                    continue
                gap = start - last_end[a]
                if abs(gap) <= horizon:
                    out.append(TransitionSample(a, e.speaker, gap, start))
        # utterances starting at the same instant are not "before" each other
        for e in group:
            last_end[e.speaker] = e.end
    return out


def window_slice(samples: Sequence[TransitionSample], t: float, window: float) -> list[TransitionSample]:
    """Samples with ``at`` in the half-open window ``(t - window, t]``."""
    if window <= 0:
        raise ValueError("window must be positive")
    lo = t - window
    return [s for s in samples if lo < s.at <= t]


class SampleIndex:
    """Samples sorted by ``at`` with O(log n) window lookup."""

    def __init__(self, samples: Sequence[TransitionSample]):
        self.samples = sorted(samples, key=lambda s: s.at)
        self.times = [s.at for s in self.samples]
        responses = [s for s in self.samples if s.gap >= 0]
        self._resp_at = np.array([s.at for s in responses])
        self._resp_gap = np.array([s.gap for s in responses])

    def window(self, t: float, window: float) -> list[TransitionSample]:
        lo = bisect_right(self.times, t - window)
        hi = bisect_right(self.times, t)
        return self.samples[lo:hi]

    def response_gaps(self, t: float, window: float) -> np.ndarray:
        """Non-negative gaps of samples with ``at`` in ``(t - window, t]``."""
        lo, hi = np.searchsorted(self._resp_at, [t - window, t], side="right")
        return self._resp_gap[lo:hi]

    def upto(self, t: float, start: int = 0) -> tuple[list[TransitionSample], int]:
        """Samples from position ``start`` with ``at <= t``, plus the new position."""
        hi = bisect_right(self.times, t, lo=start)
        return self.samples[start:hi], hi


def group_by_utterance(samples: Sequence[TransitionSample]) -> Iterator[list[TransitionSample]]:
    """Group samples that share one utterance start ``(next, at)``."""
    key = lambda s: (s.at, s.next)
    for _, grp in groupby(sorted(samples, key=key), key=key):
        yield list(grp)


def speech_coverage(events: Sequence[VadEvent]) -> list[tuple[float, float, ParticipantId]]:
    """Union of all speech as disjoint intervals, each tagged with its last-ending speaker.

    Speakers ending together resolve to the later-starting utterance.
    """
    merged: list[list] = []
    for e in sorted(events, key=event_order):
        if merged and e.start <= merged[-1][1]:
            if e.end >= merged[-1][1]:
                merged[-1][1] = e.end
                merged[-1][2] = e.speaker
        else:
            merged.append([e.start, e.end, e.speaker])
    return [tuple(m) for m in merged]


def lapse_scan(events: Sequence[VadEvent], threshold: float, duration: float) -> list[Lapse]:
    """Maximal stretches of global silence lasting at least ``threshold``."""
    if threshold <= 0:
        raise ValueError("threshold must be positive")
    lapses = []
    cursor, preceding = 0.0, None
    for start, end, speaker in speech_coverage(events):
        start, end = max(start, 0.0), min(end, duration)
        if end <= 0.0:
            continue
        if start >= duration:
            break
        if start - cursor >= threshold:
            lapses.append(Lapse(cursor, start, preceding))
        if end >= cursor:
            cursor, preceding = end, speaker
    if duration - cursor >= threshold:
        lapses.append(Lapse(cursor, duration, preceding))
    return lapses


def lapses_in_window(lapses: Sequence[Lapse], t: float, window: float) -> list[Lapse]:
    lo = t - window
    return [lp for lp in lapses if lp.start < t and lp.end > lo]


__all__ = [
    "DEFAULT_HORIZON",
    "Lapse",
    "SampleIndex",
    "TransitionSample",
    "extract_transitions",
    "group_by_utterance",
    "lapse_scan",
    "lapses_in_window",
    "window_slice",
]
