"""Floor partition scoring, inference and tracking.

Scoring model
-------------
Samples are grouped by the utterance they describe, ``(next, at)``. Within a
candidate partition, the anchor of an utterance is the prior speaker in the
same floor as ``next`` whose turn ended latest (smallest gap, ties to the
smaller id). The anchor's gap is scored under the same-floor Gaussian; every
other sample of the utterance, same floor or not, is background and scored
under the uniform cross-floor density. With one sample per utterance this is
the plain per-sample sum.

Both densities have a floor, the uniform density over a support widened
three-fold, so a single implausible gap cannot veto a partition.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator, Optional, Sequence

import numpy as np

from .errors import (
    DegenerateData,
    InsufficientData,
    TooManyParticipants,
    UnknownParticipant,
)
from .features import TransitionSample, group_by_utterance
from .model import FloorPartition, Floors, ParticipantId, canonical_floors

EXHAUSTIVE_LIMIT = 10
_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)
_TIE_TOL = 1e-7


@dataclass(frozen=True)
class GapModel:
    """Same-floor Gaussian vs cross-floor uniform over signed gaps (seconds)."""

    same_mean: float = 0.2
    same_sd: float = 0.15
    diff_lo: float = -2.0
    diff_hi: float = 10.0

    def __post_init__(self):
        if not self.same_sd > 0:
            raise ValueError(f"same-floor sd must be positive, got {self.same_sd}")
        if not self.diff_hi > self.diff_lo:
            raise ValueError(f"uniform support needs lo < hi, got [{self.diff_lo}, {self.diff_hi}]")

    @property
    def floor_logpdf(self) -> float:
        return -math.log(3.0 * (self.diff_hi - self.diff_lo))

    def gaussian_logpdf(self, gaps) -> np.ndarray:
        z = (np.asarray(gaps, dtype=float) - self.same_mean) / self.same_sd
        return -0.5 * z * z - math.log(self.same_sd) - _LOG_SQRT_2PI

    def same_logpdf(self, gaps) -> np.ndarray:
        return np.maximum(self.gaussian_logpdf(gaps), self.floor_logpdf)

    def diff_logpdf(self, gaps) -> np.ndarray:
        g = np.asarray(gaps, dtype=float)
        inside = (g >= self.diff_lo) & (g <= self.diff_hi)
        return np.where(inside, -math.log(self.diff_hi - self.diff_lo), self.floor_logpdf)

    def to_record(self) -> dict:
        return {
            "type": "gap_model",
            "same_floor": {"mean": self.same_mean, "sd": self.same_sd},
            "diff_floor": {"lo": self.diff_lo, "hi": self.diff_hi},
        }

    @classmethod
    def from_record(cls, record: dict) -> "GapModel":
        try:
            same, diff = record["same_floor"], record["diff_floor"]
            return cls(float(same["mean"]), float(same["sd"]), float(diff["lo"]), float(diff["hi"]))
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed gap_model record: {exc}") from None


@dataclass(frozen=True)
class FloorChange:
    at: float
    before: FloorPartition
    after: FloorPartition
    kind: str

    @staticmethod
    def classify(before: FloorPartition, after: FloorPartition) -> str:
        if after.n_blocks > before.n_blocks:
            return "schism"
        if after.n_blocks < before.n_blocks:
            return "merge"
        return "reshuffle"


def fit_models(labeled: Iterable[tuple[float, bool]]) -> GapModel:
    """Maximum-likelihood Gaussian for same-floor gaps, widened uniform for the rest."""
    same, diff = [], []
    for gap, is_same in labeled:
        (same if is_same else diff).append(float(gap))
    if len(same) < 2:
        raise InsufficientData(f"need at least 2 same-floor gaps, got {len(same)}")
    if len(diff) < 2:
        raise InsufficientData(f"need at least 2 different-floor gaps, got {len(diff)}")
    same_arr = np.asarray(same)
    sd = float(same_arr.std())
    if sd == 0.0 or len(set(same)) < 2:
        raise DegenerateData("same-floor gaps are all identical")
    lo, hi = min(diff), max(diff)
    if hi == lo:
        raise DegenerateData("different-floor gaps are all identical")
    pad = 0.1 * (hi - lo)
    return GapModel(float(same_arr.mean()), sd, lo - pad, hi + pad)


# -- partition enumeration ---------------------------------------------------


@lru_cache(maxsize=None)
def enumerate_partitions(n: int) -> np.ndarray:
    """All set partitions of ``n`` items as restricted growth strings.

    Row ``r`` labels item ``i`` with block ``rgs[r, i]``; rows are in
    lexicographic order, which is the canonical tie-break order.
    """
    if n < 1:
        raise ValueError("need at least one item")
    rows: list[tuple[int, ...]] = []

    def grow(prefix: list[int], top: int) -> None:
        if len(prefix) == n:
            rows.append(tuple(prefix))
            return
        for label in range(top + 2):
            prefix.append(label)
            grow(prefix, max(top, label))
            prefix.pop()

    grow([0], 0)
    out = np.array(rows, dtype=np.int8)
    out.setflags(write=False)
    return out


def rgs_of(floors: Floors, ids: Sequence[ParticipantId]) -> tuple[int, ...]:
    """Restricted growth string of ``floors`` over the ordered ``ids``."""
    block = {p: i for i, b in enumerate(floors) for p in b}
    relabel: dict[int, int] = {}
    out = []
    for p in ids:
        out.append(relabel.setdefault(block[p], len(relabel)))
    return tuple(out)


def floors_from_labels(labels: Sequence[int], ids: Sequence[ParticipantId]) -> Floors:
    blocks: dict[int, list[ParticipantId]] = {}
    for p, lab in zip(ids, labels):
        blocks.setdefault(int(lab), []).append(p)
    return canonical_floors(blocks.values())


# -- scoring -----------------------------------------------------------------


@dataclass(frozen=True)
class _Utterance:
    next: int
    priors: np.ndarray  # participant indices, latest-ending first
    same_lp: np.ndarray
    diff_lp: np.ndarray
    at: float

    @property
    def background(self) -> float:
        return float(self.diff_lp.sum())

    def delta(self) -> np.ndarray:
        return self.same_lp - self.diff_lp


def _prepare(
    samples: Sequence[TransitionSample], index: dict[ParticipantId, int], model: GapModel
) -> list[_Utterance]:
    out = []
    for grp in group_by_utterance(samples):
        for s in grp:
            for p in (s.prior, s.next):
                if p not in index:
                    raise UnknownParticipant(f"sample at t={s.at} references unknown participant {p!r}")
        grp.sort(key=lambda s: (s.gap, s.prior))
        gaps = np.array([s.gap for s in grp])
        out.append(
            _Utterance(
                next=index[grp[0].next],
                priors=np.array([index[s.prior] for s in grp], dtype=np.intp),
                same_lp=model.same_logpdf(gaps),
                diff_lp=model.diff_logpdf(gaps),
                at=grp[0].at,
            )
        )
    return out


def _exact_score(utterances: Sequence[_Utterance], labels: Sequence[int]) -> float:
    terms = []
    for u in utterances:
        own = labels[u.next]
        anchor = -1
        for j, p in enumerate(u.priors):
            if labels[p] == own:
                anchor = j
                break
        for j in range(len(u.priors)):
            terms.append(u.same_lp[j] if j == anchor else u.diff_lp[j])
    return math.fsum(terms)


def _utterance_vector(u: _Utterance, columns: np.ndarray) -> np.ndarray:
    """Per-partition gain over background for one utterance.

    ``columns`` is the partition table transposed (participant-major), so
    ``columns[i]`` holds participant ``i``'s block label in every partition.
    """
    own = columns[u.next]
    delta = u.delta()
    out = np.zeros(columns.shape[1])
    # oldest prior first so the latest-ending same-floor prior wins
    for j in range(len(u.priors) - 1, -1, -1):
        out[columns[u.priors[j]] == own] = delta[j]
    return out


@lru_cache(maxsize=None)
def _columns(n: int) -> np.ndarray:
    cols = np.ascontiguousarray(enumerate_partitions(n).T)
    cols.setflags(write=False)
    return cols


def score_partition(
    samples: Sequence[TransitionSample], partition: FloorPartition | Floors, model: GapModel
) -> float:
    """Log-likelihood (nats) of ``samples`` under a floor partition."""
    floors = partition.floors if isinstance(partition, FloorPartition) else canonical_floors(partition)
    ids = sorted(p for b in floors for p in b)
    index = {p: i for i, p in enumerate(ids)}
    utterances = _prepare(samples, index, model)
    return _exact_score(utterances, rgs_of(floors, ids))


def _pick(table: np.ndarray, totals: np.ndarray, exact=None) -> int:
    """Row of the best score; ties go to fewer blocks, then to the lower row."""
    best = totals.max()
    rows = np.flatnonzero(totals >= best - _TIE_TOL * max(1.0, abs(best)))
    if exact is not None and len(rows) > 1:
        scores = [exact(r) for r in rows]
        top = max(scores)
        rows = [r for r, s in zip(rows, scores) if s == top]
    rows = np.asarray(rows)
    n_blocks = table[rows].max(axis=1)
    return int(rows[np.lexsort((rows, n_blocks))[0]])


def _greedy(utterances: Sequence[_Utterance], n: int) -> tuple[list[int], float]:
    labels = list(range(n))
    score = _exact_score(utterances, labels)
    while True:
        best = None
        blocks = sorted(set(labels))
        for i, a in enumerate(blocks):
            for b in blocks[i + 1 :]:
                trial = [a if lab == b else lab for lab in labels]
                s = _exact_score(utterances, trial)
                if s > score and (best is None or s > best[0]):
                    best = (s, trial)
        if best is None:
            return labels, score
        score, labels = best


def infer_partition(
    samples: Sequence[TransitionSample],
    participants: Iterable[ParticipantId],
    model: GapModel,
    method: str = "exhaustive",
) -> FloorPartition:
    """Most likely floor partition given the samples.

    ``exhaustive`` scores every set partition (Bell-number many; at most
    ``EXHAUSTIVE_LIMIT`` participants). ``greedy`` starts from singletons and
    applies the best strictly improving block merge until none is left.
    """
    ids = sorted(set(participants))
    if not ids:
        raise ValueError("participants must be non-empty")
    index = {p: i for i, p in enumerate(ids)}
    utterances = _prepare(samples, index, model)
    at = max((s.at for s in samples), default=0.0)

    if method == "greedy":
        labels, score = _greedy(utterances, len(ids))
        return FloorPartition(floors_from_labels(labels, ids), score, at)
    if method != "exhaustive":
        raise ValueError(f"unknown method {method!r}")
    if len(ids) > EXHAUSTIVE_LIMIT:
        raise TooManyParticipants(f"exhaustive search supports at most {EXHAUSTIVE_LIMIT} participants")

    table = enumerate_partitions(len(ids))
    columns = _columns(len(ids))
    totals = np.zeros(len(table))
    for u in utterances:
        totals += _utterance_vector(u, columns)
    row = _pick(table, totals, exact=lambda r: _exact_score(utterances, table[r]))
    score = _exact_score(utterances, table[row])
    return FloorPartition(floors_from_labels(table[row], ids), score, at)


# -- tracking ----------------------------------------------------------------


@dataclass(frozen=True)
class TrackConfig:
    tick: float = 0.25
    # a window straddling a schism lags it by roughly 0.4 * window + hold
    window: float = 12.0
    margin: float = 2.0
    hold: float = 2.0
    # exhaustive search per tick up to this many participants, greedy above
    exhaustive_limit: int = 8

    def __post_init__(self):
        if not (self.tick > 0 and self.window > 0):
            raise ValueError("tick and window must be positive")
        if self.hold < 0 or self.margin < 0:
            raise ValueError("hold and margin must be non-negative")


@dataclass
class _WindowEntry:
    at: float
    utterance: _Utterance
    vector: Optional[np.ndarray]
    members: tuple[int, ...]


class FloorTracker:
    """Hysteresis state machine over a sliding window of transition samples.

    Feed it ticks in time order with :meth:`step`. Each tick the best
    partition of the window is computed; the published partition only moves
    to it after it has beaten the published one by ``margin`` nats on every
    tick for ``hold`` seconds.
    """

    _RESYNC_EVERY = 1024

    def __init__(
        self,
        participants: Iterable[ParticipantId],
        model: GapModel = GapModel(),
        config: TrackConfig = TrackConfig(),
    ):
        self.ids = sorted(set(participants))
        if not self.ids:
            raise ValueError("participants must be non-empty")
        self.index = {p: i for i, p in enumerate(self.ids)}
        self.model = model
        self.config = config
        self.vectorized = len(self.ids) <= min(config.exhaustive_limit, EXHAUSTIVE_LIMIT)
        if self.vectorized:
            self.table = enumerate_partitions(len(self.ids))
            self.columns = _columns(len(self.ids))
            self.row_of = {tuple(int(x) for x in r): i for i, r in enumerate(self.table)}
            self.totals = np.zeros(len(self.table))
        self.entries: deque[_WindowEntry] = deque()
        self.background = 0.0
        self.activity = [0] * len(self.ids)
        self._edits = 0
        self.current = FloorPartition.single(self.ids, 0.0)
        self.pending_since: Optional[float] = None
        self.last_change_at: Optional[float] = None

    # window bookkeeping

    def _add(self, u: _Utterance) -> None:
        vector = _utterance_vector(u, self.columns) if self.vectorized else None
        members = tuple(sorted({u.next, *u.priors.tolist()}))
        self.entries.append(_WindowEntry(u.at, u, vector, members))
        if vector is not None:
            self.totals += vector
        self.background += u.background
        for m in members:
            self.activity[m] += 1
        self._edits += 1

    def _evict(self, cutoff: float) -> None:
        while self.entries and self.entries[0].at <= cutoff:
            e = self.entries.popleft()
            if e.vector is not None:
                self.totals -= e.vector
            self.background -= e.utterance.background
            for m in e.members:
                self.activity[m] -= 1
            self._edits += 1
        if self._edits >= self._RESYNC_EVERY or not self.entries:
            self._resync()

    def _resync(self) -> None:
        self._edits = 0
        self.background = math.fsum(e.utterance.background for e in self.entries)
        if self.vectorized:
            self.totals = np.zeros(len(self.table))
            for e in self.entries:
                self.totals += e.vector

    # scoring helpers

    def _score(self, floors: Floors) -> float:
        labels = rgs_of(floors, self.ids)
        if self.vectorized:
            return float(self.totals[self.row_of[labels]]) + self.background
        return _exact_score([e.utterance for e in self.entries], labels)

    def _best(self) -> Floors:
        if self.vectorized:
            row = _pick(self.table, self.totals)
            return floors_from_labels(self.table[row], self.ids)
        labels, _ = _greedy([e.utterance for e in self.entries], len(self.ids))
        return floors_from_labels(labels, self.ids)

    def _keep_silent(self, candidate: Floors) -> Floors:
        """Participants absent from the window stay with their current floor."""
        active = {self.ids[i] for i, c in enumerate(self.activity) if c > 0}
        if len(active) == len(self.ids):
            return candidate
        blocks = [set(b) & active for b in candidate]
        blocks = [b for b in blocks if b]
        orphans: dict[tuple, set] = {}
        for p in self.ids:
            if p in active:
                continue
            home = self.current.block_of(p)
            mates = sorted(set(home) & active)
            if mates:
                next(b for b in blocks if mates[0] in b).add(p)
            else:
                orphans.setdefault(home, set()).add(p)
        return canonical_floors(list(blocks) + list(orphans.values()))

    # public API

    def step(
        self, t: float, new_samples: Sequence[TransitionSample] = ()
    ) -> tuple[FloorPartition, Optional[FloorChange]]:
        """Advance to time ``t`` after absorbing samples with ``at <= t``."""
        for u in _prepare(new_samples, self.index, self.model):
            self._add(u)
        self._evict(t - self.config.window)

        current_score = self._score(self.current.floors)
        change = None
        if self.entries:
            candidate = self._keep_silent(self._best())
            cand_score = self._score(candidate)
            better = candidate != self.current.floors and cand_score - current_score >= self.config.margin
        else:
            better = False
        if not better:
            self.pending_since = None
        else:
            if self.pending_since is None:
                self.pending_since = t
            if t - self.pending_since >= self.config.hold:
                before = FloorPartition(self.current.floors, current_score, t)
                after = FloorPartition(candidate, cand_score, t)
                change = FloorChange(t, before, after, FloorChange.classify(before, after))
                self.current = after
                self.pending_since = None
                self.last_change_at = t
                current_score = cand_score
        self.current = FloorPartition(self.current.floors, current_score, t)
        return self.current, change


def tick_times(duration: float, tick: float) -> Iterator[float]:
    k = 0
    while k * tick <= duration + 1e-9:
        yield k * tick
        k += 1


def track(
    samples: Sequence[TransitionSample],
    participants: Iterable[ParticipantId],
    model: GapModel = GapModel(),
    config: TrackConfig = TrackConfig(),
    duration: Optional[float] = None,
) -> Iterator[tuple[FloorPartition, Optional[FloorChange]]]:
    """Run a :class:`FloorTracker` over ticks ``0, tick, 2*tick, ...`` up to ``duration``."""
    ordered = sorted(samples, key=lambda s: s.at)
    if duration is None:
        duration = ordered[-1].at if ordered else 0.0
    tracker = FloorTracker(participants, model, config)
    pos = 0
    for t in tick_times(duration, config.tick):
        end = pos
        while end < len(ordered) and ordered[end].at <= t:
            end += 1
        yield tracker.step(t, ordered[pos:end])
        pos = end


__all__ = [
    "EXHAUSTIVE_LIMIT",
    "FloorChange",
    "FloorPartition",
    "FloorTracker",
    "GapModel",
    "TrackConfig",
    "enumerate_partitions",
    "fit_models",
    "infer_partition",
    "score_partition",
    "track",
]
