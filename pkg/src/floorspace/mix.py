"""Per-listener gain matrices derived from the floor partition."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ParticipantMismatch
from .model import FloorPartition, ParticipantId

# absorbs float drift so a ramp that lands within rounding of the target snaps to it
_SNAP = 1e-12


@dataclass(frozen=True)
class MixConfig:
    same_gain: float = 1.0
    other_gain: float = 0.25
    ramp: float = 0.1

    def __post_init__(self):
        if not 0.0 <= self.other_gain <= self.same_gain <= 1.0:
            raise ValueError("need 0 <= other_gain <= same_gain <= 1")
        if not self.ramp > 0:
            raise ValueError("ramp must be positive")


@dataclass(frozen=True, eq=False)
class GainMatrix:
    """Linear amplitude levels; row = listener, column = source."""

    participants: tuple[ParticipantId, ...]
    levels: np.ndarray

    def __post_init__(self):
        levels = np.array(self.levels, dtype=float)
        levels.setflags(write=False)
        object.__setattr__(self, "levels", levels)
        object.__setattr__(self, "participants", tuple(self.participants))

    def gain(self, listener: ParticipantId, source: ParticipantId) -> float:
        i = self.participants.index(listener)
        j = self.participants.index(source)
        return float(self.levels[i, j])

    def row(self, listener: ParticipantId) -> dict[ParticipantId, float]:
        """Gains heard by ``listener`` from every other participant."""
        i = self.participants.index(listener)
        return {p: float(self.levels[i, j]) for j, p in enumerate(self.participants) if j != i}

    def __eq__(self, other) -> bool:
        if not isinstance(other, GainMatrix):
            return NotImplemented
        return self.participants == other.participants and np.array_equal(self.levels, other.levels)


def target_gains(partition: FloorPartition, config: MixConfig = MixConfig()) -> GainMatrix:
    """Full gain for same-floor sources, attenuated gain for everyone else."""
    ids = partition.participants
    block = {p: i for i, b in enumerate(partition.floors) for p in b}
    labels = np.array([block[p] for p in ids])
    same = labels[:, None] == labels[None, :]
    levels = np.where(same, config.same_gain, config.other_gain)
    np.fill_diagonal(levels, 0.0)
    return GainMatrix(ids, levels)


def ramp_step(current: GainMatrix, target: GainMatrix, config: MixConfig = MixConfig()) -> GainMatrix:
    """Move every entry at most ``config.ramp`` toward the target, without overshoot."""
    if current.participants != target.participants:
        raise ParticipantMismatch(f"{current.participants} vs {target.participants}")
    diff = target.levels - current.levels
    moved = current.levels + np.clip(diff, -config.ramp, config.ramp)
    levels = np.where(np.abs(diff) <= config.ramp + _SNAP, target.levels, moved)
    return GainMatrix(current.participants, np.clip(levels, 0.0, 1.0))


def steps_to_converge(current: GainMatrix, target: GainMatrix, ramp: float) -> int:
    """Upper bound on :func:`ramp_step` calls needed to reach ``target``."""
    gap = float(np.max(np.abs(target.levels - current.levels), initial=0.0))
    if gap == 0.0:
        return 0
    return max(1, math.ceil((gap - _SNAP) / ramp))


def mix_records(matrix: GainMatrix, t: float, listeners: Sequence[ParticipantId] | None = None) -> list[dict]:
    return [
        {"type": "mix", "time": t, "listener": p, "gains": matrix.row(p)}
        for p in (matrix.participants if listeners is None else listeners)
    ]


__all__ = ["GainMatrix", "MixConfig", "mix_records", "ramp_step", "steps_to_converge", "target_gains"]
