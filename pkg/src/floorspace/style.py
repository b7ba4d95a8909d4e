"""Style-switching channel controller (push-to-talk <-> full duplex)."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Mapping, Optional, Sequence

import numpy as np

from .features import Lapse, TransitionSample, lapses_in_window
from .model import ParticipantId


class ChannelMode(str, Enum):
    PUSH_TO_TALK = "push_to_talk"
    FULL_DUPLEX = "full_duplex"


@dataclass(frozen=True)
class EngagementSignals:
    recent_gaps: tuple[float, ...] = ()
    lapses: tuple[Lapse, ...] = ()
    # external hook: per-participant interest score in [0, 1]
    interest: Optional[Mapping[ParticipantId, float]] = None


@dataclass(frozen=True)
class ChannelState:
    mode: ChannelMode = ChannelMode.PUSH_TO_TALK
    # -inf: a fresh session has no previous transition to dwell on
    since: float = -math.inf
    pending_tone: bool = False


@dataclass(frozen=True)
class StyleConfig:
    fast_gap: float = 0.5
    min_samples: int = 5
    lapse_count: int = 2
    dwell: float = 10.0
    window: float = 30.0
    lapse_threshold: float = 2.0
    interest_level: float = 0.8
    interest_factor: float = 0.5


def engagement_signals(
    samples: Sequence[TransitionSample],
    lapses: Sequence[Lapse],
    t: float,
    window: float,
    interest: Optional[Mapping[ParticipantId, float]] = None,
) -> EngagementSignals:
    """Non-negative response gaps and lapses inside ``(t - window, t]``."""
    if window <= 0:
        raise ValueError("window must be positive")
    lo = t - window
    gaps = tuple(s.gap for s in samples if lo < s.at <= t and s.gap >= 0)
    return EngagementSignals(gaps, tuple(lapses_in_window(lapses, t, window)), interest)


def required_samples(signals: EngagementSignals, config: StyleConfig) -> int:
    interest = signals.interest
    if interest and all(v >= config.interest_level for v in interest.values()):
        return max(1, math.ceil(config.min_samples * config.interest_factor))
    return config.min_samples


def update_mode(
    state: ChannelState, signals: EngagementSignals, t: float, config: StyleConfig = StyleConfig()
) -> ChannelState:
    """One controller tick.

    Push-to-talk opens to full duplex when enough fast responses arrive with
    no lapse; full duplex falls back once lapses pile up. Either transition
    needs ``dwell`` seconds since the previous one.
    """
    if t < state.since:
        raise ValueError(f"time {t} precedes last transition at {state.since}")
    settled = t - state.since >= config.dwell
    if state.mode is ChannelMode.PUSH_TO_TALK:
        gaps = signals.recent_gaps
        if (
            settled
            and len(gaps) >= required_samples(signals, config)
            and float(np.median(gaps)) < config.fast_gap
            and not signals.lapses
        ):
            return ChannelState(ChannelMode.FULL_DUPLEX, t, True)
    elif settled and len(signals.lapses) >= config.lapse_count:
        return ChannelState(ChannelMode.PUSH_TO_TALK, t, False)
    return replace(state, pending_tone=False)


def mode_record(state: ChannelState, t: float) -> dict:
    return {"type": "mode", "time": t, "mode": state.mode.value, "tone": state.pending_tone}


__all__ = [
    "ChannelMode",
    "ChannelState",
    "EngagementSignals",
    "StyleConfig",
    "engagement_signals",
    "mode_record",
    "update_mode",
]
