import os
import sys

import pytest
from hypothesis import settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile("floorspace", deadline=None)
settings.load_profile("floorspace")

from floorspace.features import TransitionSample  # noqa: E402
from floorspace.model import VadEvent  # noqa: E402


def ev(speaker, start, end):
    return VadEvent(speaker, start, end)


def ts(prior, nxt, gap, at):
    return TransitionSample(prior, nxt, gap, at)


def alternating(pair, start, n, turn=1.0, gap=0.2):
    """``n`` alternating turns between the two speakers of ``pair``."""
    out, t = [], start
    for i in range(n):
        out.append(VadEvent(pair[i % 2], t, t + turn))
        t += turn + gap
    return out


@pytest.fixture
def two_pairs_events():
    """A<->B and C<->D talking concurrently, offset so they never line up."""
    return sorted(
        alternating("AB", 0.0, 40) + alternating("CD", 0.1, 40, turn=0.9, gap=0.25),
        key=lambda e: (e.start, e.speaker),
    )
