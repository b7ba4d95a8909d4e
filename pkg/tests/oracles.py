"""Independent reference implementations used only by the tests.

Nothing here imports the package's scoring or enumeration code: partitions
are enumerated by recursive insertion, densities come from scipy.stats, and
the anchor rule is re-derived from its definition.
"""
from __future__ import annotations

import math
from collections import defaultdict
from functools import lru_cache

from scipy import stats


def all_partitions(items):
    """Every set partition of ``items`` (list), by inserting the first item."""
    if not items:
        yield []
        return
    if len(items) == 1:
        yield [[items[0]]]
        return
    first, rest = items[0], items[1:]
    for smaller in all_partitions(rest):
        for i in range(len(smaller)):
            yield smaller[:i] + [[first] + smaller[i]] + smaller[i + 1 :]
        yield [[first]] + smaller


def rgs(partition, ids):
    """Restricted growth string of ``partition`` over the ordered ``ids``."""
    where = {}
    for block in partition:
        for p in block:
            where[p] = frozenset(block)
    seen = []
    out = []
    for p in ids:
        if where[p] not in seen:
            seen.append(where[p])
        out.append(seen.index(where[p]))
    return tuple(out)


def canonical(partition):
    return tuple(sorted(tuple(sorted(b)) for b in partition))


@lru_cache(maxsize=None)
def densities(gap, mean, sd, lo, hi):
    """(same-floor, cross-floor) log densities with the 3x-support floor."""
    floor = math.log(1.0 / (3.0 * (hi - lo)))
    same = max(float(stats.norm.logpdf(gap, mean, sd)), floor)
    diff = float(stats.uniform.logpdf(gap, lo, hi - lo)) if lo <= gap <= hi else floor
    return same, diff


def oracle_score(samples, partition, model):
    """Log-likelihood of samples under ``partition`` by direct definition."""
    block = {}
    for b in partition:
        for p in b:
            block[p] = frozenset(b)
    utterances = defaultdict(list)
    for s in samples:
        utterances[(s.next, s.at)].append(s)
    terms = []
    for (nxt, _), group in utterances.items():
        mates = [s for s in group if block[s.prior] == block[nxt]]
        anchor = min(mates, key=lambda s: (s.gap, s.prior)) if mates else None
        for s in group:
            same, diff = densities(s.gap, model.same_mean, model.same_sd, model.diff_lo, model.diff_hi)
            terms.append(same if s is anchor else diff)
    return math.fsum(terms)


def oracle_argmax(samples, participants, model):
    """Best partition by brute force; ties to fewer blocks, then lexicographic RGS."""
    ids = sorted(participants)
    best = None
    for part in all_partitions(ids):
        score = oracle_score(samples, part, model)
        key = (-score, len(part), rgs(part, ids))
        if best is None or key < best[0]:
            best = (key, canonical(part), score)
    return best[1], best[2]


def bell(n):
    """Bell numbers via the Bell triangle."""
    row = [1]
    for _ in range(n - 1):
        nxt = [row[-1]]
        for x in row:
            nxt.append(nxt[-1] + x)
        row = nxt
    return row[-1]
