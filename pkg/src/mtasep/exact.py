"""Exact stationary distributions of the n-type TASEP on a ring.

Weights are integers: the weight of a state ``u`` is the number of multiline
states with ``q_m`` particles on line ``m`` whose bottom class-assigned line is
``u``.  Their total is the common denominator ``M = prod_m C(N, q_m)``.
"""

from __future__ import annotations

import csv
import io
import logging
from collections import defaultdict
from dataclasses import dataclass, field
from itertools import combinations
from math import comb
from typing import Iterator, Mapping, Optional, Sequence

from .core import HOLE, Counts, InfeasibleError, ResourceError, RingConfig, to_codes
from .multiline import _depart

log = logging.getLogger(__name__)

DEFAULT_CAP = 10**7


def _as_counts(p) -> Counts:
    return p if isinstance(p, Counts) else Counts(tuple(p))


def _check_feasible(N: int, counts: Counts) -> None:
    if N < 1:
        raise InfeasibleError(f"ring size must be >= 1, got {N}")
    if counts.total > N:
        raise InfeasibleError(f"{counts.total} particles do not fit on {N} sites")


def common_denominator(N: int, p) -> int:
    """``prod_m C(N, q_m)`` over the prefix sums ``q`` of ``p`` (exact integer)."""
    counts = _as_counts(p)
    _check_feasible(N, counts)
    M = 1
    for q in counts.q:
        M *= comb(N, q)
    return M


@dataclass
class WeightedDistribution:
    """Integer weights over ring states with a fixed count vector."""

    weights: dict
    denominator: int
    n_sites: int
    n_classes: int
    counts: Counts = field(default_factory=lambda: Counts(()))

    def weight(self, u) -> int:
        if not isinstance(u, RingConfig):
            u = RingConfig(tuple(u), self.n_classes)
        return self.weights.get(u, 0)

    def total(self) -> int:
        return sum(self.weights.values())

    def probabilities(self) -> dict:
        M = self.denominator
        return {u: w / M for u, w in self.weights.items()}

    def states(self) -> Iterator[RingConfig]:
        """Every ring state with the declared counts, including zero-weight ones."""
        for sites in ring_states(self.n_sites, self.counts):
            yield RingConfig(sites, self.n_classes)

    def minimal_states(self) -> list:
        return sorted((u for u, w in self.weights.items() if w == 1), key=_sort_key)


def _sort_key(u: RingConfig):
    return u.codes()


def ring_states(N: int, p) -> Iterator[tuple]:
    """All site tuples on ``Z_N`` with exactly ``p_r`` particles of class r."""
    counts = _as_counts(p)
    _check_feasible(N, counts)
    n = counts.n
    sites = [HOLE] * N

    def place(r: int, free: tuple):
        if r > n:
            yield tuple(sites)
            return
        for chosen in combinations(free, counts.p[r - 1]):
            for j in chosen:
                sites[j] = r
            rest = tuple(j for j in free if j not in chosen)
            yield from place(r + 1, rest)
            for j in chosen:
                sites[j] = HOLE

    yield from place(1, tuple(range(N)))


def _binary_lines(N: int, q: int) -> list:
    out = []
    for chosen in combinations(range(N), q):
        row = [HOLE] * N
        for j in chosen:
            row[j] = 1
        out.append(tuple(row))
    return out


def stationary_weights(N: int, n: int, p, cap: int = DEFAULT_CAP) -> WeightedDistribution:
    """Push the uniform multiline law through the tandem ring queues.

    The enumeration proceeds line by line, merging equal intermediate lines,
    so the work is far below the nominal ``M`` multiline states.
    """
    counts = _as_counts(p)
    if counts.n != n:
        raise ValueError(f"expected {n} counts, got {counts.n}")
    if n < 1:
        raise ValueError("need at least one class")
    M = common_denominator(N, counts)
    if M > cap:
        raise ResourceError(f"enumeration size {M} exceeds cap {cap}", M)
    q = counts.q
    level = {line: 1 for line in _binary_lines(N, q[0])}
    for m in range(1, n):
        services = _binary_lines(N, q[m])
        nxt: dict = defaultdict(int)
        for v, w in level.items():
            for s in services:
                nxt[_depart(v, s, m)] += w
        level = nxt
    weights = {RingConfig(sites, n): w for sites, w in level.items()}
    return WeightedDistribution(weights, M, N, n, counts)


def is_minimal_state(u: RingConfig) -> bool:
    """Local test for states of the smallest stationary weight.

    A hole must be followed by a hole or a class-``n`` particle; a class-``m``
    particle must be followed by something of class at least ``m - 1``.
    """
    n = u.n_classes
    sites = u.sites
    N = len(sites)
    for j in range(N):
        here, nxt = sites[j], sites[(j + 1) % N]
        if here == HOLE:
            if nxt != HOLE and nxt != n:
                return False
        elif nxt < here - 1:
            return False
    return True


def balance_defect(dist: WeightedDistribution) -> Optional[RingConfig]:
    """First state whose probability inflow differs from its outflow, if any."""
    N = dist.n_sites
    w = dist.weights
    n = dist.n_classes
    for y in ring_states(N, dist.counts):
        inflow = 0
        out_bells = 0
        for i in range(N):
            left, right = (i - 1) % N, i
            if y[left] < y[right]:
                x = list(y)
                x[left], x[right] = y[right], y[left]
                inflow += w.get(RingConfig(tuple(x), n), 0)
            elif y[left] > y[right]:
                out_bells += 1
        if inflow != w.get(RingConfig(y, n), 0) * out_bells:
            return RingConfig(y, n)
    return None


def verify_balance(dist: WeightedDistribution) -> bool:
    """Exact global balance of ``dist`` under unit-rate bells at every site."""
    bad = balance_defect(dist)
    if bad is not None:
        log.warning("global balance fails at %s (weight %d)", bad, dist.weight(bad))
        return False
    return True


def verify_minimal_weights(dist: WeightedDistribution) -> bool:
    """Check the integer-weight structure: every state has weight >= 1, the
    weights sum to ``M``, and weight 1 occurs exactly on the locally minimal
    states."""
    M = common_denominator(dist.n_sites, dist.counts)
    if dist.denominator != M or dist.total() != M:
        log.warning("weights sum to %d, expected %d", dist.total(), M)
        return False
    for u in dist.states():
        w = dist.weights.get(u, 0)
        if w < 1:
            log.warning("state %s has weight %d", u, w)
            return False
        if (w == 1) != is_minimal_state(u):
            log.warning("state %s: weight %d but minimal=%s", u, w, is_minimal_state(u))
            return False
    return True


def _reverse_value(v, n: int):
    # Reverse the order 1 < 2 < ... < n < HOLE: class 1 <-> HOLE, k -> n + 2 - k.
    if v == HOLE:
        return 1
    if v == 1:
        return HOLE
    return n + 2 - v


def reflect_reverse(u: RingConfig) -> RingConfig:
    """Mirror the ring (site j -> -j) and reverse the order of site values."""
    N, n = len(u), u.n_classes
    return RingConfig(tuple(_reverse_value(u[-j], n) for j in range(N)), n)


def reflected_counts(N: int, p) -> Counts:
    """Counts after :func:`reflect_reverse`: ``(holes, p_n, ..., p_2)``."""
    counts = _as_counts(p)
    return Counts((N - counts.total, *reversed(counts.p[1:])))


def reflect_distribution(dist: WeightedDistribution) -> WeightedDistribution:
    weights: dict = defaultdict(int)
    for u, w in dist.weights.items():
        weights[reflect_reverse(u)] += w
    counts = reflected_counts(dist.n_sites, dist.counts)
    return WeightedDistribution(
        dict(weights), dist.denominator, dist.n_sites, dist.n_classes, counts
    )


def tv_distance(a, b) -> float:
    """Total variation distance ``0.5 * sum |a - b|``.

    Accepts two mappings (missing keys count as zero) or two equal-length
    sequences of probabilities.
    """
    if isinstance(a, Mapping) and isinstance(b, Mapping):
        keys = set(a) | set(b)
        return 0.5 * sum(abs(float(a.get(k, 0.0)) - float(b.get(k, 0.0))) for k in keys)
    if len(a) != len(b):
        raise ValueError("probability vectors differ in length")
    return 0.5 * sum(abs(float(x) - float(y)) for x, y in zip(a, b))


def distribution_to_json(dist: WeightedDistribution) -> dict:
    states = [
        {"config": u.codes(), "weight": str(w)}
        for u, w in sorted(dist.weights.items(), key=lambda kv: _sort_key(kv[0]))
    ]
    return {
        "N": dist.n_sites,
        "n": dist.n_classes,
        "counts": list(dist.counts.p),
        "M": str(dist.denominator),
        "states": states,
    }


def distribution_to_csv(dist: WeightedDistribution) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([f"s{j}" for j in range(dist.n_sites)] + ["weight", "M"])
    for u, w in sorted(dist.weights.items(), key=lambda kv: _sort_key(kv[0])):
        writer.writerow(to_codes(u.sites) + [w, dist.denominator])
    return buf.getvalue()

