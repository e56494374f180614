"""Discrete-time multiclass priority queues.

A queue with ``m`` arrival classes is fed an arrival process ``a`` (classes
``1..m`` or HOLE) and a binary service process ``s`` (1 = service available,
HOLE = none).  At a service time the lowest-numbered class present departs;
an idle service emits the extra class ``m + 1``.  Only class counts are
tracked, since customers of equal class are interchangeable.

Two routes to the departure process on a ring are provided: the collapse
construction (:func:`departure_ring`) and the queue-length recurrence
(:func:`departure_ring_recurrence`).  They must agree everywhere.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .core import (
    HOLE,
    ClassValue,
    Config,
    InfeasibleError,
    RingConfig,
    ShapeError,
    WindowConfig,
)


@dataclass(frozen=True)
class QueueState:
    """Nested counts ``(Q^{<=1}, ..., Q^{<=m})`` of customers in the queue."""

    q_le: tuple

    def __post_init__(self):
        q = tuple(int(c) for c in self.q_le)
        if any(c < 0 for c in q):
            raise ValueError(f"queue counts must be nonnegative, got {q}")
        if any(a > b for a, b in zip(q, q[1:])):
            raise ValueError(f"queue counts must be nondecreasing, got {q}")
        object.__setattr__(self, "q_le", q)

    @classmethod
    def empty(cls, m: int) -> "QueueState":
        return cls((0,) * m)

    @property
    def m(self) -> int:
        return len(self.q_le)

    @property
    def total(self) -> int:
        return self.q_le[-1] if self.q_le else 0

    def is_empty(self) -> bool:
        return self.total == 0

    def by_class(self) -> tuple:
        """Number of waiting customers of each exact class."""
        prev, out = 0, []
        for c in self.q_le:
            out.append(c - prev)
            prev = c
        return tuple(out)


def _is_service(s: ClassValue) -> bool:
    return s == 1


def _step(q: list, a: ClassValue, served: bool, m: int) -> ClassValue:
    """Advance ``q`` in place by one time slot and return the departure."""
    if served:
        d = m + 1
        for k in range(m):
            if q[k] > 0 or a <= k + 1:
                d = k + 1
                break
    else:
        d = HOLE
    down = 1 if served else 0
    for k in range(m):
        v = q[k] + (1 if a <= k + 1 else 0) - down
        q[k] = v if v > 0 else 0
    return d


def step_queue(state: QueueState, a_j: ClassValue, s_j) -> tuple[QueueState, ClassValue]:
    """One slot of the priority queue: returns the new state and the departure.

    ``s_j`` may be a bool or a binary site value (1 for a service).
    """
    m = state.m
    if a_j != HOLE and not 1 <= a_j <= m:
        raise ValueError(f"arrival class {a_j!r} outside 1..{m}")
    q = list(state.q_le)
    d = _step(q, a_j, bool(_is_service(s_j)), m)
    return QueueState(tuple(q)), d


def _check_window_pair(a: WindowConfig, s: WindowConfig) -> None:
    if a.lo != s.lo or len(a) != len(s):
        raise ShapeError(
            f"arrival window [{a.lo}, {a.hi}] and service window [{s.lo}, {s.hi}] differ"
        )


def _check_init(init: QueueState, m: int) -> None:
    if init.m != m:
        raise ShapeError(f"initial queue state has {init.m} levels, arrivals have {m} classes")


def queue_lengths_window(
    a: WindowConfig, s: WindowConfig, init: QueueState
) -> list[QueueState]:
    """Queue state just after each site of the window, starting from ``init``."""
    _check_window_pair(a, s)
    m = a.n_classes
    _check_init(init, m)
    q = list(init.q_le)
    out = []
    for aj, sj in zip(a.sites, s.sites):
        _step(q, aj, _is_service(sj), m)
        out.append(QueueState(tuple(q)))
    return out


def departure_window(
    a: WindowConfig, s: WindowConfig, init: QueueState
) -> tuple[WindowConfig, QueueState]:
    """Run the queue across the window; return departures and the final state."""
    _check_window_pair(a, s)
    m = a.n_classes
    _check_init(init, m)
    q = list(init.q_le)
    d = [_step(q, aj, _is_service(sj), m) for aj, sj in zip(a.sites, s.sites)]
    return WindowConfig(tuple(d), m + 1, a.lo), QueueState(tuple(q))


def _check_ring_pair(a: RingConfig, s: RingConfig) -> None:
    if len(a) != len(s):
        raise ShapeError(f"arrival ring has {len(a)} sites, service ring has {len(s)}")
    n_arr = sum(1 for v in a.sites if v != HOLE)
    n_srv = sum(1 for v in s.sites if _is_service(v))
    if n_arr > n_srv:
        raise InfeasibleError(f"{n_arr} arrivals exceed {n_srv} services on the ring")


def _ring_lengths(a: Sequence[ClassValue], s: Sequence[ClassValue], m: int) -> list[list[int]]:
    # Two laps from an empty queue: every cyclic interval ending at j is seen
    # in the second lap, and longer stretches only add a nonpositive full turn.
    N = len(a)
    q = [0] * m
    out = [None] * N
    for lap in range(2):
        for j in range(N):
            _step(q, a[j], _is_service(s[j]), m)
            if lap:
                out[j] = list(q)
    return out


def queue_lengths_ring(a: RingConfig, s: RingConfig) -> list[QueueState]:
    """Stationary queue state just after each ring site.

    Component ``k`` at site ``j`` is the largest excess of class-``<=k`` arrivals
    over services on any cyclic interval ending at ``j`` (or zero).
    """
    _check_ring_pair(a, s)
    return [QueueState(tuple(q)) for q in _ring_lengths(a.sites, s.sites, a.n_classes)]


def departure_ring_recurrence(a: RingConfig, s: RingConfig) -> RingConfig:
    """Departure process on a ring via the queue-length recurrence."""
    _check_ring_pair(a, s)
    m = a.n_classes
    lengths = _ring_lengths(a.sites, s.sites, m)
    N = len(a)
    d = []
    for j in range(N):
        q = list(lengths[j - 1])
        d.append(_step(q, a.sites[j], _is_service(s.sites[j]), m))
    return RingConfig(tuple(d), m + 1)


def collapse_ring(
    arrivals: Iterable[int],
    services: Iterable[int],
    n_sites: int,
    order: Optional[Sequence[int]] = None,
) -> set:
    """Move each arrival rightward (cyclically) to the first unused service site.

    Returns the set of service sites that end up used.  The result does not
    depend on ``order``, the sequence in which arrivals are processed.
    """
    A = set(a % n_sites for a in arrivals)
    S = set(j % n_sites for j in services)
    if len(A) > len(S):
        raise InfeasibleError(f"{len(A)} arrivals exceed {len(S)} services")
    seq = sorted(A) if order is None else list(order)
    if sorted(seq) != sorted(A):
        raise ValueError("order must be a permutation of the arrival sites")
    D: set = set()
    for i in seq:
        j = i
        while j not in S or j in D:
            j = (j + 1) % n_sites
        D.add(j)
    return D


def departure_ring(a: RingConfig, s: RingConfig) -> RingConfig:
    """Departure process on a ring by iterated collapse, one class at a time."""
    _check_ring_pair(a, s)
    m, N = a.n_classes, len(a)
    free = {j for j, v in enumerate(s.sites) if _is_service(v)}
    d = [HOLE] * N
    for r in range(1, m + 1):
        arrivals = [j for j, v in enumerate(a.sites) if v == r]
        if not arrivals:
            continue
        for j in collapse_ring(arrivals, free, N):
            d[j] = r
        free = {j for j in free if d[j] == HOLE}
    for j in free:
        d[j] = m + 1
    return RingConfig(tuple(d), m + 1)


def service_process(d: Config) -> Config:
    """The only service process compatible with departures ``d``."""
    return _retag(d, tuple(HOLE if v == HOLE else 1 for v in d.sites), 1)


def strip_unused_services(d: Config) -> Config:
    """Arrival process in which every departing customer arrived just in time.

    Unused services (the top class of ``d``) and holes become holes.
    """
    m = d.n_classes - 1
    if m < 0:
        raise ValueError("departure process needs at least one class")
    return _retag(d, tuple(v if v <= m else HOLE for v in d.sites), m)


def _retag(d: Config, sites: tuple, n_classes: int) -> Config:
    if isinstance(d, RingConfig):
        return RingConfig(sites, n_classes)
    return WindowConfig(sites, n_classes, d.lo)


def queue_length_ratio(arrival_rate: float, service_rate: float) -> float:
    """Geometric ratio of the stationary single-class queue length.

    Detailed balance for the birth-death chain with up-probability
    ``lam (1 - mu)`` and down-probability ``(1 - lam) mu``.
    """
    lam, mu = arrival_rate, service_rate
    if not 0 <= lam < mu <= 1:
        raise ValueError(f"need 0 <= arrival < service <= 1, got {lam}, {mu}")
    if mu == 1:
        return 0.0
    return lam * (1 - mu) / ((1 - lam) * mu)


def sample_queue_length(
    arrival_rate: float, service_rate: float, rng: np.random.Generator, size=None
):
    """Draw from the stationary law ``P(Q = k) = (1 - r) r^k``."""
    r = queue_length_ratio(arrival_rate, service_rate)
    return rng.geometric(1.0 - r, size=size) - 1
