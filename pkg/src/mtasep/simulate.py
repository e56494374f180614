"""Continuous-time simulation and stationary samplers.

Random numbers come from numpy's Philox4x64 counter-based bit generator
(``numpy.random.Philox``) wrapped in ``numpy.random.Generator``; a run is a
pure function of its seed and parameters.

Bells ring at rate 1 per site, so the next event on ``N`` sites comes after an
Exponential(N) wait at a uniformly chosen site.  Occupation measures are
time-weighted.
"""

from __future__ import annotations

import json
import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from .core import (
    HOLE,
    Counts,
    InfeasibleError,
    RingConfig,
    WindowConfig,
    config_to_json,
)
from .multiline import MultiLineConfig, _assign_lines, _forward, multiline_to_json

CHUNK = 65536


def make_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.Philox(seed))


@dataclass
class Trace:
    seed: Optional[int]
    times: np.ndarray
    sites: np.ndarray
    snapshots: list = field(default_factory=list)
    final: object = None

    @property
    def n_events(self) -> int:
        return len(self.times)

    def to_jsonl(self) -> Iterable[str]:
        """One JSON record per event; snapshots follow the event they belong to."""
        snaps = {k: (t, cfg) for k, t, cfg in self.snapshots}
        for k, (t, i) in enumerate(zip(self.times.tolist(), self.sites.tolist())):
            yield json.dumps({"t": t, "site": i})
            if k in snaps:
                yield json.dumps({"t": t, "event": k, "snapshot": _encode(snaps[k][1])})


def _encode(state):
    if isinstance(state, MultiLineConfig):
        return multiline_to_json(state)
    return config_to_json(state)


@dataclass
class EmpiricalDistribution:
    """Time spent in each state."""

    counts: dict = field(default_factory=dict)
    total_time: float = 0.0

    def probabilities(self) -> dict:
        if self.total_time <= 0:
            return {}
        return {k: v / self.total_time for k, v in self.counts.items()}

    def merge(self, other: "EmpiricalDistribution") -> "EmpiricalDistribution":
        out = defaultdict(float, self.counts)
        for k, v in other.counts.items():
            out[k] += v
        return EmpiricalDistribution(dict(out), self.total_time + other.total_time)

    def map(self, f: Callable) -> "EmpiricalDistribution":
        """Push the occupation measure forward through ``f`` (cached per state)."""
        out: dict = defaultdict(float)
        for k, v in self.counts.items():
            out[f(k)] += v
        return EmpiricalDistribution(dict(out), self.total_time)


def _horizon(events: Optional[int], time: Optional[float]) -> tuple[float, float]:
    if (events is None) == (time is None):
        raise ValueError("give exactly one of events= or time=")
    if events is not None:
        if events < 0:
            raise ValueError("events must be >= 0")
        return float(events), math.inf
    if time < 0:
        raise ValueError("time must be >= 0")
    return math.inf, float(time)


def _run(state, step, key, N: int, events, time, seed, record_every, wrap):
    rng = make_rng(seed)
    max_events, t_end = _horizon(events, time)
    occupation: dict = defaultdict(float)
    times, sites, snapshots = [], [], []
    t = 0.0
    k = 0
    current = key(state)
    done = False
    while not done and k < max_events:
        n = int(min(CHUNK, max_events - k)) if max_events < math.inf else CHUNK
        waits = rng.exponential(1.0 / N, size=n).tolist()
        picks = rng.integers(0, N, size=n).tolist()
        for w, i in zip(waits, picks):
            if t + w > t_end:
                occupation[current] += t_end - t
                t = t_end
                done = True
                break
            occupation[current] += w
            t += w
            new = step(state, i)
            if new is not state:
                state = new
                current = key(state)
            times.append(t)
            sites.append(i)
            k += 1
            if record_every and k % record_every == 0:
                snapshots.append((len(times) - 1, t, wrap(state)))
    trace = Trace(
        seed if not isinstance(seed, np.random.Generator) else None,
        np.asarray(times, dtype=float),
        np.asarray(sites, dtype=np.int64),
        snapshots,
        wrap(state),
    )
    return trace, EmpiricalDistribution(dict(occupation), t)


def gillespie_tasep(
    u0: RingConfig,
    events: Optional[int] = None,
    time: Optional[float] = None,
    seed=0,
    record_every: Optional[int] = None,
) -> tuple[Trace, EmpiricalDistribution]:
    """Simulate the n-type TASEP on a ring.

    The empirical distribution is keyed by :class:`RingConfig`.
    """
    N, n = len(u0), u0.n_classes

    def step(state, i):
        left = state[i - 1]
        right = state[i]
        if left > right:
            state = list(state)
            state[i - 1], state[i] = right, left
            return tuple(state)
        return state

    def wrap(state):
        return RingConfig(state, n)

    trace, occ = _run(u0.sites, step, lambda s: s, N, events, time, seed, record_every, wrap)
    return trace, occ.map(wrap)


def gillespie_multiline(
    x0: MultiLineConfig,
    events: Optional[int] = None,
    time: Optional[float] = None,
    seed=0,
    record_every: Optional[int] = None,
) -> tuple[Trace, EmpiricalDistribution]:
    """Simulate the multiline process on a ring; bells ring on the bottom line."""
    if not x0.ring:
        raise ValueError("multiline simulation runs on rings")
    N = x0.n_sites

    def step(lines, i):
        new, _ = _forward(lines, N, i, True)
        return lines if new == lines else new

    def wrap(lines):
        return MultiLineConfig(lines)

    trace, occ = _run(x0.lines, step, lambda s: s, N, events, time, seed, record_every, wrap)
    return trace, occ.map(wrap)


# -- ring sampler ----------------------------------------------------------

def _prefix(p: Sequence[int]) -> list:
    out, total = [], 0
    for c in p:
        total += c
        out.append(total)
    return out


def sample_multiline_uniform(N: int, q: Sequence[int], rng) -> MultiLineConfig:
    """Independent uniform ``q_m``-subsets on each line."""
    rng = make_rng(rng)
    lines = []
    for qm in q:
        if not 0 <= qm <= N:
            raise InfeasibleError(f"cannot place {qm} particles on {N} sites")
        row = [HOLE] * N
        for j in rng.choice(N, size=qm, replace=False).tolist():
            row[j] = 1
        lines.append(tuple(row))
    return MultiLineConfig(tuple(lines))


def sample_stationary_ring(N: int, n: int, p, seed=0) -> RingConfig:
    """One exact draw from the stationary law with ``p_r`` particles of class r."""
    p = tuple(p.p if isinstance(p, Counts) else p)
    if len(p) != n:
        raise ValueError(f"expected {n} counts, got {len(p)}")
    if any(c < 0 for c in p) or sum(p) > N:
        raise InfeasibleError(f"counts {p} do not fit on {N} sites")
    x = sample_multiline_uniform(N, _prefix(p), seed)
    return RingConfig(_assign_lines(x.lines)[-1], n)


def sample_stationary_ring_many(N: int, n: int, p, samples: int, seed=0) -> list:
    rng = make_rng(seed)
    return [sample_stationary_ring(N, n, p, rng) for _ in range(samples)]


# -- window sampler --------------------------------------------------------

def check_rates(lambdas: Sequence[float]) -> None:
    if not lambdas:
        raise ValueError("need at least one rate")
    if any(not lam > 0 for lam in lambdas) or not sum(lambdas) < 1:
        raise ValueError(f"rates must be positive with sum < 1, got {tuple(lambdas)}")


def default_burn_in(lambdas: Sequence[float]) -> int:
    """Heuristic number of extra sites run before the observed window."""
    return math.ceil(50 / (1 - sum(lambdas)))


def _bernoulli_lines(lambdas: Sequence[float], shape, rng) -> np.ndarray:
    """Boolean array ``(n, *shape)``; line m has density ``lambda_1 + ... + lambda_m``."""
    dens = np.cumsum(lambdas)
    u = rng.random((len(lambdas), *shape))
    return u < dens.reshape((-1,) + (1,) * len(shape))


@dataclass
class WindowTrace:
    """All intermediate data of one window sample.

    ``lines`` are the Bernoulli service lines, ``classes[m - 1]`` the class
    codes of line ``m`` (0 = hole) and ``queues[m - 1]`` the array
    ``(L, m)`` of queue-``m`` states just after each site.
    """

    lo: int
    lines: np.ndarray
    classes: list
    queues: list

    @property
    def hi(self) -> int:
        return self.lo + self.lines.shape[1] - 1

    def bottom(self) -> np.ndarray:
        return self.classes[-1]

    def queue_totals(self) -> np.ndarray:
        """``(n - 1, L)`` array of total queue contents after each site."""
        if not self.queues:
            return np.zeros((0, self.lines.shape[1]), dtype=np.int64)
        return np.stack([q[:, -1] for q in self.queues])


def _queue_pass(a: list, s: list, m: int):
    # Scalar tandem step on integer codes (0 = hole); returns departures and states.
    L = len(a)
    q = [0] * m
    d = [0] * L
    states = np.zeros((L, m), dtype=np.int64)
    for j in range(L):
        aj = a[j]
        served = s[j]
        if served:
            dj = m + 1
            for k in range(m):
                if q[k] > 0 or (aj and aj <= k + 1):
                    dj = k + 1
                    break
            d[j] = dj
        for k in range(m):
            v = q[k] + (1 if aj and aj <= k + 1 else 0) - (1 if served else 0)
            q[k] = v if v > 0 else 0
        states[j] = q
    return d, states


def sample_window_trace(
    K: int, lambdas: Sequence[float], burn_in: Optional[int] = None, seed=0,
    right: Optional[int] = None,
) -> WindowTrace:
    """Sample lines on ``[-K - burn_in, right]`` and run the tandem queues from empty.

    ``right`` defaults to ``K``.
    """
    check_rates(lambdas)
    if burn_in is None:
        burn_in = default_burn_in(lambdas)
    if K < 0 or burn_in < 0:
        raise ValueError("K and burn_in must be >= 0")
    right = K if right is None else right
    rng = make_rng(seed)
    lo = -K - burn_in
    L = right - lo + 1
    lines = _bernoulli_lines(lambdas, (L,), rng)
    n = len(lambdas)
    current = lines[0].astype(np.int64).tolist()
    classes = [np.asarray(current, dtype=np.int8)]
    queues = []
    for m in range(1, n):
        d, states = _queue_pass(current, lines[m].tolist(), m)
        classes.append(np.asarray(d, dtype=np.int8))
        queues.append(states)
        current = d
    return WindowTrace(lo, lines, classes, queues)


def sample_stationary_window(
    K: int, lambdas: Sequence[float], burn_in: Optional[int] = None, seed=0
) -> WindowConfig:
    """Approximate stationary sample of the n-type TASEP on ``[-K, K]``."""
    if burn_in is None:
        burn_in = default_burn_in(lambdas)
    tr = sample_window_trace(K, lambdas, burn_in, seed)
    codes = tr.bottom()[burn_in:]
    return WindowConfig.from_codes(codes.tolist(), len(lambdas), -K)


def tandem_batch(lines: np.ndarray, record_totals: bool = False):
    """Vectorized tandem queues over a batch of independent windows.

    ``lines`` is boolean ``(n, B, L)``; all queues start empty.  Returns the
    bottom-line class codes ``(B, L)`` (0 = hole) and, if requested, the total
    contents ``(n - 1, B, L)`` of each queue after each site.
    """
    n, B, L = lines.shape
    current = lines[0].astype(np.int8)
    totals = np.zeros((n - 1, B, L), dtype=np.int32) if record_totals else None
    for m in range(1, n):
        srv = lines[m]
        out = np.zeros((B, L), dtype=np.int8)
        q = np.zeros((m, B), dtype=np.int64)
        levels = np.arange(1, m + 1).reshape(m, 1)
        for j in range(L):
            a = current[:, j]
            s = srv[:, j]
            arrived = (a != 0) & (a <= levels)
            ready = (q > 0) | arrived
            d = np.where(ready.any(axis=0), ready.argmax(axis=0) + 1, m + 1)
            out[:, j] = np.where(s, d, 0)
            q = np.maximum(q + arrived - s, 0)
            if record_totals:
                totals[m - 1, :, j] = q[-1]
        current = out
    return (current, totals) if record_totals else current


def sample_window_batch(
    lambdas: Sequence[float], n_sites: int, batch: int, burn_in: Optional[int] = None, seed=0
) -> np.ndarray:
    """``batch`` independent samples of ``n_sites`` consecutive sites, as codes."""
    check_rates(lambdas)
    if burn_in is None:
        burn_in = default_burn_in(lambdas)
    rng = make_rng(seed)
    lines = _bernoulli_lines(lambdas, (batch, burn_in + n_sites), rng)
    return tandem_batch(lines)[:, burn_in:]
