"""Exhaustive and randomized invariant suites.

Each suite returns a :class:`SuiteResult` counting the cases examined and the
failures found; the first few failing cases are kept for diagnosis.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Optional

from .core import HOLE, RingConfig, to_codes
from .exact import is_minimal_state, stationary_weights, verify_balance, verify_minimal_weights
from .multiline import (
    MultiLineConfig,
    _forward,
    _reverse,
    commutation_check,
)
from .queueing import (
    collapse_ring,
    departure_ring,
    departure_ring_recurrence,
    service_process,
    strip_unused_services,
)
from .simulate import make_rng

MAX_EXAMPLES = 5


@dataclass
class SuiteResult:
    suite: str
    cases: int = 0
    failures: int = 0
    examples: list = field(default_factory=list)
    seconds: float = 0.0
    notes: str = ""

    @property
    def passed(self) -> bool:
        return self.failures == 0 and self.cases > 0

    def record(self, ok: bool, case=None) -> None:
        self.cases += 1
        if not ok:
            self.failures += 1
            if len(self.examples) < MAX_EXAMPLES:
                self.examples.append(case)

    def to_json(self) -> dict:
        return {
            "suite": self.suite,
            "pass": self.passed,
            "cases": self.cases,
            "failures": self.failures,
            "examples": [repr(e) for e in self.examples],
            "seconds": round(self.seconds, 3),
            "notes": self.notes,
        }


def _timed(fn: Callable[..., SuiteResult]):
    def wrapper(*args, **kwargs) -> SuiteResult:
        t0 = time.perf_counter()
        res = fn(*args, **kwargs)
        res.seconds = time.perf_counter() - t0
        return res

    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


# -- enumeration helpers ---------------------------------------------------

def binary_lines(N: int) -> list:
    return list(itertools.product((1, HOLE), repeat=N))


def all_multilines(N: int, n: int) -> Iterator[tuple]:
    return itertools.product(binary_lines(N), repeat=n)


def _random_multiline(N: int, n: int, rng) -> tuple:
    bits = rng.random((n, N)) < 0.5
    return tuple(tuple(1 if b else HOLE for b in row) for row in bits)


def count_vectors(N: int, n: int) -> Iterator[tuple]:
    """All ``(p_1, ..., p_n)`` with nonnegative entries and sum at most ``N``."""
    for p in itertools.product(range(N + 1), repeat=n):
        if sum(p) <= N:
            yield p


def class_words(N: int, m: int) -> Iterator[tuple]:
    """All ring words over ``{1..m, HOLE}``."""
    return itertools.product((*range(1, m + 1), HOLE), repeat=N)


def _nested(lines: tuple) -> bool:
    counts = [sum(1 for v in line if v == 1) for line in lines]
    return all(a <= b for a, b in zip(counts, counts[1:]))


# -- suites ----------------------------------------------------------------

@_timed
def verify_bijection(
    N: int, n: int, exhaustive: bool = True, trials: int = 10000, seed=0
) -> SuiteResult:
    """The reverse map undoes the forward map on every ``(state, site)`` pair."""
    res = SuiteResult("bijection")
    if exhaustive:
        states: Iterable = all_multilines(N, n)
    else:
        rng = make_rng(seed)
        states = (_random_multiline(N, n, rng) for _ in range(trials))
    for lines in states:
        for i in range(N):
            y, b0 = _forward(lines, N, i, True)
            back, c = _reverse(y, N, b0, True)
            res.record(back == lines and c == i, (lines, i))
    res.notes = f"N={N}, n={n}, {'exhaustive' if exhaustive else 'random'}"
    return res


@_timed
def verify_commutation(
    N: int, n: int, exhaustive: bool = True, trials: int = 10000, seed=0
) -> SuiteResult:
    """Class assignment intertwines multiline bells with TASEP bells on every line.

    Only states whose particle counts do not decrease down the lines are
    class-assignable; the others are skipped.
    """
    res = SuiteResult("commutation")
    if exhaustive:
        states: Iterable = all_multilines(N, n)
    else:
        rng = make_rng(seed)
        states = (_random_multiline(N, n, rng) for _ in range(trials))
    for lines in states:
        if not _nested(lines):
            continue
        x = MultiLineConfig(lines)
        for i in range(N):
            res.record(commutation_check(x, i), (lines, i))
    res.notes = f"N={N}, n={n}, {'exhaustive' if exhaustive else 'random'}"
    return res


def _count_cases(N: int, n: int, exhaustive: bool, trials: int, seed) -> list:
    cases = list(count_vectors(N, n))
    if not exhaustive and len(cases) > trials:
        rng = make_rng(seed)
        picks = rng.choice(len(cases), size=trials, replace=False)
        cases = [cases[k] for k in sorted(picks)]
    return cases


@_timed
def verify_balance_suite(
    N: int, n: int, exhaustive: bool = True, trials: int = 20, seed=0
) -> SuiteResult:
    """Global balance of the pushforward weights for every count vector."""
    res = SuiteResult("balance")
    for p in _count_cases(N, n, exhaustive, trials, seed):
        res.record(verify_balance(stationary_weights(N, n, p)), p)
    res.notes = f"N={N}, n={n}"
    return res


@_timed
def verify_minimal_suite(
    N: int, n: int, exhaustive: bool = True, trials: int = 20, seed=0
) -> SuiteResult:
    """Weights sum to ``M``, are positive, and equal 1 exactly on minimal states."""
    res = SuiteResult("minimal")
    for p in _count_cases(N, n, exhaustive, trials, seed):
        res.record(verify_minimal_weights(stationary_weights(N, n, p)), p)
    res.notes = f"N={N}, n={n}"
    return res


def _feasible(a: tuple, s: tuple) -> bool:
    return sum(1 for v in a if v != HOLE) <= sum(1 for v in s if v == 1)


def check_collapse_vs_recurrence(N: int, m: int) -> SuiteResult:
    res = SuiteResult("collapse_vs_recurrence")
    services = binary_lines(N)
    for a in class_words(N, m):
        A = RingConfig(a, m)
        for s in services:
            if not _feasible(a, s):
                continue
            S = RingConfig(s, 1)
            res.record(departure_ring(A, S) == departure_ring_recurrence(A, S), (a, s))
    return res


def check_collapse_order(N: int, trials: int, seed) -> SuiteResult:
    """Collapse outcome does not depend on the order arrivals are processed."""
    res = SuiteResult("collapse_order")
    rng = make_rng(seed)
    for _ in range(trials):
        A = [j for j in range(N) if rng.random() < 0.4]
        S = [j for j in range(N) if rng.random() < 0.7]
        if len(A) > len(S):
            continue
        base = collapse_ring(A, S, N)
        order = [A[k] for k in rng.permutation(len(A))]
        res.record(collapse_ring(A, S, N, order) == base, (A, S, order))
    return res


def check_strip_identity(N: int, m: int) -> SuiteResult:
    """Departures are recovered from their own stripped arrivals and services."""
    res = SuiteResult("strip_identity")
    for d in class_words(N, m + 1):
        D = RingConfig(d, m + 1)
        res.record(departure_ring(strip_unused_services(D), service_process(D)) == D, d)
    return res


def check_minimal_uniqueness(N: int, m: int) -> SuiteResult:
    """A minimal departure state has exactly one arrival/service preimage."""
    res = SuiteResult("minimal_uniqueness")
    arrivals = list(class_words(N, m))
    for d in class_words(N, m + 1):
        D = RingConfig(d, m + 1)
        if not is_minimal_state(D):
            continue
        # departures sit exactly at service times, so services are forced
        S = service_process(D)
        hits = [a for a in arrivals if _feasible(a, S.sites)
                and departure_ring(RingConfig(a, m), S) == D]
        res.record(hits == [strip_unused_services(D).sites], (d, hits))
    return res


@_timed
def verify_queues(
    N: int, n: int, exhaustive: bool = True, trials: int = 2000, seed=0
) -> SuiteResult:
    """Ring queue identities for ``N`` sites and every class count ``m <= n``."""
    res = SuiteResult("queues")
    parts = []
    for m in range(1, n + 1):
        parts += [check_collapse_vs_recurrence(N, m), check_strip_identity(N, m),
                  check_minimal_uniqueness(N, m)]
    parts.append(check_collapse_order(N, trials, seed))
    for part in parts:
        res.cases += part.cases
        res.failures += part.failures
        res.examples += [(part.suite, e) for e in part.examples][: MAX_EXAMPLES]
    res.notes = "; ".join(f"{p.suite}: {p.cases - p.failures}/{p.cases}" for p in parts)
    return res


SUITES = {
    "bijection": verify_bijection,
    "balance": verify_balance_suite,
    "minimal": verify_minimal_suite,
    "commutation": verify_commutation,
    "queues": verify_queues,
}


def run_suite(name: str, N: int, n: int, exhaustive: bool = True,
              trials: Optional[int] = None, seed=0) -> SuiteResult:
    try:
        fn = SUITES[name]
    except KeyError:
        raise ValueError(f"unknown suite {name!r}; choose from {sorted(SUITES)}") from None
    kwargs = {"exhaustive": exhaustive, "seed": seed}
    if trials is not None:
        kwargs["trials"] = trials
    return fn(N, n, **kwargs)


def format_word(sites) -> str:
    return "".join(str(c) for c in to_codes(sites))
