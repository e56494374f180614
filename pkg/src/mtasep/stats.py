"""Statistical and pathwise checks of queueing-representation properties.

Every check returns a :class:`TestReport`.  Deterministic checks (queue
emptiness at renewal strings, coupling dominance) fail on a single violation;
statistical ones use fixed bands: ``SIGMA_BAND`` standard errors for moment
checks and ``P_MIN`` for chi-square p-values.  Runs that cannot gather enough
data are reported as inconclusive, which is neither a pass nor a fail.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import stats as sps

from .queueing import queue_length_ratio, sample_queue_length
from .simulate import (
    _bernoulli_lines,
    check_rates,
    default_burn_in,
    make_rng,
    sample_window_trace,
    tandem_batch,
)

SIGMA_BAND = 4.0
P_MIN = 1e-3
MIN_CELL = 20

PASS, FAIL, INCONCLUSIVE = "pass", "fail", "inconclusive"


@dataclass
class TestReport:
    __test__ = False  # not a pytest class

    name: str
    statistic: float
    threshold: float
    passed: bool
    samples: int
    notes: str = ""
    status: str = ""
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        self.passed = bool(self.passed)
        if not self.status:
            self.status = PASS if self.passed else FAIL

    @property
    def inconclusive(self) -> bool:
        return self.status == INCONCLUSIVE

    def to_json(self) -> dict:
        out = {
            "name": self.name,
            "statistic": _jsonable(self.statistic),
            "threshold": self.threshold,
            "pass": self.passed,
            "samples": self.samples,
            "notes": self.notes,
            "status": self.status,
        }
        if self.details:
            out["details"] = {k: _jsonable(v) for k, v in self.details.items()}
        return out


def _jsonable(v):
    if isinstance(v, (np.bool_, np.floating, np.integer)):
        return v.item()
    if isinstance(v, float) and not math.isfinite(v):
        return None
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, np.ndarray):
        return [_jsonable(x) for x in v.tolist()]
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    return v


def _inconclusive(name: str, samples: int, notes: str, **details) -> TestReport:
    return TestReport(name, float("nan"), float("nan"), False, samples, notes, INCONCLUSIVE, details)


# -- contingency helpers ---------------------------------------------------

def _pool_rare(keys: np.ndarray, min_count: int) -> np.ndarray:
    """Relabel categories seen fewer than ``min_count`` times as one bucket."""
    values, inverse, counts = np.unique(keys, return_inverse=True, return_counts=True)
    rare = counts < min_count
    if not rare.any():
        return inverse
    labels = np.where(rare, -1, np.arange(len(values)))
    return labels[inverse]


def independence_pvalue(left: np.ndarray, right: np.ndarray, min_count: int = MIN_CELL):
    """Chi-square test of independence between two integer-coded samples.

    Categories rarer than ``min_count`` are pooled.  Returns ``(p, table)`` or
    ``(None, table)`` when either side collapses to a single category.
    """
    lk = _pool_rare(np.asarray(left), min_count)
    rk = _pool_rare(np.asarray(right), min_count)
    _, li = np.unique(lk, return_inverse=True)
    _, ri = np.unique(rk, return_inverse=True)
    table = np.zeros((li.max(initial=-1) + 1, ri.max(initial=-1) + 1), dtype=np.int64)
    np.add.at(table, (li, ri), 1)
    if table.shape[0] < 2 or table.shape[1] < 2:
        return None, table
    _, p, _, _ = sps.chi2_contingency(table, correction=False)
    return float(p), table


def _encode_rows(block: np.ndarray, base: int) -> np.ndarray:
    """Integer key for each row of small codes."""
    key = np.zeros(block.shape[0], dtype=np.int64)
    for c in range(block.shape[1]):
        key = key * base + block[:, c]
    return key


# -- renewal strings -------------------------------------------------------

def is_renewal_string(w: Sequence[int], n: int) -> bool:
    """Does ``w`` start with ``n``, end with 2, and close every level in between?

    For each ``m`` in ``3..n-1`` some position before the end must hold ``m``
    with nothing larger than ``m`` after it.
    """
    w = list(w)
    if not w or any(not isinstance(v, (int, np.integer)) or not 1 <= v <= n for v in w):
        return False
    r = len(w) - 1
    if w[0] != n or w[r] != 2:
        return False
    for m in range(3, n):
        ok = False
        for j in range(r):
            if w[j] == m and all(v <= m for v in w[j + 1:]):
                ok = True
                break
        if not ok:
            return False
    return True


def _occurrences(codes: np.ndarray, w: Sequence[int]) -> np.ndarray:
    r = len(w) - 1
    if codes.shape[-1] <= r:
        return np.zeros(0, dtype=np.int64)
    win = np.lib.stride_tricks.sliding_window_view(codes, r + 1, axis=-1)
    return np.flatnonzero((win == np.asarray(w, dtype=codes.dtype)).all(axis=-1))


def renewal_emptiness_check(
    lambdas: Sequence[float],
    K: int,
    seed,
    w: Sequence[int],
    burn_in: Optional[int] = None,
) -> TestReport:
    """All tandem queues must be empty right after each occurrence of ``w``.

    One window ``[-K, K]`` is sampled with the full queue trace; any nonempty
    queue after the last site of an occurrence is a violation.
    """
    name = "renewal_emptiness"
    n = len(lambdas)
    if not is_renewal_string(w, n):
        raise ValueError(f"{tuple(w)} is not a renewal string for n={n}")
    if burn_in is None:
        burn_in = default_burn_in(lambdas)
    tr = sample_window_trace(K, lambdas, burn_in, seed)
    codes = tr.bottom()[burn_in:]
    totals = tr.queue_totals()[:, burn_in:]
    starts = _occurrences(codes, w)
    ends = starts + len(w) - 1
    if len(starts) == 0:
        return _inconclusive(name, 0, f"string {tuple(w)} never occurred in {len(codes)} sites")
    bad = int((totals[:, ends] != 0).any(axis=0).sum())
    notes = f"string {tuple(w)}, {len(starts)} occurrences, burn-in {burn_in}"
    return TestReport(name, bad, 0, bad == 0, len(starts), notes,
                      details={"sites": len(codes)})


def factorization_test(
    lambdas: Sequence[float],
    w: Sequence[int],
    window_sites_left: int = 2,
    window_sites_right: int = 2,
    samples: int = 20000,
    seed=0,
    burn_in: Optional[int] = None,
    gap: int = 50,
    max_sites: int = 10**8,
    batch: int = 1000,
    row_length: int = 5000,
    require_renewal: bool = True,
) -> TestReport:
    """Chi-square independence of the cylinders flanking occurrences of ``w``.

    Occurrences are taken left to right in long sampled windows, each one at
    least ``gap`` sites after the previous right cylinder.  Collection stops
    after ``samples`` occurrences or ``max_sites`` sampled sites.

    With ``require_renewal=False`` the string need not be a renewal string and
    the report carries no verdict (control runs).
    """
    n = len(lambdas)
    renewal = is_renewal_string(w, n)
    if require_renewal and not renewal:
        raise ValueError(f"{tuple(w)} is not a renewal string for n={n}")
    check_rates(lambdas)
    if burn_in is None:
        burn_in = default_burn_in(lambdas)
    rng = make_rng(seed)
    r = len(w) - 1
    lw, rw = window_sites_left, window_sites_right
    lefts, rights = [], []
    sites = 0
    while len(lefts) < samples and sites < max_sites:
        lines = _bernoulli_lines(lambdas, (batch, burn_in + row_length), rng)
        codes = tandem_batch(lines)[:, burn_in:]
        sites += codes.size
        win = np.lib.stride_tricks.sliding_window_view(codes, r + 1, axis=1)
        hits = (win == np.asarray(w, dtype=codes.dtype)).all(axis=2)
        for row in range(batch):
            next_ok = lw
            for t in np.flatnonzero(hits[row]).tolist():
                if t < next_ok or t + r + rw >= row_length:
                    continue
                lefts.append(codes[row, t - lw:t])
                rights.append(codes[row, t + r + 1:t + r + 1 + rw])
                next_ok = t + r + rw + gap + lw
    name = "factorization"
    lefts, rights = lefts[:samples], rights[:samples]
    count = len(lefts)
    if count < 10 * MIN_CELL:
        return _inconclusive(name, count, f"only {count} occurrences of {tuple(w)} in {sites} sites")
    base = n + 1
    p, table = independence_pvalue(_encode_rows(np.array(lefts), base),
                                   _encode_rows(np.array(rights), base))
    if p is None:
        return _inconclusive(name, count, "a cylinder collapsed to one category")
    notes = f"string {tuple(w)}, cylinders {lw}|{rw}, table {table.shape}, {sites} sites"
    if not renewal:
        return TestReport(name, p, P_MIN, False, count, notes + ", control run",
                          INCONCLUSIVE, {"control": True})
    return TestReport(name, p, P_MIN, p > P_MIN, count, notes)


# -- hole / first-class independence ---------------------------------------

def hole_independence_test(
    lambdas: Sequence[float],
    K: int = 5,
    samples: int = 100000,
    seed=0,
    burn_in: Optional[int] = None,
) -> TestReport:
    """Holes to the right vs the left half-line, and class 1 to the left vs the right.

    Both tests use ``samples`` independent windows ``[-K, K]``.  The hole side
    compares the hole pattern on ``1..K`` with ``(u(-1), u(0))``; the mirror
    side compares the class-1 pattern on ``-K..-1`` with ``(u(0), u(1))``.
    """
    n = len(lambdas)
    check_rates(lambdas)
    if burn_in is None:
        burn_in = 4 * default_burn_in(lambdas)
    rng = make_rng(seed)
    lines = _bernoulli_lines(lambdas, (samples, burn_in + 2 * K + 1), rng)
    codes = tandem_batch(lines)[:, burn_in:]
    center = K
    base = n + 1
    holes = _encode_rows((codes[:, center + 1:] == 0).astype(np.int64), 2)
    left_cyl = _encode_rows(codes[:, center - 1:center + 1].astype(np.int64), base)
    p_hole, t1 = independence_pvalue(holes, left_cyl)
    firsts = _encode_rows((codes[:, :center] == 1).astype(np.int64), 2)
    right_cyl = _encode_rows(codes[:, center:center + 2].astype(np.int64), base)
    p_first, t2 = independence_pvalue(firsts, right_cyl)
    name = "hole_independence"
    if p_hole is None or p_first is None:
        return _inconclusive(name, samples, "degenerate contingency table")
    stat = min(p_hole, p_first)
    notes = f"p(holes right)={p_hole:.4g}, p(class 1 left)={p_first:.4g}, burn-in {burn_in}"
    return TestReport(name, stat, P_MIN, stat > P_MIN, samples, notes,
                      details={"p_holes": p_hole, "p_first_class": p_first})


# -- single-class queue ----------------------------------------------------

def lindley(q0: int, arrivals: np.ndarray, services: np.ndarray) -> np.ndarray:
    """Queue lengths after each slot of ``Q_j = (Q_{j-1} + a_j - s_j)^+``."""
    walk = np.cumsum(arrivals.astype(np.int64) - services.astype(np.int64))
    floor = np.minimum.accumulate(walk)
    return walk + np.maximum(q0, -floor)


def _departures(q0: int, q: np.ndarray, a: np.ndarray, s: np.ndarray) -> np.ndarray:
    prev = np.concatenate(([q0], q[:-1]))
    return s & ((prev > 0) | a)


def burke_test(
    lambda1: float, mu: float, steps: int = 10**6, seed=0, burn_in: int = 0
) -> TestReport:
    """Departures of a stationary single-class queue form a Bernoulli(lambda1) stream.

    The queue starts from its exact stationary law (plus ``burn_in`` extra
    slots).  Checks the departure rate, lag-1..5 autocorrelations and the
    inter-departure gap histogram against Geometric(lambda1).
    """
    name = "burke"
    if lambda1 <= 0:
        return _inconclusive(name, 0, "no arrivals: departure stream is empty")
    if not lambda1 < mu < 1:
        raise ValueError(f"need 0 < lambda1 < mu < 1, got {lambda1}, {mu}")
    rng = make_rng(seed)
    q0 = int(sample_queue_length(lambda1, mu, rng))
    total = steps + burn_in
    a = rng.random(total) < lambda1
    s = rng.random(total) < mu
    q = lindley(q0, a, s)
    d = _departures(q0, q, a, s)[burn_in:]
    if d.sum() < 2:
        return _inconclusive(name, steps, "fewer than two departures")

    rate = d.mean()
    sigma = math.sqrt(lambda1 * (1 - lambda1) / steps)
    rate_ok = abs(rate - lambda1) <= SIGMA_BAND * sigma

    x = d.astype(float) - rate
    var = (x * x).mean()
    acf = [float((x[:-k] * x[k:]).mean() / var) for k in range(1, 6)]
    acf_band = SIGMA_BAND / math.sqrt(steps)
    acf_ok = all(abs(c) <= acf_band for c in acf)

    gaps = np.diff(np.flatnonzero(d))
    p_gap = _geometric_gof(gaps, lambda1)
    gap_ok = p_gap > P_MIN

    passed = rate_ok and acf_ok and gap_ok
    notes = (f"rate {rate:.5f} vs {lambda1} (band {SIGMA_BAND * sigma:.5f}); "
             f"max |acf| {max(abs(c) for c in acf):.5f} (band {acf_band:.5f}); "
             f"gap chi-square p {p_gap:.4g}; stationary start, burn-in {burn_in}")
    return TestReport(name, abs(rate - lambda1), SIGMA_BAND * sigma, passed, steps, notes,
                      details={"rate": rate, "acf": acf, "gap_p": p_gap,
                               "rate_ok": rate_ok, "acf_ok": acf_ok, "gap_ok": gap_ok})


def _geometric_gof(gaps: np.ndarray, p: float, min_expected: float = 5.0) -> float:
    n = len(gaps)
    probs = []
    g = 1
    while True:
        pg = p * (1 - p) ** (g - 1)
        if n * pg < min_expected or n * (1 - p) ** g < min_expected:
            break
        probs.append(pg)
        g += 1
    top = len(probs)  # gaps > top are pooled
    obs = np.bincount(np.minimum(gaps, top + 1), minlength=top + 2)[1:]
    exp = np.array(probs + [(1 - p) ** top]) * n
    return float(sps.chisquare(obs, exp).pvalue)


def queue_length_fit(
    lambda1: float, lambda2: float, steps: int = 10**6, seed=0, burn_in: int = 1000
) -> TestReport:
    """Empirical ratios ``P(Q = k + 1) / P(Q = k)``, k = 0..3, of the single-class queue.

    Two candidate geometric ratios are recorded: the detailed-balance value of
    the birth-death chain (``ratio_detailed_balance``) and ``lambda1 / mu``
    (``ratio_arrival_over_service``).  The verdict is against the first.
    """
    name = "queue_length"
    mu = lambda1 + lambda2
    if lambda1 <= 0:
        return _inconclusive(name, 0, "no arrivals: queue is identically empty")
    if not (lambda2 > 0 and mu < 1):
        raise ValueError(f"need lambda1, lambda2 > 0 and lambda1 + lambda2 < 1")
    rng = make_rng(seed)
    total = steps + burn_in
    a = rng.random(total) < lambda1
    s = rng.random(total) < mu
    q = lindley(0, a, s)[burn_in:]
    hist = np.bincount(q, minlength=5)
    ratios = []
    for k in range(4):
        if hist[k] == 0:
            return _inconclusive(name, steps, f"no visits to Q={k}")
        ratios.append(hist[k + 1] / hist[k])
    r_db = queue_length_ratio(lambda1, mu)
    r_p = lambda1 / mu
    dev_db = max(abs(x - r_db) for x in ratios)
    dev_p = max(abs(x - r_p) for x in ratios)
    closer = "detailed_balance" if dev_db < dev_p else "arrival_over_service"
    notes = (f"empirical ratios {[round(float(x), 4) for x in ratios]}; "
             f"detailed-balance ratio {r_db:.4f}; lambda1/mu {r_p:.4f}; closer: {closer}")
    return TestReport(name, dev_db, 0.02, dev_db <= 0.02, steps, notes,
                      details={"ratios": [float(x) for x in ratios],
                               "ratio_detailed_balance": r_db,
                               "ratio_arrival_over_service": r_p,
                               "closer": closer})


# -- second-class coupling -------------------------------------------------

HOLE_CODE = 3  # codes 1 < 2 < 3 mirror 1 < 2 < HOLE


def couple_paths(lambda1: float, mu: float, K: int, paths: int, rng):
    """Run the stationary queue and the queue started empty on shared inputs.

    Returns ``(Q, Qp, u, up)``: queue lengths ``(paths, K + 1)`` including
    time 0, and site codes ``(paths, K)`` for sites ``1..K``.
    """
    a = rng.random((paths, K)) < lambda1
    s = rng.random((paths, K)) < mu
    q = np.empty((paths, K + 1), dtype=np.int64)
    qp = np.zeros((paths, K + 1), dtype=np.int64)
    q[:, 0] = sample_queue_length(lambda1, mu, rng, size=paths)
    u = np.empty((paths, K), dtype=np.int8)
    up = np.empty((paths, K), dtype=np.int8)
    for j in range(K):
        aj, sj = a[:, j], s[:, j]
        u[:, j] = np.where(sj, np.where((q[:, j] > 0) | aj, 1, 2), HOLE_CODE)
        up[:, j] = np.where(sj, np.where((qp[:, j] > 0) | aj, 1, 2), HOLE_CODE)
        step = aj.astype(np.int64) - sj
        q[:, j + 1] = np.maximum(q[:, j] + step, 0)
        qp[:, j + 1] = np.maximum(qp[:, j] + step, 0)
    return q, qp, u, up


def _coupling_violations(q, qp, u, up, dominated) -> dict:
    K = u.shape[1]
    hit = q == 0
    T = np.where(hit.any(axis=1), hit.argmax(axis=1), K + 1)  # first j >= 0 with Q_j = 0
    j_idx = np.arange(K + 1)
    after_T = j_idx[None, :] >= T[:, None]
    sites = np.arange(1, K + 1)
    strictly_after = sites[None, :] > T[:, None]
    return {
        "queue_order": int((q < qp).sum()),
        "site_order": int(dominated(u, up).sum()),
        "queue_coalescence": int((after_T & (q != qp)).sum()),
        "site_coalescence": int((strictly_after & (u != up)).sum()),
    }


def coupling_experiment(
    lambda1: float, lambda2: float, K: int = 1000, paths: int = 10000, seed=0
) -> TestReport:
    """Pathwise comparison of the stationary 2-type measure with the measure
    conditioned on a second-class particle at the origin.

    Right half: ``Q >= Q'`` and ``u <= u'`` on every path, ``Q = Q'`` from the
    first time ``T`` the stationary queue empties and ``u = u'`` strictly after
    ``T``.  Left half: the same construction run with the mirrored rates
    ``(1 - mu, lambda2)`` and read back through the order reversal, which must
    give ``u >= u'``.  The disagreement probability ``P(u(j) != u'(j))`` must
    fall off: negative log-linear slope and a smaller value at 50 than at 10.
    """
    mu = lambda1 + lambda2
    if not (lambda1 > 0 and lambda2 > 0 and mu < 1 and K >= 1):
        raise ValueError("need positive rates with lambda1 + lambda2 < 1 and K >= 1")
    rng = make_rng(seed)
    q, qp, u, up = couple_paths(lambda1, mu, K, paths, rng)
    right = _coupling_violations(q, qp, u, up, lambda x, y: x > y)

    # mirrored: holes <-> first class, second class fixed, sites reversed
    lq, lqp, lu, lup = couple_paths(1 - mu, 1 - lambda1, K, paths, rng)
    flip = np.array([0, HOLE_CODE, 2, 1], dtype=np.int8)
    left = _coupling_violations(lq, lqp, flip[lu], flip[lup], lambda x, y: x < y)

    disagree = (u != up).mean(axis=0)
    js = np.arange(1, K + 1)
    usable = disagree * paths >= 10
    if usable.sum() >= 2:
        slope = float(np.polyfit(js[usable], np.log(disagree[usable]), 1)[0])
    else:
        slope = float("nan")
    p10 = float(disagree[min(10, K) - 1])
    p50 = float(disagree[min(50, K) - 1])
    violations = sum(right.values()) + sum(left.values())
    decays = slope < 0 and p50 < p10
    notes = (f"violations right {right}, left {left}; log-linear slope {slope:.4g}; "
             f"P(disagree) at 10: {p10:.4g}, at 50: {p50:.4g}")
    return TestReport("coupling", violations, 0, violations == 0 and decays, paths, notes,
                      details={"right": right, "left": left, "slope": slope,
                               "p10": p10, "p50": p50,
                               "disagreement": disagree[: min(K, 100)].tolist()})


# -- line marginals of the multiline process -------------------------------

def _run_poisson_bells(state, N, lag, rng, step):
    k = rng.poisson(N * lag)
    for i in rng.integers(0, N, size=k).tolist():
        state = step(state, i)
    return state


def line_marginal_test(
    N: int, q: Sequence[int], line: int, lag: float = 0.5, samples: int = 20000, seed=0
) -> TestReport:
    """Two-time law of one multiline line vs a plain single-type TASEP.

    Both start uniform; the pair (line at 0, line at ``lag``) is histogrammed
    and compared with a chi-square homogeneity test.
    """
    from .multiline import _forward
    from .simulate import sample_multiline_uniform

    rng = make_rng(seed)
    m = line - 1

    def ml_step(lines, i):
        return _forward(lines, N, i, True)[0]

    def tasep_step(row, i):
        if row[i - 1] > row[i]:
            row = list(row)
            row[i - 1], row[i] = row[i], row[i - 1]
            return tuple(row)
        return row

    def key(a, b):
        return tuple(v == 1 for v in a) + tuple(v == 1 for v in b)

    multi, single = [], []
    for _ in range(samples):
        x = sample_multiline_uniform(N, q, rng).lines
        y = _run_poisson_bells(x, N, lag, rng, ml_step)
        multi.append(key(x[m], y[m]))
        z = sample_multiline_uniform(N, [q[m]], rng).lines[0]
        zt = _run_poisson_bells(z, N, lag, rng, tasep_step)
        single.append(key(z, zt))
    cats = sorted(set(multi) | set(single))
    index = {c: k for k, c in enumerate(cats)}
    table = np.zeros((2, len(cats)), dtype=np.int64)
    for c in multi:
        table[0, index[c]] += 1
    for c in single:
        table[1, index[c]] += 1
    table = table[:, table.sum(axis=0) > 0]
    name = "line_marginal"
    if table.shape[1] < 2:
        return _inconclusive(name, samples, "single category")
    _, p, _, _ = sps.chi2_contingency(table, correction=False)
    notes = f"N={N}, q={tuple(q)}, line {line}, lag {lag}, {table.shape[1]} categories"
    return TestReport(name, float(p), P_MIN, p > P_MIN, samples, notes)
