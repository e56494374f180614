"""The multiline process and its class-assignment map.

A multiline state is ``n`` binary lines (particle = 1, hole = HOLE).  A bell at
site ``i`` of the bottom line propagates upward: on reaching line ``m`` at a
particle it stays put, at a hole it moves one site right.  Every line then
applies a TASEP swap at its own bell site.  The reverse process rings on the
top line and propagates downward, moving left past holes.

:func:`forward_map` and :func:`reverse_map` are mutually inverse maps on
``(state, site)`` pairs, which is what makes the uniform law stationary.
:func:`assign_classes_ring` feeds line ``m`` as arrivals and line ``m + 1`` as
services through a chain of priority queues; its bottom line is a multi-type
TASEP configuration.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .core import (
    HOLE,
    BoundaryError,
    InfeasibleError,
    RingConfig,
    ShapeError,
    WindowConfig,
    swap_adjacent,
)
from .queueing import QueueState, departure_window


@dataclass(frozen=True)
class MultiLineConfig:
    """``n`` binary lines sharing one ring of ``N`` sites or one window.

    ``lines[m - 1]`` is line ``m``; line 1 is the top line.
    """

    lines: tuple
    ring: bool = True
    lo: int = 0

    def __post_init__(self):
        lines = tuple(tuple(HOLE if v == HOLE else 1 for v in line) for line in self.lines)
        if not lines:
            raise ValueError("need at least one line")
        width = len(lines[0])
        if any(len(line) != width for line in lines):
            raise ShapeError("all lines must have the same length")
        if self.ring and width == 0:
            raise ValueError("a ring needs at least one site")
        for line, raw in zip(lines, self.lines):
            for v in raw:
                if v != HOLE and v != 1:
                    raise ValueError(f"line values must be 1 or HOLE, got {v!r}")
        object.__setattr__(self, "lines", lines)

    @property
    def n(self) -> int:
        return len(self.lines)

    @property
    def n_sites(self) -> int:
        return len(self.lines[0])

    @property
    def hi(self) -> int:
        return self.lo + self.n_sites - 1

    def line(self, m: int):
        """Line ``m`` (1-based) as a single-class configuration."""
        sites = self.lines[m - 1]
        if self.ring:
            return RingConfig(sites, 1)
        return WindowConfig(sites, 1, self.lo)

    def particle_counts(self) -> tuple:
        return tuple(sum(1 for v in line if v == 1) for line in self.lines)

    @classmethod
    def from_sets(cls, n_sites: int, particle_sets: Iterable[Iterable[int]]) -> "MultiLineConfig":
        lines = []
        for sites in particle_sets:
            occupied = {j % n_sites for j in sites}
            lines.append(tuple(1 if j in occupied else HOLE for j in range(n_sites)))
        return cls(tuple(lines))

    @classmethod
    def from_lines(cls, configs: Sequence) -> "MultiLineConfig":
        first = configs[0]
        ring = isinstance(first, RingConfig)
        return cls(tuple(c.sites for c in configs), ring, 0 if ring else first.lo)

    def _replace(self, lines) -> "MultiLineConfig":
        new = object.__new__(MultiLineConfig)
        object.__setattr__(new, "lines", lines)
        object.__setattr__(new, "ring", self.ring)
        object.__setattr__(new, "lo", self.lo)
        return new


@dataclass(frozen=True)
class MultiTypeConfig:
    """Class-assigned lines: line ``m`` carries classes ``1..m``."""

    lines: tuple

    @property
    def n(self) -> int:
        return len(self.lines)

    def line(self, m: int):
        return self.lines[m - 1]

    @property
    def bottom(self):
        return self.lines[-1]


# -- site arithmetic -------------------------------------------------------

def _offset(x: MultiLineConfig, i: int) -> int:
    if x.ring:
        return i % x.n_sites
    if not x.lo <= i <= x.hi:
        raise BoundaryError(f"site {i} outside window [{x.lo}, {x.hi}]")
    return i - x.lo


def _cascade_offsets(lines: tuple, N: int, start: int, ring: bool) -> list:
    # b[m] is the bell offset on line m; b[0] is one step past the top line.
    n = len(lines)
    b = [0] * (n + 1)
    b[n] = start
    j = start
    for m in range(n - 1, -1, -1):
        if not ring and not 0 <= j < N:
            raise BoundaryError("bell cascade leaves the window")
        if lines[m][j] != 1:
            j += 1
            if ring and j == N:
                j = 0
        b[m] = j
    return b


def _forward(lines: tuple, N: int, start: int, ring: bool) -> tuple[tuple, int]:
    b = _cascade_offsets(lines, N, start, ring)
    new = list(lines)
    for m in range(1, len(lines) + 1):
        j = b[m]
        k = j - 1
        if k < 0:
            if not ring:
                raise BoundaryError("bell pair leaves the window")
            k = N - 1
        line = lines[m - 1]
        if line[k] > line[j]:
            row = list(line)
            row[k], row[j] = row[j], row[k]
            new[m - 1] = tuple(row)
    return tuple(new), b[0]


def _reverse_cascade_offsets(lines: tuple, N: int, start: int, ring: bool) -> list:
    # c[m - 1] is the bell offset on line m; c[n] is one step past the bottom.
    n = len(lines)
    c = [start]
    j = start
    for m in range(n):
        k = j - 1
        if k < 0:
            if not ring:
                raise BoundaryError("reverse bell cascade leaves the window")
            k = N - 1
        if lines[m][k] != 1:
            j = k
        c.append(j)
    return c


def _reverse(lines: tuple, N: int, start: int, ring: bool) -> tuple[tuple, int]:
    c = _reverse_cascade_offsets(lines, N, start, ring)
    new = list(lines)
    for m, line in enumerate(lines):
        j = c[m]
        k = j - 1
        if k < 0:
            if not ring:
                raise BoundaryError("reverse bell pair leaves the window")
            k = N - 1
        if not ring and j >= N:
            raise BoundaryError("reverse bell pair leaves the window")
        if line[k] < line[j]:
            row = list(line)
            row[k], row[j] = row[j], row[k]
            new[m] = tuple(row)
    return tuple(new), c[-1]


def _label(x: MultiLineConfig, offset: int) -> int:
    return offset if x.ring else offset + x.lo


# -- public operations -----------------------------------------------------

def bell_cascade(x: MultiLineConfig, i: int) -> tuple:
    """Bell sites ``(b_n, ..., b_1, b_0)`` triggered by a bell at ``i`` on line n."""
    b = _cascade_offsets(x.lines, x.n_sites, _offset(x, i), x.ring)
    return tuple(_label(x, j) for j in reversed(b))


def forward_jump(x: MultiLineConfig, i: int) -> MultiLineConfig:
    lines, _ = _forward(x.lines, x.n_sites, _offset(x, i), x.ring)
    return x._replace(lines)


def forward_map(x: MultiLineConfig, i: int) -> tuple[MultiLineConfig, int]:
    """``(x, i) -> (state after the bell at i, exit site b_0)``."""
    if not x.ring:
        raise ValueError("forward_map is defined on rings only")
    lines, b0 = _forward(x.lines, x.n_sites, _offset(x, i), True)
    return x._replace(lines), b0


def reverse_cascade(y: MultiLineConfig, j: int) -> tuple:
    """Reverse bell sites ``(c_1, ..., c_n, c_{n+1})`` for a top-line bell at ``j``."""
    c = _reverse_cascade_offsets(y.lines, y.n_sites, _offset(y, j), y.ring)
    return tuple(_label(y, k) for k in c)


def reverse_jump(y: MultiLineConfig, j: int) -> MultiLineConfig:
    lines, _ = _reverse(y.lines, y.n_sites, _offset(y, j), y.ring)
    return y._replace(lines)


def reverse_map(y: MultiLineConfig, j: int) -> tuple[MultiLineConfig, int]:
    """Inverse of :func:`forward_map`."""
    if not y.ring:
        raise ValueError("reverse_map is defined on rings only")
    lines, c_last = _reverse(y.lines, y.n_sites, _offset(y, j), True)
    return y._replace(lines), c_last


def _depart(a: tuple, s: tuple, m: int) -> tuple:
    # Iterated collapse on raw tuples; see queueing.departure_ring.
    N = len(a)
    n_srv = 0
    for v in s:
        if v == 1:
            n_srv += 1
    n_arr = N - a.count(HOLE)
    if n_arr > n_srv:
        raise InfeasibleError(f"{n_arr} arrivals exceed {n_srv} services on the ring")
    d = [HOLE] * N
    for j in range(N):
        if s[j] == 1:
            d[j] = m + 1
    for r in range(1, m + 1):
        for i in range(N):
            if a[i] == r:
                j = i
                while d[j] != m + 1:
                    j += 1
                    if j == N:
                        j = 0
                d[j] = r
    return tuple(d)


def _assign_lines(lines: tuple) -> list:
    v = [lines[0]]
    for m in range(1, len(lines)):
        v.append(_depart(v[-1], lines[m], m))
    return v


def assign_classes_ring(x: MultiLineConfig) -> MultiTypeConfig:
    """Run the tandem ring queues: line ``m + 1`` serves the output of line ``m``."""
    if not x.ring:
        raise ValueError("use assign_classes_window for windows")
    v = _assign_lines(x.lines)
    return MultiTypeConfig(tuple(RingConfig(line, m + 1) for m, line in enumerate(v)))


def bottom_line_ring(x: MultiLineConfig) -> tuple:
    """Raw site tuple of the bottom class-assigned line (fast path for enumeration)."""
    return _assign_lines(x.lines)[-1]


def assign_classes_window(
    x: MultiLineConfig, inits: Sequence[QueueState] = None
) -> MultiTypeConfig:
    """Window version of :func:`assign_classes_ring` with explicit initial queues.

    ``inits[m - 1]`` is the state of queue ``m`` (``m`` classes) just before the
    window's first site; default is all queues empty.
    """
    if x.ring:
        raise ValueError("use assign_classes_ring for rings")
    if inits is None:
        inits = [QueueState.empty(m) for m in range(1, x.n)]
    if len(inits) != x.n - 1:
        raise ShapeError(f"need {x.n - 1} initial queue states, got {len(inits)}")
    v = [WindowConfig(x.lines[0], 1, x.lo)]
    for m in range(1, x.n):
        s = WindowConfig(x.lines[m], 1, x.lo)
        d, _ = departure_window(v[-1], s, inits[m - 1])
        v.append(d)
    return MultiTypeConfig(tuple(v))


def commutation_check(x: MultiLineConfig, i: int) -> bool:
    """Does a bell at ``i`` act on every class-assigned line as a TASEP bell?

    Compares the class assignment of the jumped state with the class
    assignment of ``x`` swapped on each line at its cascade site.
    """
    before = assign_classes_ring(x)
    after = assign_classes_ring(forward_jump(x, i))
    b = bell_cascade(x, i)  # (b_n, ..., b_0)
    n = x.n
    for m in range(1, n + 1):
        if after.line(m) != swap_adjacent(before.line(m), b[n - m]):
            return False
    return True


def multiline_to_json(x: MultiLineConfig) -> dict:
    out = {"lines": [[0 if v == HOLE else 1 for v in line] for line in x.lines]}
    if not x.ring:
        out["topology"] = "window"
        out["lo"] = x.lo
    return out


def multiline_from_json(obj: dict) -> MultiLineConfig:
    lines = tuple(tuple(HOLE if c == 0 else 1 for c in line) for line in obj["lines"])
    ring = obj.get("topology", "ring") == "ring"
    return MultiLineConfig(lines, ring, obj.get("lo", 0))
