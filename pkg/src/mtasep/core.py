"""Configuration types for multi-type TASEP states and the elementary swap.

A site holds either a particle class ``1..n`` or :data:`HOLE`.  ``HOLE`` is
``math.inf`` so that the natural ordering ``1 < 2 < ... < n < HOLE`` drives
``min``/``max`` directly and holes can never be mistaken for a class number.
Externally (JSON/CSV) holes are written as ``0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

HOLE = math.inf

ClassValue = Union[int, float]


class MtasepError(Exception):
    """Base class for errors raised by this package."""


class InfeasibleError(MtasepError, ValueError):
    """Particle or arrival counts that no construction can accommodate."""


class ShapeError(MtasepError, ValueError):
    """Inputs whose lengths or extents do not line up."""


class BoundaryError(MtasepError, IndexError):
    """A site (or a site pair) falls outside a finite window."""


class ResourceError(MtasepError, RuntimeError):
    """An enumeration would exceed the configured size cap."""

    def __init__(self, message: str, size: int):
        super().__init__(message)
        self.size = size


def _check_values(sites: Sequence[ClassValue], n_classes: int) -> None:
    if n_classes < 0:
        raise ValueError(f"n_classes must be >= 0, got {n_classes}")
    for v in sites:
        if v == HOLE:
            continue
        if isinstance(v, bool) or not float(v).is_integer() or not 1 <= v <= n_classes:
            raise ValueError(f"site value {v!r} is not a class in 1..{n_classes} or HOLE")


def _normalize(sites: Iterable[ClassValue]) -> tuple:
    return tuple(HOLE if v == HOLE else int(v) for v in sites)


@dataclass(frozen=True)
class RingConfig:
    """Configuration on the cycle Z_N; sites are 0-indexed and wrap mod N."""

    sites: tuple
    n_classes: int

    def __post_init__(self):
        sites = _normalize(self.sites)
        if not sites:
            raise ValueError("a ring needs at least one site")
        _check_values(sites, self.n_classes)
        object.__setattr__(self, "sites", sites)

    def __len__(self) -> int:
        return len(self.sites)

    def __getitem__(self, i: int) -> ClassValue:
        return self.sites[i % len(self.sites)]

    def __iter__(self):
        return iter(self.sites)

    @property
    def n_sites(self) -> int:
        return len(self.sites)

    def with_sites(self, sites: Sequence[ClassValue]) -> "RingConfig":
        return RingConfig(tuple(sites), self.n_classes)

    def codes(self) -> list[int]:
        return to_codes(self.sites)

    @classmethod
    def from_codes(cls, codes: Iterable[int], n_classes: int) -> "RingConfig":
        return cls(from_codes(codes), n_classes)

    def __str__(self) -> str:
        return "(" + ",".join(_fmt(v) for v in self.sites) + ")"


@dataclass(frozen=True)
class WindowConfig:
    """Configuration on the integer window ``[lo, lo + len(sites) - 1]``.

    Indexing uses absolute site labels, so ``w[lo]`` is the first site.
    An empty window is allowed (``hi == lo - 1``).
    """

    sites: tuple
    n_classes: int
    lo: int = 0

    def __post_init__(self):
        sites = _normalize(self.sites)
        _check_values(sites, self.n_classes)
        object.__setattr__(self, "sites", sites)

    @property
    def hi(self) -> int:
        return self.lo + len(self.sites) - 1

    def __len__(self) -> int:
        return len(self.sites)

    def __iter__(self):
        return iter(self.sites)

    def __getitem__(self, i: int) -> ClassValue:
        if not self.lo <= i <= self.hi:
            raise BoundaryError(f"site {i} outside window [{self.lo}, {self.hi}]")
        return self.sites[i - self.lo]

    @property
    def n_sites(self) -> int:
        return len(self.sites)

    def indices(self) -> range:
        return range(self.lo, self.hi + 1)

    def with_sites(self, sites: Sequence[ClassValue]) -> "WindowConfig":
        return WindowConfig(tuple(sites), self.n_classes, self.lo)

    def restrict(self, lo: int, hi: int) -> "WindowConfig":
        if lo < self.lo or hi > self.hi:
            raise BoundaryError(f"[{lo}, {hi}] is not inside [{self.lo}, {self.hi}]")
        return WindowConfig(self.sites[lo - self.lo: hi - self.lo + 1], self.n_classes, lo)

    def codes(self) -> list[int]:
        return to_codes(self.sites)

    @classmethod
    def from_codes(cls, codes: Iterable[int], n_classes: int, lo: int = 0) -> "WindowConfig":
        return cls(from_codes(codes), n_classes, lo)

    def __str__(self) -> str:
        return f"[{self.lo}]" + "(" + ",".join(_fmt(v) for v in self.sites) + ")"


Config = Union[RingConfig, WindowConfig]


@dataclass(frozen=True)
class Counts:
    """Per-class particle counts ``p`` with prefix sums ``q``."""

    p: tuple

    def __post_init__(self):
        p = tuple(int(c) for c in self.p)
        if any(c < 0 for c in p):
            raise ValueError(f"counts must be nonnegative, got {p}")
        object.__setattr__(self, "p", p)

    @property
    def q(self) -> tuple:
        out, total = [], 0
        for c in self.p:
            total += c
            out.append(total)
        return tuple(out)

    @property
    def n(self) -> int:
        return len(self.p)

    @property
    def total(self) -> int:
        return sum(self.p)

    def __iter__(self):
        return iter(self.p)

    def __len__(self) -> int:
        return len(self.p)


def _fmt(v: ClassValue) -> str:
    return "inf" if v == HOLE else str(v)


def to_codes(sites: Iterable[ClassValue]) -> list[int]:
    """Encode site values for serialization: holes become 0."""
    return [0 if v == HOLE else int(v) for v in sites]


def from_codes(codes: Iterable[int]) -> tuple:
    return tuple(HOLE if int(c) == 0 else int(c) for c in codes)


def swap_adjacent(u: Config, i: int) -> Config:
    """Return ``u`` with sites ``i-1, i`` holding the (min, max) of that pair.

    This is the effect of a bell at site ``i``: the particle at ``i`` jumps left
    over a hole or over a particle of larger class.  On a ring the predecessor
    of site 0 is ``N-1``; on a window both ``i-1`` and ``i`` must lie inside.
    """
    sites = list(u.sites)
    if isinstance(u, RingConfig):
        N = len(sites)
        i %= N
        left = (i - 1) % N
        right = i
    else:
        if not u.lo + 1 <= i <= u.hi:
            raise BoundaryError(f"pair ({i - 1}, {i}) not inside window [{u.lo}, {u.hi}]")
        left, right = i - 1 - u.lo, i - u.lo
    x, y = sites[left], sites[right]
    if x <= y:
        return u
    sites[left], sites[right] = y, x
    return u.with_sites(sites)


def class_counts(u: Config) -> Counts:
    p = [0] * u.n_classes
    for v in u.sites:
        if v != HOLE:
            p[v - 1] += 1
    return Counts(tuple(p))


def config_to_json(u: Config) -> dict:
    if isinstance(u, RingConfig):
        return {"topology": "ring", "n": u.n_classes, "sites": u.codes()}
    return {"topology": "window", "n": u.n_classes, "lo": u.lo, "sites": u.codes()}


def config_from_json(obj: dict) -> Config:
    codes = obj["sites"]
    n = obj.get("n", max([0, *codes]))
    topology = obj.get("topology", "ring")
    if topology == "ring":
        return RingConfig.from_codes(codes, n)
    if topology == "window":
        return WindowConfig.from_codes(codes, n, obj.get("lo", 0))
    raise ValueError(f"unknown topology {topology!r}")
