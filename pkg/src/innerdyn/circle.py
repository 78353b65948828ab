"""Arcs and finite unions of arcs on the unit circle.

Angles are radians reduced to ``[0, 2*pi)``. Arcs are closed. A union is
stored as sorted, pairwise separated segments ``(lo, hi)`` of ``[0, 2*pi]``;
an arc crossing angle 0 is kept as the two pieces ``(lo, 2*pi)`` and
``(0, hi)`` and only glued back together when :attr:`ArcUnion.arcs` is read.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError

TWO_PI = 2.0 * math.pi
# Absolute tolerance for every angular comparison in the package.
ANGLE_TOL = 1e-12


def reduce_angle(theta: float) -> float:
    """Reduce ``theta`` to ``[0, 2*pi)``."""
    r = math.fmod(theta, TWO_PI)
    if r < 0.0:
        r += TWO_PI
    if r >= TWO_PI:
        r = 0.0
    return r


def angular_distance(p: float, q: float) -> float:
    """Length of the shorter arc between angles ``p`` and ``q``."""
    d = abs(reduce_angle(p) - reduce_angle(q))
    return min(d, TWO_PI - d)


@dataclass(frozen=True)
class Arc:
    """Closed arc ``{e^{it} : |t - center| <= half_length}``."""

    center: float
    half_length: float

    def __post_init__(self):
        h = float(self.half_length)
        if not (h >= -ANGLE_TOL) or not (h <= math.pi + ANGLE_TOL):
            raise DomainError(f"half_length must lie in [0, pi], got {h!r}")
        object.__setattr__(self, "center", reduce_angle(float(self.center)))
        object.__setattr__(self, "half_length", min(max(h, 0.0), math.pi))

    @classmethod
    def from_start(cls, start: float, length: float) -> "Arc":
        """Arc running counter-clockwise from ``start`` for ``length`` radians."""
        return cls(start + 0.5 * length, 0.5 * length)

    @classmethod
    def full(cls) -> "Arc":
        return cls(math.pi, math.pi)

    @property
    def length(self) -> float:
        return 2.0 * self.half_length

    @property
    def start(self) -> float:
        return reduce_angle(self.center - self.half_length)

    @property
    def end(self) -> float:
        return reduce_angle(self.center + self.half_length)

    @property
    def is_full(self) -> bool:
        return self.half_length >= math.pi - ANGLE_TOL

    def contains(self, p: float) -> bool:
        return arc_contains(self, p)

    def endpoints(self) -> tuple[complex, complex]:
        """Start and end of the arc as unit complex numbers."""
        lo = self.center - self.half_length
        hi = self.center + self.half_length
        return complex(math.cos(lo), math.sin(lo)), complex(math.cos(hi), math.sin(hi))


def arc_contains(arc: Arc, p: float) -> bool:
    """Closed, wraparound-correct membership of angle ``p`` in ``arc``."""
    return angular_distance(p, arc.center) <= arc.half_length + ANGLE_TOL


def _split(lo: float, length: float) -> list[tuple[float, float]]:
    # One counter-clockwise interval -> pieces of [0, 2pi].
    if length >= TWO_PI - ANGLE_TOL:
        return [(0.0, TWO_PI)]
    s = reduce_angle(lo)
    e = s + max(length, 0.0)
    if e <= TWO_PI:
        return [(s, e)]
    return [(s, TWO_PI), (0.0, e - TWO_PI)]


def _merge(segments: Iterable[tuple[float, float]]) -> tuple[tuple[float, float], ...]:
    segs = sorted(segments)
    out: list[list[float]] = []
    for lo, hi in segs:
        if out and lo <= out[-1][1] + ANGLE_TOL:
            if hi > out[-1][1]:
                out[-1][1] = hi
        else:
            out.append([lo, hi])
    if out and out[0][0] <= ANGLE_TOL:
        out[0][0] = 0.0
    if out and out[-1][1] >= TWO_PI - ANGLE_TOL:
        out[-1][1] = TWO_PI
    if len(out) == 1 and out[0] == [0.0, TWO_PI]:
        return ((0.0, TWO_PI),)
    return tuple((lo, hi) for lo, hi in out)


class ArcUnion:
    """A closed finite union of arcs, normalised on construction."""

    __slots__ = ("_segments",)

    def __init__(self, segments: Iterable[tuple[float, float]] = ()):
        self._segments = _merge(segments)

    # constructors -----------------------------------------------------
    @classmethod
    def empty(cls) -> "ArcUnion":
        return cls(())

    @classmethod
    def full(cls) -> "ArcUnion":
        return cls([(0.0, TWO_PI)])

    @classmethod
    def from_arcs(cls, arcs: Iterable[Arc]) -> "ArcUnion":
        segs: list[tuple[float, float]] = []
        for a in arcs:
            segs.extend(_split(a.center - a.half_length, a.length))
        return cls(segs)

    @classmethod
    def from_intervals(cls, starts: Sequence[float], ends: Sequence[float]) -> "ArcUnion":
        """Union of counter-clockwise intervals ``[starts[i], ends[i]]`` given
        as unreduced reals with ``0 <= ends[i] - starts[i] <= 2*pi``."""
        segs: list[tuple[float, float]] = []
        for s, e in zip(starts, ends):
            segs.extend(_split(float(s), float(e) - float(s)))
        return cls(segs)

    @classmethod
    def coerce(cls, obj) -> "ArcUnion":
        if isinstance(obj, ArcUnion):
            return obj
        if isinstance(obj, Arc):
            return cls.from_arcs([obj])
        return cls.from_arcs(obj)

    # views ------------------------------------------------------------
    @property
    def segments(self) -> tuple[tuple[float, float], ...]:
        return self._segments

    @property
    def arcs(self) -> list[Arc]:
        segs = list(self._segments)
        if not segs:
            return []
        if segs == [(0.0, TWO_PI)]:
            return [Arc.full()]
        wrapped = None
        if len(segs) > 1 and segs[0][0] == 0.0 and segs[-1][1] == TWO_PI:
            head = segs.pop(0)
            tail = segs.pop()
            wrapped = Arc.from_start(tail[0], (TWO_PI - tail[0]) + head[1])
        arcs = [Arc.from_start(lo, hi - lo) for lo, hi in segs]
        if wrapped is not None:
            arcs.append(wrapped)
        return sorted(arcs, key=lambda a: a.start)

    def __len__(self) -> int:
        return len(self.arcs)

    def __repr__(self) -> str:
        return f"ArcUnion({list(self._segments)!r})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, ArcUnion):
            return NotImplemented
        return self._segments == other._segments

    def __hash__(self) -> int:
        return hash(self._segments)

    @property
    def is_empty(self) -> bool:
        return not self._segments

    def measure(self) -> float:
        return union_measure(self)

    def contains(self, p: float) -> bool:
        p = reduce_angle(p)
        for lo, hi in self._segments:
            if lo - ANGLE_TOL <= p <= hi + ANGLE_TOL:
                return True
            if p - TWO_PI >= lo - ANGLE_TOL and p - TWO_PI <= hi + ANGLE_TOL:
                return True
            if p + TWO_PI >= lo - ANGLE_TOL and p + TWO_PI <= hi + ANGLE_TOL:
                return True
        return False

    def __or__(self, other: "ArcUnion") -> "ArcUnion":
        return union(self, other)

    def __and__(self, other: "ArcUnion") -> "ArcUnion":
        return intersection(self, other)

    def __invert__(self) -> "ArcUnion":
        return complement(self)


def union_measure(u: ArcUnion) -> float:
    """Total length of ``u`` in radians."""
    total = math.fsum(hi - lo for lo, hi in ArcUnion.coerce(u).segments)
    return min(max(total, 0.0), TWO_PI)


def union(a: ArcUnion, b: ArcUnion) -> ArcUnion:
    return ArcUnion(ArcUnion.coerce(a).segments + ArcUnion.coerce(b).segments)


def intersection(a: ArcUnion, b: ArcUnion) -> ArcUnion:
    sa, sb = ArcUnion.coerce(a).segments, ArcUnion.coerce(b).segments
    out = []
    i = j = 0
    while i < len(sa) and j < len(sb):
        lo = max(sa[i][0], sb[j][0])
        hi = min(sa[i][1], sb[j][1])
        if lo <= hi + ANGLE_TOL:
            out.append((lo, max(lo, hi)))
        if sa[i][1] < sb[j][1]:
            i += 1
        else:
            j += 1
    return ArcUnion(out)


def complement(a: ArcUnion) -> ArcUnion:
    """Closure of the complement of ``a``."""
    segs = ArcUnion.coerce(a).segments
    out = []
    prev = 0.0
    for lo, hi in segs:
        if lo - prev > ANGLE_TOL:
            out.append((prev, lo))
        prev = max(prev, hi)
    if TWO_PI - prev > ANGLE_TOL:
        out.append((prev, TWO_PI))
    return ArcUnion(out)


def disk_automorphism_lift(z: complex, theta):
    """Continuous lift of ``t -> arg((e^{it} - z)/(1 - conj(z) e^{it}))``.

    Writing ``w = 1 - z e^{-it}`` the factor equals ``e^{it} w / conj(w)``
    and ``Re w > 0``, so ``t + 2*atan2(Im w, Re w)`` is continuous in ``t``.
    """
    theta = np.asarray(theta, dtype=float)
    w = 1.0 - z * np.exp(-1j * theta)
    return theta + 2.0 * np.arctan2(w.imag, w.real)


def harmonic_measure(z: complex, u) -> float:
    """Harmonic measure of ``u`` in the unit disk seen from ``z``.

    Computed exactly by moving ``z`` to the origin with a disk automorphism
    and measuring the image arcs through the automorphism's lift.
    """
    z = complex(z)
    if abs(z) >= 1.0:
        raise DomainError(f"harmonic measure needs |z| < 1, got |z| = {abs(z)!r}")
    segs = ArcUnion.coerce(u).segments
    if not segs:
        return 0.0
    lo = np.array([s[0] for s in segs])
    hi = np.array([s[1] for s in segs])
    widths = disk_automorphism_lift(z, hi) - disk_automorphism_lift(z, lo)
    return min(max(math.fsum(widths) / TWO_PI, 0.0), 1.0)
