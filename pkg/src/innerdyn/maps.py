"""Finite Blaschke products, disk automorphisms and chains of them.

Every map here is an inner function given by a rational formula, so the
boundary map ``theta -> arg B(e^{i theta})`` is an analytic circle map with a
closed-form continuous lift. Boundary preimages of arcs are found by
inverting that lift with a bracketed Newton iteration.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence, Union

import numpy as np

from .circle import (
    ANGLE_TOL,
    TWO_PI,
    Arc,
    ArcUnion,
    disk_automorphism_lift,
    reduce_angle,
)
from .errors import ConstructionError, DomainError, RootFindingError

# Zeros closer than this to the circle are refused.
MAX_ZERO_MODULUS = 1.0 - 1e-9
MAX_EXPANDED_DEGREE = 64
LIFT_XTOL = 1e-14
_MAX_NEWTON_ITER = 200


def _unimodular(tau) -> complex:
    tau = complex(tau)
    if abs(abs(tau) - 1.0) > 1e-9:
        raise ConstructionError(f"rotation factor must be unimodular, |tau| = {abs(tau)!r}")
    return tau / abs(tau)


def _check_closed_disk(z):
    m = np.max(np.abs(z)) if np.ndim(z) else abs(z)
    if m > 1.0 + 1e-12:
        raise DomainError(f"evaluation point outside the closed disk (|z| = {m!r})")


@dataclass(frozen=True)
class FiniteBlaschke:
    """``z -> tau * prod_k (z - a_k) / (1 - conj(a_k) z)``."""

    tau: complex
    zeros: tuple

    def __post_init__(self):
        zeros = tuple(complex(a) for a in self.zeros)
        if not zeros:
            raise ConstructionError("a finite Blaschke product needs at least one zero")
        for a in zeros:
            if abs(a) > MAX_ZERO_MODULUS:
                raise ConstructionError(f"zero {a!r} too close to the unit circle")
        object.__setattr__(self, "tau", _unimodular(self.tau))
        object.__setattr__(self, "zeros", zeros)

    @classmethod
    def rotation(cls, phi: float) -> "FiniteBlaschke":
        return cls(cmath.exp(1j * phi), (0j,))

    @property
    def degree(self) -> int:
        return len(self.zeros)

    @property
    def stages(self) -> tuple["FiniteBlaschke", ...]:
        return (self,)

    def is_centered(self) -> bool:
        return any(a == 0 for a in self.zeros)

    def __call__(self, z):
        return self.eval(z)

    def eval(self, z):
        _check_closed_disk(z)
        if np.ndim(z) == 0:
            z = complex(z)
            out = self.tau
            for a in self.zeros:
                out *= (z - a) / (1.0 - a.conjugate() * z)
            return out
        z = np.asarray(z, dtype=complex)
        out = np.full(z.shape, self.tau, dtype=complex)
        for a in self.zeros:
            out *= (z - a) / (1.0 - np.conj(a) * z)
        return out

    def derivative(self, z):
        """Exact derivative by the product rule (safe at the zeros)."""
        _check_closed_disk(z)
        scalar = np.ndim(z) == 0
        if scalar:
            return self._scalar_derivative(complex(z))
        z = np.asarray(z, dtype=complex)
        factors = [(z - a) / (1.0 - np.conj(a) * z) for a in self.zeros]
        dfactors = [(1.0 - abs(a) ** 2) / (1.0 - np.conj(a) * z) ** 2 for a in self.zeros]
        d = len(factors)
        prefix = [np.ones_like(z)]
        for f in factors[:-1]:
            prefix.append(prefix[-1] * f)
        total = np.zeros_like(z)
        suffix = np.ones_like(z)
        for k in range(d - 1, -1, -1):
            total += prefix[k] * dfactors[k] * suffix
            suffix = suffix * factors[k]
        return self.tau * total

    def _scalar_derivative(self, z: complex) -> complex:
        factors = [(z - a) / (1.0 - a.conjugate() * z) for a in self.zeros]
        total = 0j
        prefix = 1.0 + 0j
        for k, a in enumerate(self.zeros):
            suffix = 1.0 + 0j
            for f in factors[k + 1:]:
                suffix *= f
            total += prefix * (1.0 - abs(a) ** 2) / (1.0 - a.conjugate() * z) ** 2 * suffix
            prefix *= factors[k]
        return self.tau * total

    def lift(self, theta):
        """Continuous, strictly increasing lift of the boundary map."""
        theta = np.asarray(theta, dtype=float)
        out = np.full(theta.shape, cmath.phase(self.tau))
        for a in self.zeros:
            out = out + disk_automorphism_lift(a, theta)
        return out

    def boundary_map(self, theta):
        w = self.eval(np.exp(1j * np.asarray(theta, dtype=float)))
        out = np.mod(np.angle(w), TWO_PI)
        out = np.where(out >= TWO_PI, 0.0, out)
        return float(out) if np.ndim(out) == 0 else out

    def boundary_derivative(self, theta):
        """``d/dtheta arg B(e^{i theta})``, a sum of Poisson kernels."""
        e = np.exp(1j * np.asarray(theta, dtype=float))
        out = np.zeros(e.shape)
        for a in self.zeros:
            out = out + (1.0 - abs(a) ** 2) / np.abs(e - a) ** 2
        return float(out) if np.ndim(out) == 0 else out

    def invert_lift(self, targets) -> np.ndarray:
        """Solve ``lift(theta) = t`` for each real ``t``."""
        return _invert_lift(self, np.asarray(targets, dtype=float))


@dataclass(frozen=True)
class MobiusAutomorphism:
    """Disk automorphism ``z -> tau (z + a) / (1 + conj(a) z)``; sends 0 to ``tau*a``."""

    a: complex = 0j
    tau: complex = 1 + 0j

    def __post_init__(self):
        a = complex(self.a)
        if abs(a) > MAX_ZERO_MODULUS:
            raise ConstructionError(f"|a| must be < 1, got {abs(a)!r}")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "tau", _unimodular(self.tau))

    @classmethod
    def identity(cls) -> "MobiusAutomorphism":
        return cls(0j, 1 + 0j)

    @classmethod
    def rotation(cls, phi: float) -> "MobiusAutomorphism":
        return cls(0j, cmath.exp(1j * phi))

    @cached_property
    def blaschke(self) -> FiniteBlaschke:
        return FiniteBlaschke(self.tau, (-self.a,))

    @property
    def degree(self) -> int:
        return 1

    @property
    def stages(self) -> tuple[FiniteBlaschke, ...]:
        return (self.blaschke,)

    def is_centered(self) -> bool:
        return self.a == 0

    def inverse(self) -> "MobiusAutomorphism":
        return mobius_inverse(self)

    def __call__(self, z):
        return self.eval(z)

    def eval(self, z):
        _check_closed_disk(z)
        return self.tau * (z + self.a) / (1.0 + self.a.conjugate() * z)

    def derivative(self, z):
        return self.tau * (1.0 - abs(self.a) ** 2) / (1.0 + self.a.conjugate() * z) ** 2

    def lift(self, theta):
        return self.blaschke.lift(theta)

    def boundary_map(self, theta):
        return self.blaschke.boundary_map(theta)

    def boundary_derivative(self, theta):
        return self.blaschke.boundary_derivative(theta)


def mobius_inverse(m: MobiusAutomorphism) -> MobiusAutomorphism:
    return MobiusAutomorphism(-m.tau * m.a, m.tau.conjugate())


class ComposedMap:
    """Chain of maps applied left to right: ``stages[-1] o ... o stages[0]``.

    The chain is never multiplied out; evaluation passes through each stage.
    """

    __slots__ = ("stages",)

    def __init__(self, maps: Sequence):
        stages: list[FiniteBlaschke] = []
        for m in maps:
            stages.extend(m.stages)
        if not stages:
            raise ConstructionError("empty composition")
        self.stages = tuple(stages)

    def __repr__(self) -> str:
        return f"ComposedMap({list(self.stages)!r})"

    def __eq__(self, other) -> bool:
        return isinstance(other, ComposedMap) and self.stages == other.stages

    def __hash__(self) -> int:
        return hash(self.stages)

    @property
    def degree(self) -> int:
        return math.prod(s.degree for s in self.stages)

    def __call__(self, z):
        return self.eval(z)

    def eval(self, z):
        for s in self.stages:
            z = s.eval(z)
        return z

    def derivative(self, z):
        out = 1.0
        for s in self.stages:
            out = out * s.derivative(z)
            z = s.eval(z)
        return out

    def is_centered(self) -> bool:
        return abs(self.eval(0j)) < 1e-12

    def lift(self, theta):
        for s in self.stages:
            theta = s.lift(theta)
        return theta

    def boundary_map(self, theta):
        for s in self.stages:
            theta = s.boundary_map(theta)
        return theta

    def boundary_derivative(self, theta):
        out = 1.0
        for s in self.stages:
            out = out * s.boundary_derivative(theta)
            theta = s.boundary_map(theta)
        return out


InnerMap = Union[FiniteBlaschke, MobiusAutomorphism, ComposedMap]


def as_stages(f: InnerMap) -> tuple[FiniteBlaschke, ...]:
    return f.stages


def _invert_lift(b: FiniteBlaschke, targets: np.ndarray) -> np.ndarray:
    # Fold every target into one period [L0, L0 + 2 pi d) where theta in [0, 2 pi).
    d = b.degree
    period = TWO_PI * d
    l0 = float(b.lift(0.0))
    q = np.floor((targets - l0) / period)
    r = targets - q * period
    lo = np.zeros_like(r)
    hi = np.full_like(r, TWO_PI)
    x = np.clip((r - l0) / d, 0.0, TWO_PI)
    dx = np.full_like(r, TWO_PI)
    dx_old = np.full_like(r, TWO_PI)
    active = np.ones(r.shape, dtype=bool)
    for _ in range(_MAX_NEWTON_ITER):
        if not active.any():
            break
        xa = x[active]
        g = b.lift(xa) - r[active]
        gp = b.boundary_derivative(xa)
        above = g > 0
        lo_a = np.where(above, lo[active], xa)
        hi_a = np.where(above, xa, hi[active])
        step = g / gp
        newton = xa - step
        # Newton can bounce across a sharp Poisson peak; bisect unless its
        # step is under half the one before last.
        trusted = ((newton > lo_a) & (newton < hi_a)
                   & (np.abs(step) < 0.5 * np.abs(dx_old[active])))
        x_new = np.where(trusted, newton, 0.5 * (lo_a + hi_a))
        dx_old[active] = dx[active]
        dx[active] = x_new - xa
        done = (np.abs(x_new - xa) < LIFT_XTOL) | (hi_a - lo_a < LIFT_XTOL) | (g == 0)
        lo[active] = lo_a
        hi[active] = hi_a
        x[active] = np.where(g == 0, xa, x_new)
        idx = np.flatnonzero(active)
        active[idx[done]] = False
    if active.any():
        raise RootFindingError(
            "lift inversion did not converge",
            {
                "unconverged": int(active.sum()),
                "max_bracket": float(np.max(hi[active] - lo[active])),
                "zeros": b.zeros,
            },
        )
    return x + q * TWO_PI


def preimage(f: InnerMap, u) -> ArcUnion:
    """Exact boundary preimage ``f^{-1}(u)`` of a union of arcs."""
    u = ArcUnion.coerce(u)
    for stage in reversed(f.stages):
        u = _stage_preimage(stage, u)
    return u


def _stage_preimage(b: FiniteBlaschke, u: ArcUnion) -> ArcUnion:
    segs = u.segments
    if not segs:
        return u
    if segs == ((0.0, TWO_PI),):
        return ArcUnion.full()
    d = b.degree
    l0 = float(b.lift(0.0))
    lo = np.array([s[0] for s in segs])
    hi = np.array([s[1] for s in segs])
    j0 = np.ceil((l0 - lo) / TWO_PI)
    shifts = (j0[:, None] + np.arange(d)[None, :]) * TWO_PI
    t_lo = (lo[:, None] + shifts).ravel()
    t_hi = (hi[:, None] + shifts).ravel()
    roots = b.invert_lift(np.concatenate([t_lo, t_hi]))
    starts, ends = roots[: t_lo.size], roots[t_lo.size:]
    ends = np.maximum(ends, starts)
    return ArcUnion.from_intervals(starts, ends)


def arc_preimage(f: InnerMap, arc) -> ArcUnion:
    """Boundary preimage of a single arc (or union) under ``f``."""
    return preimage(f, arc)


def compose(f: InnerMap, g: InnerMap) -> FiniteBlaschke:
    """Multiply out ``f o g`` as one Blaschke product (degree <= 64)."""
    fs = f.stages
    gb = g if isinstance(g, FiniteBlaschke) else None
    if gb is None:
        gb = g.stages[0]
        for s in g.stages[1:]:
            gb = compose(s, gb)
    if len(fs) > 1:
        out = gb
        for s in fs:
            out = compose(s, out)
        return out
    fb = fs[0]
    if fb.degree * gb.degree > MAX_EXPANDED_DEGREE:
        raise ConstructionError(
            f"expanded degree {fb.degree * gb.degree} exceeds {MAX_EXPANDED_DEGREE}"
        )
    # Zeros of f o g are the solutions of g(z) = a_k, i.e. roots of
    # tau_g P(z) - a_k Q(z) with P = prod(z - b_j), Q = prod(1 - conj(b_j) z).
    p = np.poly(gb.zeros)
    qpoly = np.array([1.0 + 0j])
    for bj in gb.zeros:
        qpoly = np.polymul(qpoly, np.array([-np.conj(bj), 1.0]))
    zeros: list[complex] = []
    for a in fb.zeros:
        poly = np.polysub(gb.tau * p, a * qpoly)
        roots = np.roots(poly) if gb.degree > 1 else np.array([-poly[1] / poly[0]])
        zeros.extend(complex(r) for r in roots)
    zeros = _polish_zeros(gb, fb, zeros)
    probe = 1.0 + 0j
    partial = FiniteBlaschke(1.0, zeros).eval(probe)
    tau = f.eval(g.eval(probe)) / partial
    return FiniteBlaschke(tau, zeros)


def _polish_zeros(g: FiniteBlaschke, f: FiniteBlaschke, zeros: list[complex]) -> list[complex]:
    # A few Newton steps on g(z) = a_k tighten np.roots output.
    out = []
    per = g.degree
    for idx, z in enumerate(zeros):
        target = f.zeros[idx // per]
        for _ in range(3):
            dz = g.derivative(z)
            if dz == 0:
                break
            z = z - (g.eval(z) - target) / dz if abs(z) <= 1 else z
        out.append(z)
    return out


def boundary_angle(f: InnerMap, theta: float) -> float:
    return reduce_angle(float(f.boundary_map(theta)))


__all__ = [
    "ANGLE_TOL",
    "Arc",
    "ComposedMap",
    "FiniteBlaschke",
    "InnerMap",
    "MobiusAutomorphism",
    "arc_preimage",
    "as_stages",
    "boundary_angle",
    "compose",
    "mobius_inverse",
    "preimage",
]
