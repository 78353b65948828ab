"""Boundary orbits and the statistics of hitting a target.

Double-precision orbits of expanding circle maps do not shadow true orbits
pointwise. What is checked here are statistics over many starting points
and exact set computations on short windows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import _kernels as K
from .circle import ANGLE_TOL, TWO_PI, Arc, ArcUnion, intersection, union_measure
from .composition import MapSequence, run
from .errors import BudgetExceeded, ContractViolation
from .maps import preimage
from .targets import ExampleSystem, TargetSequence

EXACT_ARC_BUDGET = 1 << 24


def _unpack(system):
    if isinstance(system, ExampleSystem):
        return system.maps, system.target
    seq, target = system
    return seq, target


# ---------------------------------------------------------------------------
# sampling


def sample_angles(seed: int, count: int, start: int = 0) -> np.ndarray:
    """Uniform angles ``theta_i``, ``start <= i < start + count``.

    Drawn from the counter-based Philox stream keyed by ``seed``; sample
    ``i`` depends only on ``(seed, i)``.
    """
    gen = np.random.Generator(np.random.Philox(key=int(seed) & ((1 << 64) - 1)))
    return gen.random(start + count)[start:] * TWO_PI


def wilson_interval(successes: int, n: int, z: float = 1.959963984540054):
    if n == 0:
        return 0.0, 1.0
    p = successes / n
    denom = 1.0 + z * z / n
    mid = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    return max(0.0, mid - half), min(1.0, mid + half)


@dataclass(frozen=True)
class MeasureEstimate:
    fraction: float
    ci_low: float
    ci_high: float
    samples: int
    seed: int
    hits: int

    @property
    def sigma(self) -> float:
        """Binomial standard error of ``fraction``."""
        p = self.fraction
        return math.sqrt(max(p * (1.0 - p), 0.0) / self.samples)


# ---------------------------------------------------------------------------
# orbits


def boundary_orbit(seq: MapSequence, theta0: float, N: int) -> np.ndarray:
    """Angles ``theta_1..theta_N`` with ``theta_n = f_n(theta_{n-1})``."""
    table = K.build_stage_table(seq, N)
    pts = K.orbit_points_kernel(K.unit_points(theta0), table.tau, table.zeros,
                                table.deg, table.step_ptr, N)
    return K.angles_of(pts[0])


def boundary_orbit_points(seq: MapSequence, thetas, N: int, threads: int = 1) -> np.ndarray:
    """Unit complex orbit points, shape ``(len(thetas), N)``."""
    table = K.build_stage_table(seq, N)
    return K.sharded(K.orbit_points_kernel, K.unit_points(thetas), threads,
                     table.tau, table.zeros, table.deg, table.step_ptr, N)


@dataclass(frozen=True)
class HitStatistics:
    """``counts[i, j] = A(checkpoints[j], sample_points[i])``."""

    sample_points: np.ndarray
    checkpoints: np.ndarray
    counts: np.ndarray
    first_hit: np.ndarray  # -1 when no hit up to the last checkpoint
    phi: np.ndarray

    def ratio(self) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.counts / self.phi[None, :]


def phi(target: Optional[TargetSequence], N: int) -> float:
    """``sum_{n<=N} |I_n| / 2 pi``."""
    if target is None:
        return 0.0
    return target.length_sum(N) / TWO_PI


def hit_count(system, theta0, checkpoints: Sequence[int], threads: int = 1) -> HitStatistics:
    """Count ``A(N, theta0) = #{n <= N : theta_n in I_n}`` at each checkpoint."""
    seq, target = _unpack(system)
    cps = np.asarray(sorted(int(c) for c in checkpoints), dtype=np.int64)
    if len(cps) == 0 or cps[0] < 1:
        raise ValueError("checkpoints must be positive")
    if np.any(np.diff(cps) <= 0):
        raise ValueError("checkpoints must be strictly increasing")
    N = int(cps[-1])
    table = K.build_stage_table(seq, N)
    tt = K.build_target_table(target, N)
    thetas = np.atleast_1d(np.asarray(theta0, dtype=float))
    counts, first = K.sharded(
        K.hit_count_kernel, K.unit_points(thetas), threads,
        table.tau, table.zeros, table.deg, table.step_ptr,
        tt.center, tt.sin_h, tt.cos_h, tt.mode, cps, ANGLE_TOL,
    )
    phis = np.array([phi(target, int(c)) for c in cps])
    if target is not None and target.empty:
        phis[:] = 0.0
    return HitStatistics(thetas, cps, counts, first, phis)


def hit_flags(system, thetas, window: tuple[int, int], threads: int = 1) -> np.ndarray:
    """Per starting angle: does ``theta_n in I_n`` for some ``n`` in the window?"""
    seq, target = _unpack(system)
    n0, n1 = int(window[0]), int(window[1])
    if not 1 <= n0 <= n1:
        raise ValueError("window must satisfy 1 <= N0 <= N1")
    table = K.build_stage_table(seq, n1)
    tt = K.build_target_table(target, n1)
    return K.sharded(
        K.hit_any_kernel, K.unit_points(thetas), threads,
        table.tau, table.zeros, table.deg, table.step_ptr,
        tt.center, tt.sin_h, tt.cos_h, tt.mode, n0, n1, ANGLE_TOL,
    )


def hit_measure(system, window: tuple[int, int], samples: int, seed: int,
                threads: int = 1) -> MeasureEstimate:
    """Monte Carlo estimate of ``|union_{n in window} F_n^{-1}(I_n)| / 2 pi``."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    flags = hit_flags(system, sample_angles(seed, samples), window, threads)
    hits = int(np.count_nonzero(flags))
    lo, hi = wilson_interval(hits, samples)
    return MeasureEstimate(hits / samples, lo, hi, samples, int(seed), hits)


# ---------------------------------------------------------------------------
# exact preimages


def _degree_budget(seq, n_max, budget):
    prod, out = 1, []
    for n in range(1, n_max + 1):
        prod *= seq(n).degree
        out.append(prod)
        if prod > budget:
            break
    return out


def exact_hit_sets(system, window: tuple[int, int], budget: int = EXACT_ARC_BUDGET
                   ) -> dict[int, ArcUnion]:
    """``E_n = F_n^{-1}(I_n)`` for each ``n`` in the window, by exact preimages."""
    seq, target = _unpack(system)
    n0, n1 = int(window[0]), int(window[1])
    if not 1 <= n0 <= n1:
        raise ValueError("window must satisfy 1 <= N0 <= N1")
    degs = _degree_budget(seq, n1, budget)
    needed = sum(degs[n0 - 1:n1]) if len(degs) >= n1 else budget + 1
    if needed > budget:
        raise BudgetExceeded(f"window {n0}..{n1} needs more than {budget} arcs")
    out = {}
    for n in range(n0, n1 + 1):
        arc = None if target is None else target.arc(n)
        u = ArcUnion.empty() if arc is None else ArcUnion.from_arcs([arc])
        for k in range(n, 0, -1):
            if u.is_empty:
                break
            u = preimage(seq(k), u)
        out[n] = u
    return out


def exact_hit_union(system, window: tuple[int, int], budget: int = EXACT_ARC_BUDGET
                    ) -> ArcUnion:
    """Exact ``union_{n in window} F_n^{-1}(I_n)``."""
    sets = exact_hit_sets(system, window, budget)
    segs = []
    for u in sets.values():
        segs.extend(u.segments)
    return ArcUnion(segs)


@dataclass(frozen=True)
class OverlapRecord:
    m: int
    n: int
    lhs: float  # |E_m cap E_n| / 2 pi
    rhs_product_term: float  # (|E_n|/2 pi) (|E_m|/2 pi)
    excess: float
    measure_n: float  # |E_n|

    @property
    def excess_ratio(self) -> float:
        return self.excess / self.measure_n if self.measure_n > 0 else 0.0


def overlap_correlation(system, m: int, n: int, budget: int = EXACT_ARC_BUDGET
                        ) -> OverlapRecord:
    """Exact pair overlap of hitting sets against the independent product."""
    lo, hi = min(m, n), max(m, n)
    sets = exact_hit_sets(system, (lo, hi), budget)
    return _overlap(sets, m, n)


def _overlap(sets, m, n) -> OverlapRecord:
    em, en = sets[m], sets[n]
    lhs = union_measure(intersection(em, en)) / TWO_PI
    mn, mm = union_measure(en), union_measure(em)
    prod = (mn / TWO_PI) * (mm / TWO_PI)
    return OverlapRecord(m, n, lhs, prod, lhs - prod, mn)


def overlap_profile(system, m: int, n_max: int, budget: int = EXACT_ARC_BUDGET
                    ) -> list[OverlapRecord]:
    """:func:`overlap_correlation` for ``n = m+1 .. n_max``, sharing the sets."""
    sets = exact_hit_sets(system, (m, n_max), budget)
    return [_overlap(sets, m, n) for n in range(m + 1, n_max + 1)]


def mixing_defect(seq: MapSequence, n: int, A: Arc, E: Arc,
                  budget: int = EXACT_ARC_BUDGET) -> float:
    """``| |A cap F_n^{-1}(E)| / |E| - |A| / 2 pi |`` for centred maps."""
    degs = _degree_budget(seq, n, budget)
    if len(degs) < n or degs[-1] > budget:
        raise BudgetExceeded(f"F_{n} has more than {budget} preimage arcs")
    for k in range(1, n + 1):
        if abs(complex(seq(k).eval(0j))) > 1e-12:
            raise ContractViolation(f"f_{k} does not fix 0")
    u = ArcUnion.from_arcs([E])
    for k in range(n, 0, -1):
        u = preimage(seq(k), u)
    inter = union_measure(intersection(ArcUnion.from_arcs([A]), u))
    return abs(inter / E.length - A.length / TWO_PI)


# ---------------------------------------------------------------------------
# density and Denjoy-Wolff distance


@dataclass(frozen=True)
class DensityProfile:
    cells: int
    visits: np.ndarray

    @property
    def min_visits(self) -> int:
        return int(self.visits.min())

    @property
    def cells_visited(self) -> int:
        return int(np.count_nonzero(self.visits))


def density_profiles(seq: MapSequence, thetas, N: int, cells: int, threads: int = 1
                     ) -> list[DensityProfile]:
    if cells < 1:
        raise ValueError("cell count must be >= 1")
    table = K.build_stage_table(seq, N)
    visits = K.sharded(K.density_kernel, K.unit_points(thetas), threads,
                       table.tau, table.zeros, table.deg, table.step_ptr, N, cells)
    return [DensityProfile(cells, v) for v in visits]


def density_profile(seq: MapSequence, theta0: float, N: int, cells: int) -> DensityProfile:
    """Visits of ``theta_1..theta_N`` to ``cells`` equal arcs of the circle."""
    return density_profiles(seq, [theta0], N, cells)[0]


def dw_profile(seq: MapSequence, theta0, N: int, threads: int = 1) -> np.ndarray:
    """``d_n = |F_n(e^{i theta0}) - F_n(0)|`` for ``n = 1..N``.

    Returns shape ``(N,)`` for a scalar ``theta0`` and ``(S, N)`` otherwise.
    """
    state = run(seq, N)
    pts = boundary_orbit_points(seq, theta0, N, threads)
    d = np.abs(pts - state.orbit[1:][None, :])
    return d[0] if np.ndim(theta0) == 0 else d


__all__ = [
    "DensityProfile",
    "HitStatistics",
    "MeasureEstimate",
    "OverlapRecord",
    "boundary_orbit",
    "boundary_orbit_points",
    "density_profile",
    "density_profiles",
    "dw_profile",
    "exact_hit_sets",
    "exact_hit_union",
    "hit_count",
    "hit_flags",
    "hit_measure",
    "mixing_defect",
    "overlap_correlation",
    "overlap_profile",
    "phi",
    "sample_angles",
    "wilson_interval",
]
