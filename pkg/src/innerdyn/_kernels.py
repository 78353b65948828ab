"""Compiled per-sample boundary orbit loops.

A map sequence over steps ``1..N`` is flattened into a stage table: each
step is a run of Blaschke stages ``tau * prod (w - a)/(1 - conj(a) w)``. The
boundary point is carried as a unit complex number, renormalised once per
step. Targets are flattened to (center, sin h, cos h, mode) per step so the
hit test needs no transcendental calls.

All loops are scalar and per sample, so results do not depend on how the
samples are split across threads.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from numba import njit

from .circle import ANGLE_TOL, TWO_PI

MODE_EMPTY, MODE_SMALL, MODE_LARGE, MODE_FULL = 0, 1, 2, 3


@dataclass(frozen=True)
class StageTable:
    tau: np.ndarray  # complex128[S]
    zeros: np.ndarray  # complex128[S, D]
    deg: np.ndarray  # int64[S]
    step_ptr: np.ndarray  # int64[N + 1]

    @property
    def steps(self) -> int:
        return len(self.step_ptr) - 1

    def head(self, n: int) -> "StageTable":
        if n > self.steps:
            raise ValueError(f"table holds {self.steps} steps, {n} requested")
        s = int(self.step_ptr[n])
        return StageTable(self.tau[:s], self.zeros[:s], self.deg[:s], self.step_ptr[: n + 1])


@dataclass(frozen=True)
class TargetTable:
    center: np.ndarray  # complex128[N]
    sin_h: np.ndarray
    cos_h: np.ndarray
    mode: np.ndarray  # int8[N]


def build_stage_table(seq, n_steps: int) -> StageTable:
    """Flatten ``f_1..f_N`` of a map sequence; cached on the sequence."""
    cached = getattr(seq, "_table_cache", None)
    if cached is not None and cached.steps >= n_steps:
        return cached.head(n_steps)
    auto = getattr(seq, "autonomous_map", None)
    builder = getattr(seq, "table_builder", None)
    if builder is not None:
        table = builder(n_steps)
    elif auto is not None:
        stages = auto.stages
        per = len(stages)
        dmax = max(s.degree for s in stages)
        tau = np.tile(np.array([s.tau for s in stages], dtype=complex), n_steps)
        z1 = np.zeros((per, dmax), dtype=complex)
        for i, s in enumerate(stages):
            z1[i, : s.degree] = s.zeros
        zeros = np.tile(z1, (n_steps, 1))
        deg = np.tile(np.array([s.degree for s in stages], dtype=np.int64), n_steps)
        ptr = np.arange(n_steps + 1, dtype=np.int64) * per
        table = StageTable(tau, zeros, deg, ptr)
    else:
        taus, zs, degs = [], [], []
        ptr = np.zeros(n_steps + 1, dtype=np.int64)
        count = 0
        for n in range(1, n_steps + 1):
            for s in seq(n).stages:
                taus.append(s.tau)
                zs.append(s.zeros)
                degs.append(len(s.zeros))
                count += 1
            ptr[n] = count
        dmax = max(degs) if degs else 1
        zeros = np.zeros((count, dmax), dtype=complex)
        for i, z in enumerate(zs):
            zeros[i, : len(z)] = z
        table = StageTable(np.array(taus, dtype=complex), zeros,
                           np.array(degs, dtype=np.int64), ptr)
    try:
        seq._table_cache = table
    except AttributeError:
        pass
    return table


def build_target_table(target, n_steps: int) -> TargetTable:
    if target is None or getattr(target, "empty", False):
        z = np.zeros(n_steps)
        return TargetTable(np.ones(n_steps, dtype=complex), z, z.copy(),
                           np.full(n_steps, MODE_EMPTY, dtype=np.int8))
    half = 0.5 * target.lengths(n_steps)
    centers = target.centers(n_steps)
    mode = np.where(half <= 0.5 * math.pi, MODE_SMALL, MODE_LARGE).astype(np.int8)
    mode[half >= math.pi - ANGLE_TOL] = MODE_FULL
    return TargetTable(np.exp(1j * centers), np.sin(half), np.cos(half), mode)


@njit(cache=True, nogil=True)
def _step(w, tau, zeros, deg, lo, hi):
    for s in range(lo, hi):
        v = tau[s]
        for j in range(deg[s]):
            a = zeros[s, j]
            if a == 0:
                v *= w
            else:
                v *= (w - a) / (1.0 - a.conjugate() * w)
        w = v
    return w / abs(w)


@njit(cache=True, nogil=True)
def _hits(w, center, sin_h, cos_h, mode, tol):
    md = mode
    if md == 0:
        return False
    if md == 3:
        return True
    u = w * center.conjugate()
    if md == 1:
        return u.real >= -tol and abs(u.imag) <= sin_h + tol
    return u.real >= cos_h - tol


@njit(cache=True, nogil=True)
def orbit_points_kernel(w0, tau, zeros, deg, ptr, n_steps):
    out = np.empty((w0.shape[0], n_steps), dtype=np.complex128)
    for i in range(w0.shape[0]):
        w = w0[i]
        for n in range(n_steps):
            w = _step(w, tau, zeros, deg, ptr[n], ptr[n + 1])
            out[i, n] = w
    return out


@njit(cache=True, nogil=True)
def hit_count_kernel(w0, tau, zeros, deg, ptr, center, sin_h, cos_h, mode, checkpoints, tol):
    ns = w0.shape[0]
    nc = checkpoints.shape[0]
    counts = np.zeros((ns, nc), dtype=np.int64)
    first = np.full(ns, -1, dtype=np.int64)
    n_steps = checkpoints[nc - 1]
    for i in range(ns):
        w = w0[i]
        c = 0
        ci = 0
        for n in range(n_steps):
            w = _step(w, tau, zeros, deg, ptr[n], ptr[n + 1])
            if _hits(w, center[n], sin_h[n], cos_h[n], mode[n], tol):
                c += 1
                if first[i] < 0:
                    first[i] = n + 1
            while ci < nc and checkpoints[ci] == n + 1:
                counts[i, ci] = c
                ci += 1
    return counts, first


@njit(cache=True, nogil=True)
def hit_any_kernel(w0, tau, zeros, deg, ptr, center, sin_h, cos_h, mode, n0, n1, tol):
    ns = w0.shape[0]
    out = np.zeros(ns, dtype=np.bool_)
    for i in range(ns):
        w = w0[i]
        for n in range(n1):
            w = _step(w, tau, zeros, deg, ptr[n], ptr[n + 1])
            if n + 1 >= n0 and _hits(w, center[n], sin_h[n], cos_h[n], mode[n], tol):
                out[i] = True
                break
    return out


@njit(cache=True, nogil=True)
def density_kernel(w0, tau, zeros, deg, ptr, n_steps, cells):
    ns = w0.shape[0]
    visits = np.zeros((ns, cells), dtype=np.int64)
    two_pi = 2.0 * math.pi
    for i in range(ns):
        w = w0[i]
        for n in range(n_steps):
            w = _step(w, tau, zeros, deg, ptr[n], ptr[n + 1])
            t = math.atan2(w.imag, w.real)
            if t < 0.0:
                t += two_pi
            k = int(t * cells / two_pi)
            if k >= cells:
                k = cells - 1
            visits[i, k] += 1
    return visits


def sharded(fn, w0: np.ndarray, threads: int, *args):
    """Run ``fn(chunk, *args)`` on contiguous sample chunks and stack results."""
    threads = max(1, int(threads))
    if threads == 1 or len(w0) < 2:
        return fn(w0, *args)
    chunks = [c for c in np.array_split(w0, threads) if len(c)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        parts = list(pool.map(lambda c: fn(c, *args), chunks))
    if isinstance(parts[0], tuple):
        return tuple(np.concatenate([p[k] for p in parts]) for k in range(len(parts[0])))
    return np.concatenate(parts)


def unit_points(thetas) -> np.ndarray:
    t = np.atleast_1d(np.asarray(thetas, dtype=float))
    return np.exp(1j * t)


def angles_of(points: np.ndarray) -> np.ndarray:
    t = np.mod(np.angle(points), TWO_PI)
    return np.where(t >= TWO_PI, 0.0, t)
