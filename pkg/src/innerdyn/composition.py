"""Forward compositions ``F_n = f_n o ... o f_1``.

The composition is never multiplied out. :class:`CompositionState` tracks
the interior orbit ``F_n(z0)`` (``z0 = 0`` by default), the hyperbolic
distortions ``lambda_n`` and their running product and defect sum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import (
    ContractViolation,
    DomainError,
    HorizonTooShort,
    PrecisionExhausted,
)
from .maps import ComposedMap, FiniteBlaschke, InnerMap, MobiusAutomorphism

# |F_n(0)| closer than this to 1 aborts the orbit.
BOUNDARY_GUARD = 1e-14


def hyperbolic_density(z) -> float:
    """Density ``2 / (1 - |z|^2)`` of the hyperbolic metric on the disk."""
    return 2.0 / (1.0 - abs(z) ** 2)


class MapSequence:
    """Deterministic index -> map rule, ``n >= 1``.

    ``rule`` must be pure: the same ``n`` always yields an equal map.
    """

    def __init__(self, rule: Callable[[int], InnerMap], name: str = "sequence",
                 length: Optional[int] = None, table_builder=None):
        self._rule = rule
        self.name = name
        self.length = length
        # Optional vectorised flattening for the orbit kernels; must agree
        # with ``rule`` stage for stage.
        self.table_builder = table_builder
        self._table_cache = None

    @classmethod
    def autonomous(cls, f: InnerMap, name: str = "autonomous") -> "MapSequence":
        seq = cls(lambda n: f, name=name)
        seq.autonomous_map = f
        return seq

    @classmethod
    def from_table(cls, maps: Sequence[InnerMap], name: str = "table") -> "MapSequence":
        maps = tuple(maps)

        def rule(n):
            return maps[n - 1]

        return cls(rule, name=name, length=len(maps))

    def __call__(self, n: int) -> InnerMap:
        if n < 1 or (self.length is not None and n > self.length):
            raise IndexError(f"{self.name}: index {n} outside 1..{self.length}")
        return self._rule(n)

    def maps(self, start: int, stop: int):
        """Maps ``f_start, ..., f_stop`` (inclusive)."""
        for n in range(start, stop + 1):
            yield self(n)


@dataclass(frozen=True)
class CompositionState:
    """Immutable snapshot of ``F_n`` after ``n`` steps.

    ``orbit[k] = F_k(base_point)`` for ``k = 0..n``; ``lambdas[k-1]`` is the
    hyperbolic distortion of ``f_k`` at ``F_{k-1}(base_point)``.
    """

    n: int
    orbit: np.ndarray
    lambdas: np.ndarray
    mu_partial_sum: float
    lambda_partial_product: float
    log_lambda_product: float
    base_point: complex = 0j

    @classmethod
    def start(cls, base_point: complex = 0j) -> "CompositionState":
        base_point = complex(base_point)
        if abs(base_point) >= 1.0:
            raise DomainError("base point must lie in the open disk")
        return cls(
            n=0,
            orbit=_frozen(np.array([base_point], dtype=complex)),
            lambdas=_frozen(np.zeros(0)),
            mu_partial_sum=0.0,
            lambda_partial_product=1.0,
            log_lambda_product=0.0,
            base_point=base_point,
        )

    @property
    def one_minus_abs(self) -> np.ndarray:
        return 1.0 - np.abs(self.orbit)

    @property
    def mus(self) -> np.ndarray:
        return 1.0 - self.lambdas


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def advance(state: CompositionState, seq: MapSequence, steps: int) -> CompositionState:
    """Advance ``state`` by ``steps`` maps of ``seq``.

    ``lambda_n = rho(F_n(z0)) |f_n'(F_{n-1}(z0))| / rho(F_{n-1}(z0))`` with
    ``rho(z) = 2/(1 - |z|^2)``.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    z = complex(state.orbit[-1])
    one_minus_sq = 1.0 - abs(z) ** 2
    new_orbit = np.empty(steps, dtype=complex)
    new_lambdas = np.empty(steps)
    mu_sum = state.mu_partial_sum
    prod = state.lambda_partial_product
    log_prod = state.log_lambda_product
    for i in range(steps):
        n = state.n + i + 1
        f = seq(n)
        w = complex(f.eval(z))
        mod = abs(w)
        if mod >= 1.0 - BOUNDARY_GUARD:
            raise PrecisionExhausted(n, mod)
        w_one_minus_sq = 1.0 - mod * mod
        lam = one_minus_sq * abs(f.derivative(z)) / w_one_minus_sq
        new_orbit[i] = w
        new_lambdas[i] = lam
        mu_sum += 1.0 - lam
        prod *= lam
        log_prod += math.log(lam) if lam > 0 else -math.inf
        z, one_minus_sq = w, w_one_minus_sq
    return CompositionState(
        n=state.n + steps,
        orbit=_frozen(np.concatenate([state.orbit, new_orbit])),
        lambdas=_frozen(np.concatenate([state.lambdas, new_lambdas])),
        mu_partial_sum=mu_sum,
        lambda_partial_product=prod,
        log_lambda_product=log_prod,
        base_point=state.base_point,
    )


def run(seq: MapSequence, steps: int, base_point: complex = 0j) -> CompositionState:
    return advance(CompositionState.start(base_point), seq, steps)


@dataclass(frozen=True)
class ContractionReport:
    n: int
    lambda_product: float
    log_lambda_product: float
    mu_sum: float
    verdict: str


def contraction_report(state: CompositionState) -> ContractionReport:
    """Finite-N summary of ``prod lambda_n`` and ``sum mu_n``.

    The verdict only describes the observed trend up to ``state.n``.
    """
    n = state.n
    if n == 0:
        verdict = "no steps taken"
    else:
        mus = state.mus
        half = mus[n // 2:]
        tail_rate = float(np.sum(half)) / max(len(half), 1)
        if state.mu_partial_sum <= 1e-12 * n:
            verdict = f"N={n}: no contraction observed (sum mu = {state.mu_partial_sum:.3g})"
        else:
            verdict = (
                f"N={n}: prod lambda = {state.lambda_partial_product:.6g}, "
                f"sum mu = {state.mu_partial_sum:.6g}, mean mu over the last half = "
                f"{tail_rate:.3g}; trend only, not a limit statement"
            )
    return ContractionReport(
        n=n,
        lambda_product=state.lambda_partial_product,
        log_lambda_product=state.log_lambda_product,
        mu_sum=state.mu_partial_sum,
        verdict=verdict,
    )


def normalize(seq: MapSequence, state: CompositionState):
    """Conjugate ``seq`` so every map fixes 0.

    Returns ``(g, movers)`` where ``movers[n] = M_n``,
    ``M_n(z) = (z + F_n(0)) / (1 + conj(F_n(0)) z)`` with ``M_0 = id``, and
    ``g(n) = M_n^{-1} o f_n o M_{n-1}`` as an unexpanded chain, defined for
    ``n <= state.n``.
    """
    if state.base_point != 0:
        raise ContractViolation("normalisation uses the orbit of 0")
    movers = [MobiusAutomorphism(complex(w), 1.0) for w in state.orbit]
    movers[0] = MobiusAutomorphism.identity()

    def rule(n):
        return ComposedMap((movers[n - 1], seq(n), movers[n].inverse()))

    return MapSequence(rule, name=f"normalized({seq.name})", length=state.n), movers


@dataclass(frozen=True)
class BlockPartition:
    """Blocks ``[n_k, n_{k+1})`` of consecutive indices and chosen ``m_k``.

    ``n`` and ``m`` are 1-based and aligned: ``m[i]`` lies in
    ``[n[i], n[i+1])``. ``double_blocks[j] = (start, end)`` covers
    ``m_{2j} + 1 .. m_{2j+2}`` (with ``m_0 = 0``), and ``block_products[j]``
    and ``block_mu_sums[j]`` are the product of ``lambda`` and the sum of
    ``mu`` over it.
    """

    variant: str
    n: tuple
    m: tuple
    double_blocks: tuple
    block_products: tuple
    block_mu_sums: tuple
    partial_sums: np.ndarray = field(repr=False, compare=False)


def _first_reaching(sums: np.ndarray, levels: int):
    # Least 1-based index n with sums[n-1] in [k, k+1), for k = 1..levels.
    out = []
    for k in range(1, levels + 1):
        i = int(np.searchsorted(sums, k, side="left"))
        if i >= len(sums):
            break
        if sums[i] >= k + 1:
            raise ValueError(f"partial sums jump over [{k}, {k + 1}) at index {i + 1}")
        out.append(i + 1)
    return out


def block_partition(mu: Sequence[float], lengths: Optional[Sequence[float]] = None,
                    variant: str = "a", blocks: Optional[int] = None,
                    length_bound: Optional[float] = None) -> BlockPartition:
    """Partition indices into blocks of unit partial sum.

    Variant ``"a"`` cuts where ``mu_1 + ... + mu_{n_k}`` first enters
    ``[k, k+1)`` and picks ``m_k`` maximising ``|I_n|`` on the block.
    Variant ``"c"`` cuts on the partial sums of ``|I_n|`` (each ``<= c < 1``)
    and picks ``m_k`` minimising ``mu_n`` on ``[n_k, n_{k+1} - 1)``. Ties go
    to the smallest index. ``blocks`` requests a number of complete blocks.
    """
    mu = np.asarray(mu, dtype=float)
    if variant not in ("a", "c"):
        raise ValueError("variant must be 'a' or 'c'")
    lens = None if lengths is None else np.asarray(lengths, dtype=float)
    if lens is not None and len(lens) < len(mu):
        raise ValueError("lengths shorter than mu")
    if variant == "a":
        weights = mu
    else:
        if lens is None:
            raise ValueError("variant 'c' needs lengths")
        bound = float(np.max(lens[: len(mu)])) if length_bound is None else length_bound
        if bound >= 1.0 or np.any(lens[: len(mu)] > bound):
            raise ValueError("variant 'c' needs |I_n| <= c < 1")
        weights = lens[: len(mu)]
    sums = np.cumsum(weights)
    levels = int(math.floor(sums[-1])) if len(sums) else 0
    n_idx = _first_reaching(sums, levels)
    complete = max(len(n_idx) - 1, 0)
    if blocks is not None:
        if blocks < 1:
            raise ValueError("at least one block must be requested")
        if complete < blocks:
            partial = _assemble(variant, n_idx, mu, lens, sums)
            raise HorizonTooShort(
                f"horizon {len(mu)} completes only {complete} of {blocks} blocks",
                partial=partial,
            )
        n_idx = n_idx[: blocks + 1]
    return _assemble(variant, n_idx, mu, lens, sums)


def _assemble(variant, n_idx, mu, lens, sums) -> BlockPartition:
    m_idx = []
    for k in range(len(n_idx) - 1):
        a, b = n_idx[k], n_idx[k + 1]
        if variant == "a":
            if lens is None:
                m_idx.append(a)
            else:
                m_idx.append(a + int(np.argmax(lens[a - 1:b - 1])))
        else:
            hi = b - 1 if b - 1 > a else b
            m_idx.append(a + int(np.argmin(mu[a - 1:hi - 1])))
    lam = 1.0 - mu
    doubles, prods, msums = [], [], []
    prev = 0
    for j in range(1, len(m_idx) // 2 + 1):
        end = m_idx[2 * j - 1]
        start = prev + 1
        doubles.append((start, end))
        prods.append(float(np.prod(lam[start - 1:end])))
        msums.append(float(np.sum(mu[start - 1:end])))
        prev = end
    return BlockPartition(
        variant=variant,
        n=tuple(n_idx),
        m=tuple(m_idx),
        double_blocks=tuple(doubles),
        block_products=tuple(prods),
        block_mu_sums=tuple(msums),
        partial_sums=sums,
    )


def block_compose(seq: MapSequence, partition: BlockPartition, check: bool = True):
    """Group ``f_n`` into the double-block maps ``g_k``.

    ``g_k = f_{m_{2k}} o ... o f_{m_{2k-2}+1}``. All maps must fix 0. When
    ``check`` is set each block's derivative at 0 is compared with the
    product of the ``|f_n'(0)|`` and, for blocks of mu-sum at least 1, with
    ``e^{-1}``.
    """
    if not partition.double_blocks:
        raise ValueError("partition contains no complete double block")
    blocks = []
    for (start, end), mu_sum in zip(partition.double_blocks, partition.block_mu_sums):
        maps = list(seq.maps(start, end))
        for n, f in zip(range(start, end + 1), maps):
            if abs(complex(f.eval(0j))) > 1e-12:
                raise ContractViolation(f"f_{n} does not fix 0")
        g = ComposedMap(maps)
        if check:
            lam = math.prod(abs(complex(f.derivative(0j))) for f in maps)
            gd = abs(complex(g.derivative(0j)))
            if abs(gd - lam) > 1e-10:
                raise AssertionError(f"block {start}..{end}: |g'(0)|={gd} != {lam}")
            if mu_sum >= 1.0 and gd > math.exp(-1.0) + 1e-10:
                raise AssertionError(f"block {start}..{end}: |g'(0)|={gd} > 1/e")
        blocks.append(g)
    return MapSequence.from_table(blocks, name=f"blocks({seq.name})")


__all__ = [
    "BlockPartition",
    "CompositionState",
    "ContractionReport",
    "MapSequence",
    "advance",
    "block_compose",
    "block_partition",
    "contraction_report",
    "hyperbolic_density",
    "normalize",
    "run",
]
