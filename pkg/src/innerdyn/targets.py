"""Target sequences and the example map systems built around them."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .circle import TWO_PI, Arc
from ._kernels import StageTable
from .composition import MapSequence
from .errors import ConstructionError, DomainError, HorizonTooShort
from .maps import ComposedMap, FiniteBlaschke, MobiusAutomorphism, arc_preimage

Lengths = Union[Callable[[int], float], Sequence[float]]

# Prefix arrays are grown in chunks of at least this size.
_PREFIX_CHUNK = 4096
# Hypotheses stated for a whole sequence are checked on this initial stretch.
VALIDATION_HORIZON = 10_000


def default_family(n: int) -> float:
    """``min(1/2, 1/(sqrt(n) log(n+1)))``: divergent sum, summable square."""
    return min(0.5, 1.0 / (math.sqrt(n) * math.log(n + 1.0)))


def default_family_array(n: np.ndarray) -> np.ndarray:
    n = np.asarray(n, dtype=float)
    return np.minimum(0.5, 1.0 / (np.sqrt(n) * np.log(n + 1.0)))


def _as_rule(values: Lengths) -> Callable[[int], float]:
    if callable(values):
        return values
    values = tuple(float(v) for v in values)

    def rule(n):
        return values[n - 1]

    rule.limit = len(values)
    return rule


class _Prefix:
    # Lazily extended prefix sums of a 1-indexed rule.
    def __init__(self, rule: Callable[[int], float], vectorized=None):
        self.rule = rule
        self.vectorized = vectorized
        self.values = np.zeros(0)
        self.sums = np.zeros(0)

    def _grow(self, n: int):
        have = len(self.values)
        if n <= have:
            return
        upto = max(n, 2 * have, _PREFIX_CHUNK)
        limit = getattr(self.rule, "limit", None)
        if limit is not None:
            upto = min(upto, limit)
            if n > limit:
                raise IndexError(f"index {n} beyond table length {limit}")
        if self.vectorized is not None:
            new = np.asarray(self.vectorized(np.arange(have + 1, upto + 1)), dtype=float)
        else:
            new = np.array([self.rule(k) for k in range(have + 1, upto + 1)], dtype=float)
        base = self.sums[-1] if have else 0.0
        self.values = np.concatenate([self.values, new])
        self.sums = np.concatenate([self.sums, base + np.cumsum(new)])

    def value(self, n: int) -> float:
        self._grow(n)
        return float(self.values[n - 1])

    def upto(self, n: int) -> np.ndarray:
        self._grow(n)
        return self.values[:n]

    def total(self, n: int) -> float:
        if n <= 0:
            return 0.0
        self._grow(n)
        return float(self.sums[n - 1])


class TargetSequence:
    """Index ``n >= 1`` -> closed arc ``I_n`` (``None`` means empty).

    Built from a center rule and a length rule; prefix sums of ``|I_n|`` are
    cached. ``center_array`` and ``length_array``, if given, evaluate the
    same rules on an integer array and must agree with them.
    """

    def __init__(self, center: Union[float, Callable[[int], float]], lengths: Lengths,
                 name: str = "target", empty: bool = False,
                 center_array=None, length_array=None):
        if not callable(center):
            c = float(center)
            center = lambda n: c  # noqa: E731
            center_array = center_array or (lambda ns: np.full(len(ns), c))
        self._center = center
        self._center_array = center_array
        self._lengths = _Prefix(_as_rule(lengths), length_array)
        self.name = name
        self.empty = empty

    @classmethod
    def fixed(cls, arc: Arc, name: str = "fixed") -> "TargetSequence":
        return cls(arc.center, lambda n: arc.length, name=name)

    @classmethod
    def full_circle(cls) -> "TargetSequence":
        return cls(math.pi, lambda n: TWO_PI, name="full")

    @classmethod
    def nothing(cls) -> "TargetSequence":
        return cls(0.0, lambda n: 0.0, name="empty", empty=True)

    def __call__(self, n: int) -> Optional[Arc]:
        return self.arc(n)

    def arc(self, n: int) -> Optional[Arc]:
        if self.empty:
            return None
        return Arc(self._center(n), 0.5 * self.length(n))

    def center(self, n: int) -> float:
        return float(self._center(n))

    def centers(self, n: int) -> np.ndarray:
        """Centers of ``I_1, ..., I_n``."""
        if self._center_array is not None:
            return np.asarray(self._center_array(np.arange(1, n + 1)), dtype=float)
        return np.array([self._center(k) for k in range(1, n + 1)], dtype=float)

    def length(self, n: int) -> float:
        return 0.0 if self.empty else self._lengths.value(n)

    def lengths(self, n: int) -> np.ndarray:
        """``|I_1|, ..., |I_n|``."""
        if self.empty:
            return np.zeros(n)
        return self._lengths.upto(n).copy()

    def length_sum(self, n: int) -> float:
        return 0.0 if self.empty else self._lengths.total(n)

    def weighted_sum(self, mu: Callable[[int], float], n: int) -> float:
        """``sum_{k<=n} mu_k |I_k|``."""
        ks = np.arange(1, n + 1)
        m = np.array([mu(int(k)) for k in ks])
        return float(np.sum(m * self.lengths(n)))

    def shrinking_trend(self, n: int) -> bool:
        """Whether ``|I_k|`` visibly decreases over ``k <= n`` (evidence only)."""
        lens = self.lengths(n)
        if n < 10:
            return bool(lens[-1] < lens[0])
        tenth = max(n // 10, 1)
        return bool(lens[-tenth:].mean() < lens[:tenth].mean())


def nested_target(center: float, lengths: Lengths, check_upto: int = VALIDATION_HORIZON
                  ) -> TargetSequence:
    """Arcs of the given lengths all centred at angle ``center``."""
    rule = _as_rule(lengths)
    upto = min(check_upto, getattr(rule, "limit", check_upto))
    for n in range(1, upto + 1):
        v = rule(n)
        if not (0.0 < v <= TWO_PI):
            raise ConstructionError(f"length {v!r} at n={n} is outside (0, 2 pi]")
    return TargetSequence(center, rule, name="nested")


@dataclass(frozen=True)
class ExampleSystem:
    """Maps and target sharing index ``n``: a hit at step ``n`` means ``F_n(zeta) in I_n``."""

    name: str
    maps: MapSequence
    target: Optional[TargetSequence]
    verdict: str
    citation: str
    metadata: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# rotations


def rotation_block(n: int) -> tuple[int, int]:
    """Flat index ``n = m(m-1)/2 + 1 + k`` -> ``(m, k)`` with ``0 <= k < m``."""
    if n < 1:
        raise ValueError("index must be >= 1")
    j = n - 1
    m = (1 + math.isqrt(8 * j + 1)) // 2
    while m * (m - 1) // 2 > j:
        m -= 1
    while (m + 1) * m // 2 <= j:
        m += 1
    return m, j - m * (m - 1) // 2


def rotation_index(m: int, k: int) -> int:
    return m * (m - 1) // 2 + 1 + k


def rotation_blocks(ns: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised :func:`rotation_block`."""
    j = np.asarray(ns, dtype=np.int64) - 1
    m = ((1.0 + np.sqrt(8.0 * j + 1.0)) // 2).astype(np.int64)
    m -= m * (m - 1) // 2 > j
    m += (m + 1) * m // 2 <= j
    return m, j - m * (m - 1) // 2


def _rotation_angle(n: int) -> float:
    if n == 0:
        return 0.0
    m, k = rotation_block(n)
    return math.pi * (k + 1) / m


def ex_rotations(M: Optional[int] = None) -> ExampleSystem:
    """Rotations with ``F_n = R_{m,k}``, ``R_{m,k}(z) = e^{pi i (k+1)/m} z``.

    The target at flat index ``n`` is ``I_m = {pi <= theta <= pi + pi/m}``.
    Orbits from the upper half circle hit it infinitely often, orbits from
    the open lower half never do.
    """
    length = None if M is None else M * (M + 1) // 2

    def rule(n):
        return FiniteBlaschke.rotation(_rotation_angle(n) - _rotation_angle(n - 1))

    def center(n):
        m, _ = rotation_block(n)
        return math.pi + 0.5 * math.pi / m

    def lengths(n):
        return math.pi / rotation_block(n)[0]

    def angles(ns):
        m, k = rotation_blocks(ns)
        return math.pi * (k + 1) / m

    def table(n_steps):
        ns = np.arange(1, n_steps + 1)
        total = angles(ns)
        step = total - np.concatenate([[0.0], total[:-1]])
        return StageTable(
            np.exp(1j * step), np.zeros((n_steps, 1), dtype=complex),
            np.ones(n_steps, dtype=np.int64), np.arange(n_steps + 1, dtype=np.int64),
        )

    target = TargetSequence(
        center, lengths, name="rotation-targets",
        center_array=lambda ns: math.pi + 0.5 * math.pi / rotation_blocks(ns)[0],
        length_array=lambda ns: math.pi / rotation_blocks(ns)[0],
    )
    return ExampleSystem(
        name="ex-rotations",
        maps=MapSequence(rule, name="rotations", length=length, table_builder=table),
        target=target,
        verdict="split: hits for theta in [0, pi], fails for theta in (pi, 2 pi)",
        citation="R_{m,k}(z) = e^{pi i (k+1)/m} z, n = m(m-1)/2 + 1 + k",
        metadata={"M": M, "total_rotation": _rotation_angle},
    )


def rotation_hit_oracle(theta: float, m: int) -> list[int]:
    """Values of ``k`` with ``e^{i theta}`` in ``I_{m,k}``.

    ``I_{m,k} = {pi - pi(k+1)/m <= theta <= pi - pi k/m}``.
    """
    out = []
    for k in range(m):
        lo = math.pi - math.pi * (k + 1) / m
        hi = math.pi - math.pi * k / m
        if lo - 1e-12 <= theta <= hi + 1e-12:
            out.append(k)
    return out


# ---------------------------------------------------------------------------
# nested-target Blaschke system


def nested_b(lam: float) -> FiniteBlaschke:
    """``b(z) = z (z + lam) / (1 + lam z)``."""
    return FiniteBlaschke(1.0, (0j, complex(-lam)))


def _check_hypotheses(mu_rule, l_rule, upto=VALIDATION_HORIZON):
    upto = min(upto, getattr(mu_rule, "limit", upto), getattr(l_rule, "limit", upto))
    prev = math.inf
    for n in range(1, upto + 1):
        m, l = mu_rule(n), l_rule(n)
        if not 0.0 < m <= 0.5:
            raise ConstructionError(f"hypothesis 0 < mu_n <= 1/2 fails at n={n} (mu={m!r})")
        if not 0.0 < l <= 0.5:
            raise ConstructionError(f"hypothesis 0 < l_n <= 1/2 fails at n={n} (l={l!r})")
        if l > prev:
            raise ConstructionError(f"hypothesis l_n non-increasing fails at n={n}")
        prev = l


def epsilon_bound(mu: Lengths, lengths: Lengths, N: int, horizon: int = 10_000_000,
                  tail: Optional[Callable[[int], float]] = None) -> float:
    """``2 sum_{n>=N} mu_n l_n + l_N``.

    The sum is taken exactly over ``N <= n < horizon``; ``tail(horizon)``
    bounds the rest (omitted when ``tail`` is None). For the default family
    pass :func:`default_tail`.
    """
    mu_rule, l_rule = _as_rule(mu), _as_rule(lengths)
    if mu_rule is default_family and l_rule is default_family:
        n = np.arange(N, horizon, dtype=float)
        vals = default_family_array(n) ** 2
    else:
        vals = np.array([mu_rule(k) * l_rule(k) for k in range(N, horizon)])
    s = math.fsum(vals.tolist())
    if tail is not None:
        s += tail(horizon)
    return 2.0 * s + l_rule(N)


def default_tail(horizon: int) -> float:
    """Bound for ``sum_{n>=horizon} 1/(n log^2(n+1))``: ``1/log(horizon-1)``."""
    return 1.0 / math.log(horizon - 1.0)


def ex_nested_blaschke(mu: Lengths = default_family, lengths: Lengths = default_family
                       ) -> ExampleSystem:
    """``b_n(z) = z (z + lambda_n)/(1 + lambda_n z)``, ``lambda_n = 1 - mu_n``,
    with nested arcs at 1 of length ``l_n``; almost every orbit fails to hit."""
    mu_rule, l_rule = _as_rule(mu), _as_rule(lengths)
    _check_hypotheses(mu_rule, l_rule)
    seq = MapSequence(lambda n: nested_b(1.0 - mu_rule(n)), name="nested-b")
    target = TargetSequence(0.0, l_rule, name="nested-at-1")
    is_default = mu_rule is default_family and l_rule is default_family

    def epsilon(N, horizon=10_000_000):
        return epsilon_bound(mu_rule, l_rule, N, horizon,
                             tail=default_tail if is_default else None)

    return ExampleSystem(
        name="ex-nested",
        maps=seq,
        target=target,
        verdict="fails a.e.",
        citation="b_n(z) = z (z + lambda_n)/(1 + lambda_n z); sum mu_n l_n < infinity",
        metadata={"mu": mu_rule, "lengths": l_rule, "epsilon": epsilon},
    )


def branch_arcs(system: ExampleSystem, n: int) -> tuple[Arc, Arc]:
    """Split ``b_n^{-1}(I_n)`` into the branch ``J_n`` near 1 and ``K_n`` near -1."""
    pre = arc_preimage(system.maps(n), system.target.arc(n))
    arcs = pre.arcs
    if len(arcs) != 2:
        raise ValueError(f"expected two preimage arcs at n={n}, found {len(arcs)}")
    j = min(arcs, key=lambda a: min(a.center, TWO_PI - a.center))
    k = arcs[1] if arcs[0] is j else arcs[0]
    return j, k


# ---------------------------------------------------------------------------
# lengths from a mu sequence


@dataclass(frozen=True)
class LengthConstruction:
    """Indices ``n_0 = 1 < n_1 < ... < n_K`` and ``l_n = 1/(n_{k+1} - n_k)``
    on ``[n_k, n_{k+1})``; ``lengths[i]`` is ``l_{i+1}`` for ``i < n_K - 1``."""

    indices: tuple
    lengths: np.ndarray
    mu_at_indices: tuple
    horizon: int

    def length(self, n: int) -> float:
        return float(self.lengths[n - 1])


def ex_lengths_from_mu(mu: Lengths, horizon: int, cap: float = 10.0, growth: float = 2.0,
                       initial_gap: int = 2) -> LengthConstruction:
    """Greedy choice of ``n_k`` making ``l`` decreasing with unit block sums.

    Each ``n_k`` (``k >= 1``) dominates every later ``mu_n`` within the
    horizon, consecutive gaps strictly increase (each at least ``growth``
    times the previous), and ``sum_{k>=1} mu_{n_k}`` stays below ``cap``.
    """
    rule = _as_rule(mu)
    vals = np.array([rule(n) for n in range(1, horizon + 1)], dtype=float)
    # records[i]: mu at index i+1 is >= every later value within the horizon
    suffix_max = np.maximum.accumulate(vals[::-1])[::-1]
    records = np.flatnonzero(vals >= suffix_max) + 1
    indices = [1]
    mus = []
    need = initial_gap
    total = 0.0
    while True:
        lo = indices[-1] + need
        pos = int(np.searchsorted(records, lo, side="left"))
        if pos >= len(records):
            break
        nxt = int(records[pos])
        m = float(vals[nxt - 1])
        if total + m >= cap:
            break
        total += m
        gap = nxt - indices[-1]
        indices.append(nxt)
        mus.append(m)
        need = max(gap + 1, int(math.ceil(growth * gap)))
    if len(indices) < 3:
        raise HorizonTooShort(
            f"horizon {horizon} builds fewer than 2 blocks", partial=tuple(indices)
        )
    lengths = np.empty(indices[-1] - 1)
    for a, b in zip(indices[:-1], indices[1:]):
        lengths[a - 1:b - 1] = 1.0 / (b - a)
    return LengthConstruction(tuple(indices), lengths, tuple(mus), horizon)


# ---------------------------------------------------------------------------
# conjugated systems

LEFT_HALF = Arc(math.pi, 0.5 * math.pi)


def mobius_for_arc(l: float) -> float:
    """Parameter ``a`` of the involution ``M(z) = (a - z)/(1 - a z)`` sending
    the arc of length ``l`` centred at 1 onto the left half circle."""
    if not 0.0 < l <= math.pi:
        raise DomainError(f"arc length must lie in (0, pi], got {l!r}")
    return math.cos(0.5 * l) / (1.0 + math.sin(0.5 * l))


def arc_mobius(l: float, verify: bool = True) -> MobiusAutomorphism:
    """The involution ``z -> (a - z)/(1 - a z)``, ``a = mobius_for_arc(l)``."""
    a = mobius_for_arc(l)
    m = MobiusAutomorphism(-a, -1.0)
    if verify:
        end = complex(math.cos(0.5 * l), math.sin(0.5 * l))
        # Rounding of the endpoint is amplified by |M'| ~ 2/l on the circle.
        tol = 1e-12 * max(1.0, abs(m.derivative(end)))
        if abs(m.eval(end) + 1j) > tol or abs(m.eval(end.conjugate()) - 1j) > tol:
            raise ConstructionError(f"arc Mobius map misplaces the endpoints for l={l!r}")
    return m


def _conjugated(name, mu_rule, arc_lengths, verdict, citation, metadata):
    movers = {}

    def mover(n):
        if n == 0:
            return MobiusAutomorphism.identity()
        if n not in movers:
            if len(movers) > 1 << 16:
                movers.clear()
            movers[n] = arc_mobius(arc_lengths(n))
        return movers[n]

    def rule(n):
        return ComposedMap((mover(n - 1).inverse(), nested_b(1.0 - mu_rule(n)), mover(n)))

    meta = dict(metadata)
    meta["mover"] = mover
    meta["a"] = lambda n: mobius_for_arc(arc_lengths(n))
    return ExampleSystem(
        name=name,
        maps=MapSequence(rule, name=name),
        target=TargetSequence.fixed(LEFT_HALF, name="left-half"),
        verdict=verdict,
        citation=citation,
        metadata=meta,
    )


def ex_conjugated(mu: Lengths = default_family, lengths: Lengths = default_family
                  ) -> ExampleSystem:
    """``f_n = M_n o b_n o M_{n-1}^{-1}`` with ``M_n(I_n)`` the left half circle."""
    mu_rule, l_rule = _as_rule(mu), _as_rule(lengths)
    _check_hypotheses(mu_rule, l_rule)
    return _conjugated(
        "ex-conjugated", mu_rule, l_rule,
        verdict="contracting, yet F_n(zeta) in I finitely often a.e.",
        citation="f_n = M_n o b_n o M_{n-1}^{-1}",
        metadata={"mu": mu_rule, "lengths": l_rule},
    )


def ex_rescaled(mu: Lengths = default_family, lengths: Lengths = default_family
                ) -> ExampleSystem:
    """As :func:`ex_conjugated` but ``M_n`` is built from the sub-arc of
    length ``l_n / t_n``, ``t_n = l_1 + ... + l_n``."""
    mu_rule, l_rule = _as_rule(mu), _as_rule(lengths)
    _check_hypotheses(mu_rule, l_rule)
    prefix = _Prefix(l_rule)

    def t(n):
        return prefix.total(n)

    def shrunk(n):
        return l_rule(n) / t(n)

    return _conjugated(
        "ex-rescaled", mu_rule, shrunk,
        verdict="Denjoy-Wolff set full measure",
        citation="|I_n|/t_n, t_n = |I_1| + ... + |I_n|",
        metadata={"mu": mu_rule, "lengths": l_rule, "t": t, "shrunk_length": shrunk},
    )


# ---------------------------------------------------------------------------
# parabolic square


def parabolic_map() -> FiniteBlaschke:
    """``f(z) = ((z + 1/3)/(1 + z/3))^2``: parabolic fixed point at 1."""
    return FiniteBlaschke(1.0, (-1.0 / 3.0, -1.0 / 3.0))


def ex_parabolic() -> ExampleSystem:
    f = parabolic_map()
    return ExampleSystem(
        name="ex-parabolic",
        maps=MapSequence.autonomous(f, name="parabolic"),
        target=None,
        verdict="dense boundary orbits a.e.; 1 - f^n(0) ~ n^{-1/2}, mu_n ~ 1/n",
        citation="f(z) = ((z+1/3)/(1+z/3))^2",
        metadata={"map": f},
    )
