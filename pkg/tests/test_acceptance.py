"""Acceptance criteria, one test each, at their stated tolerances.

Every test records one PASS/FAIL line; the lines are repeated in the
``acceptance criteria`` section of the pytest terminal summary.
"""

import cmath
import math
import time

import numpy as np
import pytest

from innerdyn.circle import TWO_PI, Arc, union_measure
from innerdyn.cli import execute
from innerdyn.composition import MapSequence, block_partition, run
from innerdyn.config import parse_config
from innerdyn.maps import FiniteBlaschke, arc_preimage
from innerdyn.presets import power_target, schemas
from innerdyn.statistics import (
    exact_hit_union,
    hit_count,
    hit_measure,
    sample_angles,
)
from innerdyn.targets import (
    TargetSequence,
    arc_mobius,
    branch_arcs,
    default_family,
    ex_nested_blaschke,
    ex_rotations,
    mobius_for_arc,
    nested_b,
    parabolic_map,
)


def _random_point(rng, rmax):
    return rmax * math.sqrt(rng.uniform()) * cmath.exp(2j * math.pi * rng.uniform())


def test_1_lowner_equality(criterion):
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(100):
        d = int(rng.integers(1, 5))
        zeros = [0j] + [_random_point(rng, 0.9) for _ in range(d - 1)]
        f = FiniteBlaschke(cmath.exp(2j * math.pi * rng.uniform()), zeros)
        for _ in range(100):
            arc = Arc(rng.uniform(0, TWO_PI), 0.5 * rng.uniform(0, TWO_PI))
            worst = max(worst, abs(union_measure(arc_preimage(f, arc)) - arc.length))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-9 and elapsed < 30
    criterion("1 Lowner equality", ok, f"max error {worst:.3g}, {elapsed:.1f} s")
    assert ok


def test_2_contracting_hit_counts(criterion):
    t0 = time.perf_counter()
    N = 100_000
    seq = MapSequence.autonomous(nested_b(0.5))
    target = power_target(0.0, 0.1)  # centred at the fixed point 1
    st = hit_count((seq, target), sample_angles(1, 200), [N])
    A = st.counts[:, -1]
    mean_ratio = float(np.mean(st.ratio()[:, -1]))
    elapsed = time.perf_counter() - t0
    ok = bool(np.all(A >= 1)) and 0.7 <= mean_ratio <= 1.3 and elapsed < 300
    criterion("2 contracting hit counts", ok,
              f"min A {A.min()}, mean A/phi {mean_ratio:.4f}, {elapsed:.1f} s")
    assert ok


def test_3_rotation_split(criterion):
    t0 = time.perf_counter()
    system = ex_rotations(M=1414)
    N = 1_000_000
    st = hit_count(system, [3 * math.pi / 2, 1.0], [N])
    lower, upper = int(st.counts[0, 0]), int(st.counts[1, 0])
    est = hit_measure(system, (1, N), 1000, seed=0)
    elapsed = time.perf_counter() - t0
    ok = lower == 0 and upper >= 1000 and 0.45 <= est.fraction <= 0.55 and elapsed < 120
    criterion("3 rotation split", ok,
              f"A(3pi/2) {lower}, A(1.0) {upper}, fraction {est.fraction}, {elapsed:.1f} s")
    assert ok


def test_4_nested_failure_bound(criterion):
    t0 = time.perf_counter()
    system = ex_nested_blaschke()
    est = hit_measure(system, (1000, 100_000), 2000, seed=5)
    eps = system.metadata["epsilon"](1000)
    elapsed = time.perf_counter() - t0
    ok = est.fraction <= 0.08 and elapsed < 300
    criterion("4 nested failure bound", ok,
              f"fraction {est.fraction}, epsilon/2pi {eps / TWO_PI:.5f}, {elapsed:.1f} s")
    assert ok


def test_5_branch_bound(criterion):
    t0 = time.perf_counter()
    system = ex_nested_blaschke()
    worst = -math.inf
    for n in range(1, 21):
        _, k = branch_arcs(system, n)
        worst = max(worst, k.length - 2 * default_family(n) * system.target.length(n))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-9 and elapsed < 60
    criterion("5 branch bound", ok, f"max |K_n| - 2 mu_n |I_n| = {worst:.3g}")
    assert ok


def test_6_arc_mobius_geometry(criterion):
    rng = np.random.default_rng(6)
    ls = math.pi - rng.uniform(0, math.pi, 1000)  # in (0, pi]
    identity_err = endpoint_err = 0.0
    for l in ls:
        a = mobius_for_arc(l)
        identity_err = max(identity_err, abs(math.sin(l / 2) * (1 + a * a) - (1 - a * a)))
        m = arc_mobius(l, verify=False)
        end = cmath.exp(0.5j * l)
        endpoint_err = max(endpoint_err, abs(m.eval(end) + 1j),
                           abs(m.eval(end.conjugate()) - 1j))
    ok = identity_err <= 1e-10 and endpoint_err <= 1e-10
    criterion("6 arc Mobius geometry", ok,
              f"identity {identity_err:.3g}, endpoints {endpoint_err:.3g}")
    assert ok


def test_7_parabolic_asymptotics(criterion):
    t0 = time.perf_counter()
    state = run(MapSequence.autonomous(parabolic_map()), 1_000_000)
    gap = 1.0 - state.orbit.real
    ratio = (1000.0 * gap[1_000_000]) / (math.sqrt(1e5) * gap[100_000])
    n_mu = 1e6 * (1.0 - state.lambdas[1_000_000 - 1])
    elapsed = time.perf_counter() - t0
    ok = 0.95 <= ratio <= 1.05 and 0.9 <= n_mu <= 1.1 and elapsed < 60
    criterion("7 parabolic asymptotics", ok,
              f"ratio {ratio:.6f}, n mu_n {n_mu:.6f}, {elapsed:.1f} s")
    assert ok


def test_8_block_partition(criterion):
    checks = [
        block_partition(np.ones(20), blocks=10).n[:10] == tuple(range(1, 11)),
        block_partition(np.full(20, 0.5), blocks=3).n[:3] == (2, 4, 6),
        block_partition(np.full(40, 0.3), blocks=2).n[:2] == (4, 7),
    ]
    worst = -math.inf
    rng = np.random.default_rng(8)
    for mu in [np.full(2000, 0.5), np.full(2000, 0.3), rng.uniform(0.01, 0.5, 5000),
               np.array([default_family(n) for n in range(1, 100_000)])]:
        part = block_partition(mu)
        for prod, s in zip(part.block_products, part.block_mu_sums):
            if s >= 1:
                worst = max(worst, prod - math.exp(-1))
    ok = all(checks) and worst <= 1e-10
    criterion("8 block partition", ok,
              f"examples {checks}, max heavy product - 1/e = {worst:.3g}")
    assert ok


def _small_system(rng):
    length = int(rng.integers(4, 9))
    maps = []
    for _ in range(length):
        d = int(rng.integers(1, 4))
        maps.append(FiniteBlaschke(cmath.exp(2j * math.pi * rng.uniform()),
                                   [_random_point(rng, 0.8) for _ in range(d)]))
    centers = rng.uniform(0, TWO_PI, length)
    halves = rng.uniform(0.02, 0.3, length)
    target = TargetSequence(lambda n: float(centers[n - 1]), [float(2 * h) for h in halves])
    return (MapSequence.from_table(maps), target), length


def test_9_monte_carlo_matches_exact(criterion):
    rng = np.random.default_rng(9)
    agree = 0
    for i in range(20):
        system, length = _small_system(rng)
        exact = union_measure(exact_hit_union(system, (1, length), budget=1 << 20)) / TWO_PI
        est = hit_measure(system, (1, length), 100_000, seed=1000 + i)
        sigma = math.sqrt(max(exact * (1 - exact), 0.0) / est.samples)
        agree += abs(est.fraction - exact) <= 3 * max(sigma, 1.0 / est.samples)
    ok = agree >= 19
    criterion("9 Monte Carlo vs exact", ok, f"{agree}/20 within 3 sigma")
    assert ok


SMALL_RUNS = {
    "theorem-c": "N = 2000\nsamples = 20\noverlap_max_n = 6\nmixing_max_n = 6",
    "theorem-d-blocks": "blocks = 6\nhorizon = 20000",
    "theorem-e-dw": "N = 30\nsamples = 20",
    "theorem-f-density": "N = 5000\nsamples = 10",
    "ex-rotations": "M = 60\nsamples = 50\ngrid = 4",
    "ex-nested": "window_start = 10\nwindow_end = 500\nsamples = 100\nbranch_max_n = 3",
    "ex-lengths": "horizon = 5000",
    "ex-conjugated": "N = 500\nsamples = 20\ntail_start = 250",
    "ex-rescaled": "N = 500\nsamples = 20\nearly_n = 10\nexpansion_n = 100",
    "ex-parabolic": "N = 2000",
    "custom": "window_end = 200\nsamples = 100\norbit_steps = 200",
}


def test_10_thread_count_reproducibility(criterion, tmp_path):
    differing = []
    for preset, body in SMALL_RUNS.items():
        outputs = []
        for threads in (1, 8):
            cfg = parse_config(f"preset = {preset}\nseed = 17\nthreads = {threads}\n{body}\n",
                               schemas())
            out = tmp_path / f"{preset}-{threads}"
            execute(cfg, out, log=lambda *_: None)
            outputs.append({p.name: p.read_bytes() for p in sorted(out.glob("*.csv"))})
        if not outputs[0] or outputs[0] != outputs[1]:
            differing.append(preset)
    ok = not differing
    criterion("10 thread-count reproducibility", ok,
              f"{len(SMALL_RUNS) - len(differing)}/{len(SMALL_RUNS)} presets byte-identical")
    assert ok
