"""Experiment presets: parameter schemas, runners and measured metrics.

Each runner takes the validated parameter dict and returns CSV tables plus a
flat dict of measured metrics. Pass/fail thresholds are not decided here;
they come from ``assert_*`` keys in the configuration.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .circle import TWO_PI, Arc
from .composition import MapSequence, block_compose, block_partition, contraction_report, run
from .config import Param
from .maps import FiniteBlaschke
from .report import Table
from .statistics import (
    density_profiles,
    dw_profile,
    hit_count,
    hit_measure,
    mixing_defect,
    overlap_profile,
    sample_angles,
    wilson_interval,
)
from .targets import (
    LEFT_HALF,
    TargetSequence,
    branch_arcs,
    default_family,
    default_family_array,
    ex_conjugated,
    ex_lengths_from_mu,
    ex_nested_blaschke,
    ex_parabolic,
    ex_rescaled,
    ex_rotations,
    nested_b,
    rotation_index,
)

SHADOWING_NOTE = ("orbits are double precision; only statistics over many starting "
                  "points are meaningful, not individual long orbits")


@dataclass
class PresetResult:
    tables: list
    metrics: dict
    info: dict = field(default_factory=dict)


@dataclass(frozen=True)
class Preset:
    name: str
    citation: str
    summary: str
    params: dict
    metrics: tuple
    runner: Callable[[dict], PresetResult]


# --- shared helpers --------------------------------------------------------

FAMILIES = ("default", "constant", "harmonic", "log")


def family(name: str, value: float = 0.5):
    """``(rule, array_rule)`` for a named positive sequence."""
    if name == "default":
        return default_family, default_family_array
    if name == "constant":
        return (lambda n: value), (lambda ns: np.full(len(ns), value, dtype=float))
    if name == "harmonic":
        return (lambda n: 1.0 / (n + 1.0)), (lambda ns: 1.0 / (np.asarray(ns, float) + 1.0))
    if name == "log":
        return ((lambda n: 1.0 / math.log(n + 2.0)),
                (lambda ns: 1.0 / np.log(np.asarray(ns, float) + 2.0)))
    raise ValueError(f"unknown family {name!r}")


def checkpoints(N: int, count: int, start: int = 10) -> np.ndarray:
    """Roughly log-spaced integers in ``[min(start, N), N]`` ending at ``N``."""
    lo = min(start, N)
    pts = np.unique(np.round(np.logspace(math.log10(lo), math.log10(N), max(count, 1))))
    pts = pts.astype(np.int64)
    pts = pts[(pts >= 1) & (pts <= N)]
    if len(pts) == 0 or pts[-1] != N:
        pts = np.append(pts, N)
    return pts


def power_target(center: float, exponent: float, scale: float = 1.0) -> TargetSequence:
    return TargetSequence(
        center, lambda n: scale * float(n) ** -exponent, name="power-target",
        length_array=lambda ns: scale * np.asarray(ns, dtype=float) ** -exponent,
    )


def measure_row(window, est):
    return [window[0], window[1], est.samples, est.hits, est.fraction, est.ci_low, est.ci_high]


MEASURE_COLUMNS = ["window_start", "window_end", "samples", "hits", "fraction", "ci_low",
                   "ci_high"]
MEASURE_NOTES = {
    "fraction": "share of sampled theta0 whose orbit enters I_n for some n in the window",
    "ci_low": "95% Wilson interval",
}


# --- theorem-c -------------------------------------------------------------

def run_theorem_c(p: dict) -> PresetResult:
    lam, N = p["lambda"], p["N"]
    seq = MapSequence.autonomous(nested_b(lam), name=f"b(lambda={lam})")
    target = power_target(p["center"], p["length_exponent"])
    cps = checkpoints(N, p["checkpoints"])
    thetas = sample_angles(p["seed"], p["samples"])
    st = hit_count((seq, target), thetas, cps, threads=p["threads"])
    ratio = st.ratio()
    rows = []
    for i, th in enumerate(thetas):
        for j, c in enumerate(cps):
            rows.append([i, th, int(c), int(st.counts[i, j]), st.phi[j], ratio[i, j]])
    hits = Table("hits", ["sample", "theta0", "N", "A", "phi", "ratio"], rows,
                 comments=["uniformly contracting centred map with a shrinking target",
                           SHADOWING_NOTE],
                 column_notes={"A": "#{n <= N : theta_n in I_n}",
                               "phi": "sum_{n<=N} |I_n| / 2 pi", "ratio": "A / phi"})
    final = st.counts[:, -1]
    n_hit = int(np.count_nonzero(final >= 1))
    lo, hi = wilson_interval(n_hit, len(thetas))
    summary = Table("summary", ["N", "phi", "mean_A", "min_A", "mean_ratio", "fraction",
                                "ci_low", "ci_high"],
                    [[int(c), st.phi[j], float(np.mean(st.counts[:, j])),
                      int(np.min(st.counts[:, j])), float(np.mean(ratio[:, j])),
                      *((n_hit / len(thetas), lo, hi) if j == len(cps) - 1 else
                        (float(np.mean(st.counts[:, j] >= 1)), math.nan, math.nan))]
                     for j, c in enumerate(cps)],
                    comments=["per-checkpoint sample aggregates"])
    tables = [hits, summary]
    metrics = {"min_A": int(final.min()), "mean_ratio": float(np.mean(ratio[:, -1])),
               "fraction": n_hit / len(thetas)}
    # Exact overlap and mixing on a fixed arc: small windows only.
    fixed = TargetSequence.fixed(Arc(p["center"], 0.5 * p["fixed_arc_length"]))
    if p["overlap_max_n"] > 1:
        recs = overlap_profile((seq, fixed), 1, p["overlap_max_n"])
        tables.append(Table(
            "overlap", ["m", "n", "lhs", "product", "excess", "excess_ratio"],
            [[r.m, r.n, r.lhs, r.rhs_product_term, r.excess, r.excess_ratio] for r in recs],
            comments=["exact preimages of a fixed arc E_n = F_n^{-1}(I)"],
            column_notes={"lhs": "|E_m cap E_n| / 2 pi",
                          "product": "(|E_m| / 2 pi)(|E_n| / 2 pi)",
                          "excess_ratio": "excess / |E_n|"}))
        metrics["overlap_excess_ratio_last"] = abs(recs[-1].excess_ratio)
        metrics["overlap_excess_ratio_first"] = abs(recs[0].excess_ratio)
    if p["mixing_max_n"] >= 1:
        arc = Arc(p["center"], 0.5 * p["fixed_arc_length"])
        defects = [(n, mixing_defect(seq, n, arc, arc)) for n in range(1, p["mixing_max_n"] + 1)]
        tables.append(Table("mixing", ["n", "defect"], [list(d) for d in defects],
                            comments=["A = E = the fixed arc"],
                            column_notes={"defect": "| |A cap F_n^{-1}(E)|/|E| - |A|/2 pi |"}))
        metrics["mixing_defect_final"] = defects[-1][1]
    return PresetResult(tables, metrics)


# --- theorem-d-blocks ------------------------------------------------------

def run_theorem_d_blocks(p: dict) -> PresetResult:
    horizon = p["horizon"]
    ns = np.arange(1, horizon + 1)
    _, mu_arr = family(p["mu_family"], p["mu_value"])
    _, len_arr = family(p["length_family"], p["length_value"])
    mu = mu_arr(ns)
    lengths = len_arr(ns)
    part = block_partition(mu, lengths, variant=p["variant"], blocks=p["blocks"])
    seq = MapSequence(lambda n: nested_b(1.0 - float(mu[n - 1])), name="centred-b")
    blocks = block_compose(seq, part, check=True)
    b_rows = []
    for k in range(len(part.m)):
        a, b = part.n[k], part.n[k + 1]
        b_rows.append([k + 1, a, part.m[k], float(np.sum(mu[a - 1:b - 1])),
                       float(lengths[part.m[k] - 1]), float(mu[part.m[k] - 1])])
    d_rows, mismatch = [], 0.0
    for j, ((s, e), prod, msum) in enumerate(
            zip(part.double_blocks, part.block_products, part.block_mu_sums), start=1):
        gd = abs(complex(blocks(j).derivative(0j)))
        mismatch = max(mismatch, abs(gd - prod))
        d_rows.append([j, s, e, msum, prod, gd])
    heavy = [pr for pr, ms in zip(part.block_products, part.block_mu_sums) if ms >= 1.0]
    tables = [
        Table("blocks", ["k", "n_k", "m_k", "block_mu_sum", "length_at_m", "mu_at_m"], b_rows,
              comments=[f"variant {p['variant']}: n_k least index with mu_1 + ... + mu_n in [k, k+1)"]),
        Table("double_blocks", ["j", "start", "end", "mu_sum", "lambda_product", "abs_g_prime_0"],
              d_rows, comments=["g_j composes f_start .. f_end; centred maps b_n"]),
    ]
    metrics = {
        "blocks": len(part.m),
        "max_block_mu_sum": max(r[3] for r in b_rows),
        "max_heavy_product": max(heavy) if heavy else 0.0,
        "derivative_mismatch": mismatch,
        "length_sum_at_m": float(sum(r[4] for r in b_rows)),
    }
    return PresetResult(tables, metrics, {"n_k": list(part.n), "m_k": list(part.m)})


# --- theorem-e-dw ----------------------------------------------------------

def run_theorem_e_dw(p: dict) -> PresetResult:
    a, N = p["a"], p["N"]
    f = FiniteBlaschke(1.0, (complex(-a),) * p["degree"])
    seq = MapSequence.autonomous(f, name="power-map")
    thetas = sample_angles(p["seed"], p["samples"])
    d = dw_profile(seq, thetas, N, threads=p["threads"])
    state = run(seq, N)
    med = np.median(d, axis=0)
    rows = [[n, state.one_minus_abs[n], med[n - 1], float(np.mean(d[:, n - 1])),
             float(np.max(d[:, n - 1]))] for n in range(1, N + 1)]
    table = Table("dw", ["n", "one_minus_abs", "median_d", "mean_d", "max_d"], rows,
                  comments=[f"f(z) = ((z + {a!r})/(1 + {a!r} z))^{p['degree']}", SHADOWING_NOTE],
                  column_notes={"median_d": "median over samples of |F_n(e^{i theta0}) - F_n(0)|",
                                "one_minus_abs": "1 - |F_n(0)|"})
    early = max(1, min(p["early_n"], N))
    metrics = {"median_d_final": float(med[-1]),
               "median_d_ratio": float(med[-1] / med[early - 1]) if med[early - 1] > 0 else math.inf,
               "one_minus_abs_final": float(state.one_minus_abs[-1])}
    return PresetResult([table], metrics)


# --- theorem-f-density -----------------------------------------------------

def _density_map(p):
    if p["map"] == "b":
        return nested_b(p["lambda"])
    if p["map"] == "rotation":
        return FiniteBlaschke.rotation(p["angle"])
    return ex_parabolic().metadata["map"]


def run_theorem_f_density(p: dict) -> PresetResult:
    f = _density_map(p)
    seq = MapSequence.autonomous(f, name=p["map"])
    thetas = sample_angles(p["seed"], p["samples"])
    profs = density_profiles(seq, thetas, p["N"], p["cells"], threads=p["threads"])
    rows = [[i, th, pr.min_visits, pr.cells_visited] for i, (th, pr) in
            enumerate(zip(thetas, profs))]
    table = Table("density", ["sample", "theta0", "min_visits", "cells_visited"], rows,
                  comments=[f"{p['cells']} equal cells, orbit window 1..{p['N']}", SHADOWING_NOTE])
    mins = np.array([pr.min_visits for pr in profs])
    metrics = {"fraction_dense": float(np.mean(mins >= 1)),
               "min_min_visits": int(mins.min()),
               "mean_cells_visited": float(np.mean([pr.cells_visited for pr in profs]))}
    return PresetResult([table], metrics)


# --- ex-rotations ----------------------------------------------------------

def run_ex_rotations(p: dict) -> PresetResult:
    M = p["M"]
    system = ex_rotations(M)
    N = rotation_index(M, M - 1)
    grid = p["grid"]
    thetas = list(p["thetas"]) + [TWO_PI * (j + 0.5) / grid for j in range(grid)]
    thetas = np.array([t % TWO_PI for t in thetas])
    st = hit_count(system, thetas, [N], threads=p["threads"])
    rows, lower, upper = [], [], []
    for th, A, first in zip(thetas, st.counts[:, 0], st.first_hit):
        half = "upper" if th <= math.pi else "lower"
        (upper if half == "upper" else lower).append(int(A))
        rows.append([th, half, int(A), int(first), st.phi[0]])
    tables = [Table("hits", ["theta0", "half", "A", "first_hit", "phi"], rows,
                    comments=[f"F_n = R_(m,k), m <= {M}, N = {N}",
                              "upper: theta0 in [0, pi]; lower: theta0 in (pi, 2 pi)"],
                    column_notes={"first_hit": "-1 when the orbit never enters I_n"})]
    metrics = {"max_lower_A": max(lower) if lower else 0,
               "min_upper_A": min(upper) if upper else 0}
    if p["samples"] > 0:
        est = hit_measure(system, (1, N), p["samples"], p["seed"], threads=p["threads"])
        tables.append(Table("measure", MEASURE_COLUMNS, [measure_row((1, N), est)],
                            column_notes=MEASURE_NOTES))
        metrics["fraction"] = est.fraction
    return PresetResult(tables, metrics)


# --- ex-nested -------------------------------------------------------------

def run_ex_nested(p: dict) -> PresetResult:
    system = ex_nested_blaschke()
    if p["target_center"] != 0.0:
        system = dataclasses.replace(
            system,
            target=TargetSequence(p["target_center"], default_family, name="nested",
                                  length_array=default_family_array),
            verdict="not asserted (exploratory alignment)")
    window = (p["window_start"], p["window_end"])
    est = hit_measure(system, window, p["samples"], p["seed"], threads=p["threads"])
    eps = system.metadata["epsilon"](window[0])
    tables = [Table("measure", MEASURE_COLUMNS + ["epsilon", "epsilon_over_2pi"],
                    [measure_row(window, est) + [eps, eps / TWO_PI]],
                    comments=["b_n(z) = z (z + lambda_n)/(1 + lambda_n z), "
                              "mu_n = l_n = min(1/2, 1/(sqrt(n) log(n+1)))",
                              f"target centre {p['target_center']!r}", SHADOWING_NOTE],
                    column_notes=dict(MEASURE_NOTES, epsilon="2 sum_{n>=N0} mu_n l_n + l_N0"))]
    metrics = {"fraction": est.fraction, "ci_high": est.ci_high, "epsilon_over_2pi": eps / TWO_PI}
    if p["branch_max_n"] > 0 and p["target_center"] == 0.0:
        rows, worst = [], -math.inf
        for n in range(1, p["branch_max_n"] + 1):
            j, k = branch_arcs(system, n)
            mu, ln = default_family(n), system.target.length(n)
            bound = 2.0 * mu * ln
            worst = max(worst, k.length - bound)
            rows.append([n, mu, ln, j.length, k.length, bound])
        tables.append(Table("branches", ["n", "mu", "length", "J", "K", "bound"], rows,
                            comments=["b_n^{-1}(I_n) = J_n (near 1) + K_n (near -1)"],
                            column_notes={"bound": "2 mu_n |I_n|"}))
        metrics["max_branch_excess"] = worst
    return PresetResult(tables, metrics, {"epsilon": eps})


# --- ex-lengths ------------------------------------------------------------

def run_ex_lengths(p: dict) -> PresetResult:
    rule, arr = family(p["mu_family"], p["mu_value"])
    lc = ex_lengths_from_mu(arr(np.arange(1, p["horizon"] + 1)), p["horizon"], cap=p["cap"],
                            growth=p["growth"], initial_gap=p["initial_gap"])
    mu = arr(np.arange(1, lc.indices[-1] + 1))
    rows, err, ratio = [], 0.0, 0.0
    for k, (a, b) in enumerate(zip(lc.indices[:-1], lc.indices[1:])):
        ls = float(np.sum(lc.lengths[a - 1:b - 1]))
        ml = float(np.sum(mu[a - 1:b - 1] * lc.lengths[a - 1:b - 1]))
        err = max(err, abs(ls - 1.0))
        ratio = max(ratio, ml / mu[a - 1])
        rows.append([k, a, b - a, float(mu[a - 1]), 1.0 / (b - a), ls, ml])
    table = Table("blocks", ["k", "n_k", "gap", "mu_at_n_k", "l_value", "block_l_sum",
                             "block_mu_l_sum"], rows,
                  comments=[f"greedy indices, cap {p['cap']!r}, growth {p['growth']!r}"])
    dl = np.diff(lc.lengths)
    metrics = {"blocks": len(rows), "max_block_sum_error": err,
               "max_l_increase": float(dl.max()) if len(dl) else 0.0,
               "max_mu_l_over_mu_nk": ratio, "mu_nk_sum": float(sum(lc.mu_at_indices))}
    return PresetResult([table], metrics, {"n_k": list(lc.indices)})


# --- ex-conjugated / ex-rescaled ------------------------------------------

def run_ex_conjugated(p: dict) -> PresetResult:
    system = ex_conjugated()
    N = p["N"]
    state = run(system.maps, N)
    ns = np.arange(1, N + 1)
    a = np.array([system.metadata["a"](int(n)) for n in ns])
    orbit = state.orbit[1:]
    mu = default_family_array(ns)
    oma = state.one_minus_abs[1:]
    cum, cum_w = np.cumsum(oma), np.cumsum(mu * oma)
    cps = checkpoints(N, p["checkpoints"], start=1)
    rows = [[int(n), a[n - 1], orbit[n - 1].real, oma[n - 1], cum[n - 1], cum_w[n - 1]]
            for n in cps]
    tables = [Table("orbit", ["n", "a_n", "re_F_n0", "one_minus_abs", "sum_one_minus_abs",
                              "sum_mu_one_minus_abs"], rows,
                    comments=["f_n = M_n o b_n o M_(n-1)^{-1}, M_n(z) = (a_n - z)/(1 - a_n z)"])]
    tail = max(1, min(p["tail_start"], N))
    thetas = sample_angles(p["seed"], p["samples"])
    marks = sorted({tail - 1, N} - {0})
    st = hit_count(system, thetas, marks, threads=p["threads"])
    before = st.counts[:, 0] if len(marks) == 2 else np.zeros(len(thetas), dtype=np.int64)
    tail_hits = st.counts[:, -1] - before
    tables.append(Table("visits", ["sample", "theta0", "A_N", "tail_hits", "first_hit"],
                        [[i, th, int(st.counts[i, -1]), int(tail_hits[i]), int(st.first_hit[i])]
                         for i, th in enumerate(thetas)],
                        comments=[f"target: left half circle; tail window {tail}..{N}",
                                  SHADOWING_NOTE]))
    metrics = {
        "max_orbit_error": float(np.max(np.abs(orbit - a))),
        "max_lambda_error": float(np.max(np.abs(state.lambdas - (1.0 - mu)))),
        "fraction_no_tail_hits": float(np.mean(tail_hits == 0)),
        "sum_one_minus_abs": float(cum[-1]),
        "sum_mu_one_minus_abs": float(cum_w[-1]),
    }
    return PresetResult(tables, metrics)


def run_ex_rescaled(p: dict) -> PresetResult:
    system = ex_rescaled()
    N = p["N"]
    thetas = sample_angles(p["seed"], p["samples"])
    d = dw_profile(system.maps, thetas, N, threads=p["threads"])
    state = run(system.maps, N)
    med = np.median(d, axis=0)
    t, shrunk = system.metadata["t"], system.metadata["shrunk_length"]
    cps = checkpoints(N, p["checkpoints"], start=1)
    rows = [[int(n), t(int(n)), shrunk(int(n)), state.one_minus_abs[n], med[n - 1],
             float(np.mean(d[:, n - 1]))] for n in cps]
    tables = [Table("dw", ["n", "t_n", "shrunk_length", "one_minus_abs", "median_d", "mean_d"],
                    rows, comments=["arcs of length l_n / t_n, t_n = l_1 + ... + l_n",
                                    SHADOWING_NOTE],
                    column_notes={"median_d": "median of |F_n(e^{i theta0}) - F_n(0)|"})]
    early = max(1, min(p["early_n"], N))
    # Image of the unshrunk arc I_n under the arc map built from the shrunk one.
    n_chk = max(1, min(p["expansion_n"], N))
    mover = system.metadata["mover"](n_chk)
    half = 0.5 * default_family(n_chk)
    w = complex(mover.eval(complex(math.cos(half), math.sin(half))))
    phi = abs(math.atan2(w.imag, w.real))
    metrics = {"median_d_final": float(med[-1]),
               "median_d_ratio": float(med[-1] / med[early - 1]) if med[early - 1] > 0 else math.inf,
               "expanded_fraction": 1.0 - phi / math.pi,
               "sum_shrunk_length": float(sum(shrunk(n) for n in range(1, N + 1)))}
    return PresetResult(tables, metrics)


# --- ex-parabolic ----------------------------------------------------------

def run_ex_parabolic(p: dict) -> PresetResult:
    system = ex_parabolic()
    N, k = p["N"], p["rows"]
    state = run(system.maps, N)
    ns = sorted({max(1, (N * j) // k) for j in range(1, k + 1)})
    rows = [[n, state.one_minus_abs[n], math.sqrt(n) * state.one_minus_abs[n],
             n * state.mus[n - 1]] for n in ns]
    table = Table("orbit", ["n", "one_minus_Fn0", "sqrt_n_one_minus_Fn0", "n_mu_n"], rows,
                  comments=["f(z) = ((z + 1/3)/(1 + z/3))^2, F_n(0) = f^n(0)"])
    scaled = [r[2] for r in rows]
    rep = contraction_report(state)
    metrics = {"ratio_last_over_first": scaled[-1] / scaled[0],
               "n_mu_final": rows[-1][3], "constant": scaled[-1]}
    return PresetResult([table], metrics, {"verdict": rep.verdict})


# --- custom (exploratory) --------------------------------------------------

def run_custom(p: dict) -> PresetResult:
    f = FiniteBlaschke(complex(math.cos(p["rotation"]), math.sin(p["rotation"])), p["zeros"])
    seq = MapSequence.autonomous(f, name="custom")
    target = power_target(p["target_center"], p["target_exponent"], p["target_length"])
    end = p["window_end"]
    rows = []
    fractions = []
    for start in p["window_starts"]:
        window = (int(start), end)
        if not 1 <= window[0] <= end:
            raise ValueError(f"window start {window[0]} outside 1..{end}")
        est = hit_measure((seq, target), window, p["samples"], p["seed"], threads=p["threads"])
        rows.append(measure_row(window, est))
        fractions.append(est.fraction)
    state = run(seq, min(end, p["orbit_steps"]))
    rep = contraction_report(state)
    table = Table("measure", MEASURE_COLUMNS, rows,
                  comments=["exploratory: finite windows give evidence only, no verdict",
                            rep.verdict, SHADOWING_NOTE], column_notes=MEASURE_NOTES)
    metrics = {"fraction_first": fractions[0], "fraction_last": fractions[-1],
               "mu_sum": rep.mu_sum}
    return PresetResult([table], metrics, {"verdict": "evidence only"})


# --- registry --------------------------------------------------------------

def _p(kind, default, help="", **kw):
    return Param(kind, default, help, **kw)


PRESETS: dict[str, Preset] = {}


def _register(preset: Preset):
    PRESETS[preset.name] = preset


_register(Preset(
    "theorem-c", "hits $(I_n)$ for almost every",
    "A(N)/phi(N) for a uniformly contracting centred map; exact overlap and mixing",
    {"lambda": _p("real", 0.5, "parameter of b(z) = z (z + lambda)/(1 + lambda z)"),
     "length_exponent": _p("real", 0.1, "|I_n| = n^(-exponent)", minimum=0.0),
     "center": _p("real", 0.0, "target centre angle"),
     "N": _p("int", 100_000, minimum=1),
     "samples": _p("int", 200, minimum=1),
     "checkpoints": _p("int", 10, minimum=1),
     "fixed_arc_length": _p("real", 1.0, "arc used by the exact overlap/mixing tables"),
     "overlap_max_n": _p("int", 15, minimum=0),
     "mixing_max_n": _p("int", 16, minimum=0)},
    ("min_A", "mean_ratio", "fraction", "overlap_excess_ratio_last",
     "overlap_excess_ratio_first", "mixing_defect_final"),
    run_theorem_c))

_register(Preset(
    "theorem-d-blocks", "mu_1 + ... + mu_{n_k} in [k, k+1); block product <= e^{-1}",
    "block partition of a contracting centred sequence and composed block derivatives",
    {"mu_family": _p("str", "default", choices=FAMILIES),
     "mu_value": _p("real", 0.5, "value for the constant family"),
     "length_family": _p("str", "default", choices=FAMILIES),
     "length_value": _p("real", 0.5),
     "variant": _p("str", "a", choices=("a", "c")),
     "blocks": _p("int", 12, minimum=1),
     "horizon": _p("int", 100_000, minimum=1)},
    ("blocks", "max_block_mu_sum", "max_heavy_product", "derivative_mismatch",
     "length_sum_at_m"),
    run_theorem_d_blocks))

_register(Preset(
    "theorem-e-dw", "|F_n(zeta) - F_n(0)| -> 0",
    "Denjoy-Wolff distance profile for f(z) = ((z + a)/(1 + a z))^d",
    {"a": _p("real", 0.5), "degree": _p("int", 2, minimum=1),
     "N": _p("int", 50, minimum=1), "samples": _p("int", 100, minimum=1),
     "early_n": _p("int", 5, minimum=1)},
    ("median_d_final", "median_d_ratio", "one_minus_abs_final"),
    run_theorem_e_dw))

_register(Preset(
    "theorem-f-density", "closure{F_n(zeta) : n >= 1} = unit circle",
    "visit counts of boundary orbits in equal cells",
    {"map": _p("str", "b", choices=("b", "rotation", "parabolic")),
     "lambda": _p("real", 0.5), "angle": _p("real", TWO_PI * (math.sqrt(5.0) - 1.0) / 2.0),
     "N": _p("int", 1_000_000, minimum=1), "samples": _p("int", 100, minimum=1),
     "cells": _p("int", 100, minimum=1)},
    ("fraction_dense", "min_min_visits", "mean_cells_visited"),
    run_theorem_f_density))

_register(Preset(
    "ex-rotations", "R_{m,k}(z) = e^{pi i (k+1)/m} z, n = m(m-1)/2 + 1 + k",
    "rotation targets: hits on the upper half circle, none on the lower half",
    {"M": _p("int", 1414, minimum=1),
     "thetas": _p("reals", (3 * math.pi / 2, 1.0), "extra starting angles"),
     "grid": _p("int", 16, "evenly spaced starting angles", minimum=0),
     "samples": _p("int", 1000, minimum=0)},
    ("max_lower_A", "min_upper_A", "fraction"),
    run_ex_rotations))

_register(Preset(
    "ex-nested", "b_n(z) = z (z + lambda_n)/(1 + lambda_n z), sum mu_n l_n < infinity",
    "nested targets at 1: hit fraction of a late window against epsilon_N",
    {"window_start": _p("int", 1000, minimum=1), "window_end": _p("int", 100_000, minimum=1),
     "samples": _p("int", 2000, minimum=1), "branch_max_n": _p("int", 20, minimum=0),
     "target_center": _p("real", 0.0, "0 is the point 1; other values are exploratory")},
    ("fraction", "ci_high", "epsilon_over_2pi", "max_branch_excess"),
    run_ex_nested))

_register(Preset(
    "ex-lengths", "l_n = 1/(n_{k+1} - n_k) on [n_k, n_{k+1})",
    "greedy block lengths from a mu sequence",
    {"mu_family": _p("str", "log", choices=FAMILIES), "mu_value": _p("real", 0.5),
     "horizon": _p("int", 100_000, minimum=2), "cap": _p("real", 10.0),
     "growth": _p("real", 2.0), "initial_gap": _p("int", 2, minimum=1)},
    ("blocks", "max_block_sum_error", "max_l_increase", "max_mu_l_over_mu_nk", "mu_nk_sum"),
    run_ex_lengths))

_register(Preset(
    "ex-conjugated", "f_n = M_n o b_n o M_{n-1}^{-1}",
    "conjugated nested system: F_n(0) = a_n, visits to the left half circle",
    {"N": _p("int", 10_000, minimum=1), "samples": _p("int", 100, minimum=1),
     "tail_start": _p("int", 5_000, minimum=1), "checkpoints": _p("int", 20, minimum=1)},
    ("max_orbit_error", "max_lambda_error", "fraction_no_tail_hits", "sum_one_minus_abs",
     "sum_mu_one_minus_abs"),
    run_ex_conjugated))

_register(Preset(
    "ex-rescaled", "|I_n|/t_n, t_n = |I_1| + ... + |I_n|",
    "rescaled arcs: Denjoy-Wolff distance trend",
    {"N": _p("int", 10_000, minimum=1), "samples": _p("int", 100, minimum=1),
     "early_n": _p("int", 100, minimum=1), "expansion_n": _p("int", 1000, minimum=1),
     "checkpoints": _p("int", 20, minimum=1)},
    ("median_d_final", "median_d_ratio", "expanded_fraction", "sum_shrunk_length"),
    run_ex_rescaled))

_register(Preset(
    "ex-parabolic", "f(z) = ((z+1/3)/(1+z/3))^2, 1 - f^n(0) ~ n^{-1/2}",
    "parabolic orbit of 0: sqrt(n)(1 - f^n(0)) and n mu_n",
    {"N": _p("int", 1_000_000, minimum=1), "rows": _p("int", 10, minimum=1)},
    ("ratio_last_over_first", "n_mu_final", "constant"),
    run_ex_parabolic))

_register(Preset(
    "custom", "exploratory; no verdict",
    "any autonomous Blaschke map and power-law target; windowed hit fractions",
    {"zeros": _p("complexes", (0j, -0.5 + 0j)), "rotation": _p("real", 0.0),
     "target_center": _p("real", 0.0), "target_length": _p("real", 1.0),
     "target_exponent": _p("real", 0.0, minimum=0.0),
     "window_starts": _p("ints", (1,)), "window_end": _p("int", 1000, minimum=1),
     "samples": _p("int", 1000, minimum=1), "orbit_steps": _p("int", 1000, minimum=1)},
    ("fraction_first", "fraction_last", "mu_sum"),
    run_custom))


def schemas() -> dict:
    return {name: (p.params, p.metrics) for name, p in PRESETS.items()}


def preset_table() -> str:
    """Fixed-width table of presets and what each reproduces."""
    w = max(len(n) for n in PRESETS)
    lines = [f"{'preset'.ljust(w)}  citation", f"{'-' * w}  {'-' * 8}"]
    for name in sorted(PRESETS):
        lines.append(f"{name.ljust(w)}  {PRESETS[name].citation}")
    return "\n".join(lines) + "\n"
