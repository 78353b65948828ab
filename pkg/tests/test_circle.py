import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from innerdyn.circle import (
    ANGLE_TOL,
    TWO_PI,
    Arc,
    ArcUnion,
    angular_distance,
    arc_contains,
    complement,
    harmonic_measure,
    intersection,
    reduce_angle,
    union,
    union_measure,
)
from innerdyn.errors import DomainError
from innerdyn.maps import MobiusAutomorphism

# Poisson-kernel integral over [-0.2, 0.2] seen from z = 0.5 (scipy quad, 1e-14).
POISSON_ORACLE = 0.1861333965426773

angles = st.floats(min_value=-20.0, max_value=20.0, allow_nan=False)
halves = st.floats(min_value=0.0, max_value=math.pi)
arcs = st.builds(Arc, angles, halves)


def test_reduce_angle_range():
    for t in [-1e-18, -TWO_PI, TWO_PI, 7.0, -7.0, 0.0]:
        r = reduce_angle(t)
        assert 0.0 <= r < TWO_PI


@given(angles)
def test_reduce_angle_is_periodic(t):
    assert math.isclose(math.cos(reduce_angle(t)), math.cos(t), abs_tol=1e-12)
    assert math.isclose(math.sin(reduce_angle(t)), math.sin(t), abs_tol=1e-12)


def test_contains_full_circle():
    full = Arc(0.0, math.pi)
    assert all(arc_contains(full, p) for p in np.linspace(0, TWO_PI, 17))


def test_contains_closed_endpoint():
    assert arc_contains(Arc(0.0, 0.1), 0.1)
    assert arc_contains(Arc(0.0, 0.1), -0.1)
    assert not arc_contains(Arc(0.0, 0.1), 0.1 + 1e-9)


def test_contains_wraparound():
    assert arc_contains(Arc(TWO_PI - 0.05, 0.1), 0.04)
    assert not arc_contains(Arc(TWO_PI - 0.05, 0.1), 0.06)


def test_degenerate_arc_contains_only_center():
    a = Arc(1.0, 0.0)
    assert a.length == 0.0 and a.contains(1.0) and not a.contains(1.0 + 1e-9)
    assert union_measure(ArcUnion.from_arcs([a])) == 0.0


def test_half_length_out_of_range():
    with pytest.raises(DomainError):
        Arc(0.0, 4.0)
    with pytest.raises(DomainError):
        Arc(0.0, -0.5)


def test_measure_examples():
    assert union_measure(ArcUnion.full()) == pytest.approx(TWO_PI)
    u = ArcUnion.from_arcs([Arc.from_start(0.0, 0.3), Arc.from_start(2.0, 0.5)])
    assert union_measure(u) == pytest.approx(0.8, abs=1e-15)
    v = ArcUnion.from_intervals([0.0, 0.5], [1.0, 1.5])
    assert len(v) == 1 and union_measure(v) == pytest.approx(1.5)


def test_touching_arcs_merge():
    u = ArcUnion.from_intervals([0.0, 1.0], [1.0, 2.0])
    assert u.segments == ((0.0, 2.0),)


def test_wrapped_arc_reported_once():
    a = Arc(0.0, 0.25)
    u = ArcUnion.from_arcs([a])
    assert len(u.segments) == 2 and len(u.arcs) == 1
    assert u.arcs[0].center == pytest.approx(0.0, abs=1e-15)
    assert u.arcs[0].half_length == pytest.approx(0.25)


def test_set_operation_examples():
    assert complement(ArcUnion.full()).is_empty
    assert union_measure(complement(ArcUnion.full())) == 0.0
    i = intersection(ArcUnion.from_intervals([0.0], [1.0]), ArcUnion.from_intervals([0.5], [2.0]))
    assert i.segments == ((0.5, 1.0),)
    assert union_measure(i) == pytest.approx(0.5)
    assert complement(ArcUnion.empty()) == ArcUnion.full()


def test_operators_match_functions():
    a = ArcUnion.from_arcs([Arc(1.0, 0.5)])
    b = ArcUnion.from_arcs([Arc(1.6, 0.5)])
    assert (a | b) == union(a, b)
    assert (a & b) == intersection(a, b)
    assert ~a == complement(a)


@given(st.lists(arcs, max_size=6))
def test_measure_and_complement_partition(arc_list):
    u = ArcUnion.from_arcs(arc_list)
    m = union_measure(u)
    assert 0.0 <= m <= TWO_PI
    # gaps and seams within ANGLE_TOL are absorbed, at most once per piece
    tol = ANGLE_TOL * (2 * len(u.segments) + 2)
    assert m + union_measure(complement(u)) == pytest.approx(TWO_PI, abs=tol)
    assert union(u, complement(u)) == ArcUnion.full()


@given(st.lists(arcs, min_size=1, max_size=5), st.lists(arcs, min_size=1, max_size=5))
def test_intersection_bounded_by_each(a_list, b_list):
    a, b = ArcUnion.from_arcs(a_list), ArcUnion.from_arcs(b_list)
    m = union_measure(intersection(a, b))
    assert m <= min(union_measure(a), union_measure(b)) + 1e-12
    # inclusion-exclusion
    assert union_measure(union(a, b)) == pytest.approx(
        union_measure(a) + union_measure(b) - m, abs=1e-11)


@given(st.lists(arcs, max_size=5))
def test_segments_sorted_disjoint(arc_list):
    segs = ArcUnion.from_arcs(arc_list).segments
    for lo, hi in segs:
        assert 0.0 <= lo <= hi <= TWO_PI
    for (_, h1), (l2, _) in zip(segs, segs[1:]):
        assert h1 < l2


def _raster(u: ArcUnion, cells: int) -> np.ndarray:
    mids = (np.arange(cells) + 0.5) * (TWO_PI / cells)
    mask = np.zeros(cells, dtype=bool)
    for lo, hi in u.segments:
        mask |= (mids >= lo) & (mids <= hi)
    return mask


def test_set_ops_match_raster_oracle():
    rng = np.random.default_rng(11)
    cells = 1_000_000
    cell = TWO_PI / cells
    for _ in range(10):
        a = ArcUnion.from_arcs([Arc(rng.uniform(0, TWO_PI), rng.uniform(0, 1.2)) for _ in range(4)])
        b = ArcUnion.from_arcs([Arc(rng.uniform(0, TWO_PI), rng.uniform(0, 1.2)) for _ in range(4)])
        ra, rb = _raster(a, cells), _raster(b, cells)
        n_pieces = len(a.segments) + len(b.segments)
        for exact, raster in [
            (union(a, b), ra | rb),
            (intersection(a, b), ra & rb),
            (complement(a), ~ra),
        ]:
            # each interval endpoint misplaces at most one cell
            assert abs(union_measure(exact) - raster.sum() * cell) <= 2 * n_pieces * cell


def test_harmonic_measure_origin_is_normalised_length():
    assert harmonic_measure(0j, Arc(2.0, 0.4)) == pytest.approx(0.8 / TWO_PI, abs=1e-15)


def test_harmonic_measure_full_circle():
    for z in [0j, 0.5, -0.3 + 0.9j]:
        assert harmonic_measure(z, ArcUnion.full()) == pytest.approx(1.0, abs=1e-14)


def test_harmonic_measure_poisson_oracle():
    assert harmonic_measure(0.5, Arc(0.0, 0.2)) == pytest.approx(POISSON_ORACLE, abs=1e-12)


def test_harmonic_measure_outside_disk():
    with pytest.raises(DomainError):
        harmonic_measure(1.0 + 0j, Arc(0.0, 0.1))


@settings(max_examples=60)
@given(st.floats(0.0, 0.95), angles, st.floats(0.0, 0.95), angles, arcs, st.floats(0, 0.95),
       angles)
def test_harmonic_measure_conformal_invariance(r, t, ra, ta, arc, rz, tz):
    m = MobiusAutomorphism(ra * complex(math.cos(ta), math.sin(ta)),
                           complex(math.cos(t), math.sin(t)))
    z = rz * complex(math.cos(tz), math.sin(tz))
    # image arc: orientation-preserving, so map the start and end points
    if arc.is_full:
        image = ArcUnion.full()
    else:
        s = float(m.lift(arc.center - arc.half_length))
        e = float(m.lift(arc.center + arc.half_length))
        image = ArcUnion.from_intervals([s], [e])
    assert harmonic_measure(z, arc) == pytest.approx(
        harmonic_measure(complex(m.eval(z)), image), abs=1e-9)


def test_angular_distance_symmetric():
    assert angular_distance(0.1, TWO_PI - 0.1) == pytest.approx(0.2)
    assert angular_distance(3.0, 3.0) == 0.0
