import cmath
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from innerdyn.composition import (
    CompositionState,
    MapSequence,
    advance,
    block_compose,
    block_partition,
    contraction_report,
    hyperbolic_density,
    normalize,
    run,
)
from innerdyn.errors import ContractViolation, DomainError, HorizonTooShort, PrecisionExhausted
from innerdyn.maps import ComposedMap, FiniteBlaschke, MobiusAutomorphism
from innerdyn.targets import nested_b, parabolic_map

# lambda_1 of the parabolic square from finite differences of f at 0:
# (1 - 0) |f'(0)| / (1 - |f(0)|^2) gave 0.5999999999800436.
PARABOLIC_LAMBDA_1 = 3 / 5


def random_sequence(seed, length, max_degree=3, centered=False):
    rng = np.random.default_rng(seed)
    maps = []
    for _ in range(length):
        d = int(rng.integers(1, max_degree + 1))
        zeros = [0.8 * math.sqrt(rng.uniform()) * cmath.exp(2j * math.pi * rng.uniform())
                 for _ in range(d)]
        if centered:
            zeros[0] = 0j
        maps.append(FiniteBlaschke(cmath.exp(2j * math.pi * rng.uniform()), zeros))
    return MapSequence.from_table(maps)


def brute_force_blocks(mu, count):
    # n_k by a plain scan: least n with floor(partial sum) == k.
    out, s = [], 0.0
    for i, m in enumerate(mu, start=1):
        s += m
        while len(out) < count and s >= len(out) + 1:
            if s < len(out) + 2:
                out.append(i)
                break
            raise AssertionError("partial sum jumped a level")
    return out


# --- advance ---------------------------------------------------------------

def test_centered_sequence_orbit_stays_at_zero():
    seq = random_sequence(1, 30, centered=True)
    state = run(seq, 30)
    assert np.all(state.orbit == 0)
    lam = [abs(seq(n).derivative(0j)) for n in range(1, 31)]
    assert np.allclose(state.lambdas, lam, atol=1e-15)


def test_parabolic_orbit_and_lambda():
    seq = MapSequence.autonomous(parabolic_map())
    state = run(seq, 2)
    assert state.orbit[1] == pytest.approx(1 / 9, abs=1e-16)
    assert state.orbit[2] == pytest.approx(9 / 49, abs=1e-15)
    assert state.lambdas[0] == pytest.approx(PARABOLIC_LAMBDA_1, abs=1e-14)


def test_state_invariants_random():
    for seed in range(5):
        state = run(random_sequence(seed, 40), 40)
        assert np.all(state.lambdas > 0) and np.all(state.lambdas <= 1 + 1e-12)
        prods = np.cumprod(state.lambdas)
        assert np.all(np.diff(prods) <= 1e-12 * prods[:-1])
        assert state.lambda_partial_product == pytest.approx(prods[-1])
        assert state.mu_partial_sum == pytest.approx(np.sum(1 - state.lambdas))
        assert np.allclose(state.one_minus_abs, 1 - np.abs(state.orbit))


def test_degree_one_maps_do_not_contract():
    rng = np.random.default_rng(3)
    maps = [MobiusAutomorphism(0.5 * rng.uniform() * cmath.exp(2j * math.pi * rng.uniform()),
                               cmath.exp(2j * math.pi * rng.uniform())) for _ in range(30)]
    state = run(MapSequence.from_table(maps), 30)
    assert np.allclose(state.lambdas, 1.0, atol=1e-10)
    state2 = run(random_sequence(4, 30, max_degree=3), 30)
    deg = [random_sequence(4, 30)(n).degree for n in range(1, 31)]
    for lam, d in zip(state2.lambdas, deg):
        assert (abs(lam - 1) < 1e-10) == (d == 1)


def test_hyperbolic_chain_rule_by_finite_differences():
    # central differences lose accuracy once |F_n'| is tiny, so stay short
    seq = random_sequence(5, 50)
    state = run(seq, 50)
    h = 1e-6
    for n in (1, 2, 3, 5):
        F = ComposedMap(list(seq.maps(1, n)))
        d = (F.eval(h) - F.eval(-h)) / (2 * h)
        hyp = abs(d) * hyperbolic_density(F.eval(0j)) / hyperbolic_density(0j)
        assert hyp == pytest.approx(float(np.prod(state.lambdas[:n])), rel=1e-6)


def test_hyperbolic_chain_rule_exact_derivative():
    seq = random_sequence(5, 50)
    state = run(seq, 50)
    for n in (10, 20, 50):
        F = ComposedMap(list(seq.maps(1, n)))
        w = complex(F.eval(0j))
        hyp = abs(complex(F.derivative(0j))) / (1 - abs(w) ** 2)
        assert hyp == pytest.approx(float(np.prod(state.lambdas[:n])), rel=1e-6)


def test_one_call_equals_many_steps():
    seq = random_sequence(6, 25)
    one = run(seq, 25)
    many = CompositionState.start()
    for _ in range(25):
        many = advance(many, seq, 1)
    assert np.array_equal(one.orbit, many.orbit)
    assert np.array_equal(one.lambdas, many.lambdas)
    assert one.mu_partial_sum == many.mu_partial_sum
    assert one.lambda_partial_product == many.lambda_partial_product


def test_state_is_immutable():
    state = run(random_sequence(7, 3), 3)
    with pytest.raises(ValueError):
        state.orbit[0] = 1.0
    with pytest.raises(AttributeError):
        state.n = 5


def test_advance_rejects_zero_steps():
    with pytest.raises(ValueError):
        advance(CompositionState.start(), random_sequence(8, 2), 0)


def test_precision_exhausted_reports_step():
    f = FiniteBlaschke(1.0, (-0.5, -0.5))  # attracting boundary point at 1
    with pytest.raises(PrecisionExhausted) as info:
        run(MapSequence.autonomous(f), 500)
    assert 10 < info.value.n < 500


def test_base_point_parameter():
    seq = MapSequence.autonomous(parabolic_map())
    with pytest.raises(DomainError):
        CompositionState.start(1.0)
    state = run(seq, 3, base_point=0.2j)
    assert state.orbit[0] == 0.2j
    assert state.orbit[1] == pytest.approx(parabolic_map().eval(0.2j))


def test_sequence_index_contract():
    seq = MapSequence.from_table([nested_b(0.5)])
    with pytest.raises(IndexError):
        seq(0)
    with pytest.raises(IndexError):
        seq(2)
    auto = MapSequence.autonomous(nested_b(0.3))
    assert auto(7) is auto(7)


# --- contraction report ----------------------------------------------------

def test_report_uniform_half():
    state = run(MapSequence.autonomous(nested_b(0.5)), 40)
    rep = contraction_report(state)
    assert rep.lambda_product == pytest.approx(2.0 ** -40, rel=1e-12)
    assert "not a limit" in rep.verdict


def test_report_rotations():
    state = run(MapSequence.autonomous(FiniteBlaschke.rotation(1.0)), 100)
    rep = contraction_report(state)
    assert rep.lambda_product == 1.0 and rep.mu_sum == 0.0
    assert "no contraction observed" in rep.verdict


# --- normalisation ---------------------------------------------------------

def test_normalize_centered_is_identity():
    seq = random_sequence(9, 10, centered=True)
    g, movers = normalize(seq, run(seq, 10))
    for n in range(1, 11):
        assert all(m.a == 0 and m.tau == 1 for m in movers)
        z = 0.3 - 0.1j
        assert g(n).eval(z) == pytest.approx(seq(n).eval(z), abs=1e-15)


def test_normalize_parabolic_first_derivative():
    seq = MapSequence.autonomous(parabolic_map())
    g, _ = normalize(seq, run(seq, 5))
    assert abs(g(1).derivative(0j)) == pytest.approx(PARABOLIC_LAMBDA_1, abs=1e-12)


def test_normalize_fixes_zero_and_keeps_distortion():
    seq = random_sequence(10, 30)
    state = run(seq, 30)
    g, _ = normalize(seq, state)
    G = 0j
    for n in range(1, 31):
        assert abs(g(n).eval(0j)) < 1e-12
        assert abs(g(n).derivative(0j)) == pytest.approx(state.lambdas[n - 1], abs=1e-10)
        G = g(n).eval(G)
        assert abs(G) < 1e-12


# --- block partition -------------------------------------------------------

def test_blocks_mu_one():
    part = block_partition(np.ones(20), blocks=10)
    assert part.n[:10] == tuple(range(1, 11))


def test_blocks_mu_half():
    part = block_partition(np.full(20, 0.5), blocks=3)
    assert part.n[:3] == (2, 4, 6)


def test_blocks_mu_point_three():
    part = block_partition(np.full(40, 0.3), blocks=2)
    assert part.n[:2] == (4, 7)


@given(st.lists(st.floats(0.01, 1.0), min_size=5, max_size=200))
def test_blocks_match_brute_force(mu):
    expected = brute_force_blocks(mu, len(mu))
    if not expected:
        return
    part = block_partition(mu)
    assert list(part.n) == expected
    sums = np.cumsum(mu)
    for k, n in enumerate(part.n, start=1):
        assert k <= sums[n - 1] < k + 1
    for k in range(len(part.m)):
        assert part.n[k] <= part.m[k] < part.n[k + 1]
        assert np.sum(mu[part.n[k] - 1:part.n[k + 1] - 1]) < 2


def test_variant_a_argmax_smallest_index():
    mu = np.full(12, 0.5)
    lengths = np.array([0.1, 0.3, 0.3, 0.2, 0.4, 0.4, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1])
    part = block_partition(mu, lengths, variant="a")
    # blocks [2,4), [4,6), [6,8), ...
    assert part.m[:3] == (2, 5, 6)


def test_variant_c_argmin_mu():
    mu = np.array([0.9, 0.2, 0.1, 0.2, 0.05, 0.3, 0.2, 0.4, 0.3, 0.3])
    lengths = np.full(10, 0.5)
    part = block_partition(mu, lengths, variant="c")
    assert part.n[:3] == (2, 4, 6)
    # m_k minimises mu on [n_k, n_{k+1} - 1); single-index blocks fall back
    assert part.m[:2] == (2, 4)
    with pytest.raises(ValueError):
        block_partition(mu, np.full(10, 1.0), variant="c")


def test_horizon_too_short_carries_partial():
    with pytest.raises(HorizonTooShort) as info:
        block_partition(np.full(10, 0.25), blocks=5)
    assert info.value.partial.n == (4, 8)


def test_block_compose_products():
    mu = np.full(20, 0.5)
    part = block_partition(mu, blocks=8)
    seq = MapSequence(lambda n: nested_b(1 - mu[n - 1]))
    g = block_compose(seq, part)
    for j, ((s, e), prod, msum) in enumerate(
            zip(part.double_blocks, part.block_products, part.block_mu_sums), start=1):
        assert abs(g(j).derivative(0j)) == pytest.approx(prod, abs=1e-10)
        if msum >= 1:
            assert prod <= math.exp(-1) + 1e-10


def test_single_block_of_two_halves():
    g = ComposedMap([nested_b(0.5), nested_b(0.5)])
    assert abs(g.derivative(0j)) == pytest.approx(0.25)
    assert 0.25 <= math.exp(-1)


def test_unit_mu_sum_block_bound():
    rng = np.random.default_rng(12)
    for _ in range(50):
        cuts = np.sort(rng.uniform(size=int(rng.integers(1, 8))))
        mu = np.diff(np.concatenate([[0.0], cuts, [1.0]]))
        assert np.prod(1 - mu) <= math.exp(-1) + 1e-10


def test_block_compose_rejects_uncentered_and_empty():
    mu = np.full(20, 0.5)
    part = block_partition(mu, blocks=6)
    with pytest.raises(ContractViolation):
        block_compose(MapSequence.autonomous(parabolic_map()), part)
    empty = block_partition(np.full(3, 0.5))
    with pytest.raises(ValueError):
        block_compose(MapSequence.autonomous(nested_b(0.5)), empty)
