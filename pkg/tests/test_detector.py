import math
import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from erdos_affine.detector import (FOUND, INCONCLUSIVE, NOT_FOUND, detect_1d_at_x, detect_bb,
                                   exact_V_1d, sample_witness_search, verify_witness)
from erdos_affine.errors import DomainError
from erdos_affine.geometry import AffineMap, PointSet
from erdos_affine.grid import GridSet

TWO_CELL = GridSet.from_cells(1, 4, [0, 2])
A_HALF_ONE = PointSet.from_scalars([0.5, 1.0])


def jittered_instance(rng, k_max=5, L_max=16):
    """Random d=1 instance; point values are jittered off any dyadic lattice."""
    k = rng.randint(1, k_max)
    vals = {round(rng.uniform(0.05, 1.0), 6) + rng.uniform(-1e-7, 1e-7) for _ in range(k)}
    A = PointSet.from_scalars(sorted(vals))
    L = rng.randint(2, L_max)
    p = rng.uniform(0.3, 0.95)
    E = GridSet(1, L, [rng.random() < p for _ in range(L)])
    return A, E


def test_verify_witness_examples():
    A = PointSet.from_scalars([0.1, 0.2])
    f = AffineMap([[1.0]], [0.0])
    assert verify_witness(f, A, GridSet.full(1, 2), 0.5)
    assert not verify_witness(f, A, GridSet.full(1, 2, False), 0.5)
    assert verify_witness(AffineMap([[0.45]], [0.29]), A_HALF_ONE, TWO_CELL, 0.4)
    # outside the band
    assert not verify_witness(AffineMap([[0.3]], [0.29]), A_HALF_ONE, TWO_CELL, 0.4)
    with pytest.raises(DomainError):
        verify_witness(f, PointSet(((0.1, 0.1),)), GridSet.full(1, 2), 0.5)


def test_verify_witness_is_exact_on_boundaries():
    # 0.25 * 1 + 0.25 lands exactly on the grid line 1/2
    f = AffineMap([[0.25]], [0.25])
    assert not verify_witness(f, PointSet.from_scalars([1.0]), GridSet.full(1, 2), 0.2)


def test_detect_bb_examples():
    r = detect_bb(A_HALF_ONE, GridSet.full(1, 4, False), 0.4)
    assert r.verdict == NOT_FOUND and r.epsilon == 1e-4
    r = detect_bb(PointSet.from_scalars([0.01]), GridSet.full(1, 4), 0.5)
    assert r.found and verify_witness(r.witness, PointSet.from_scalars([0.01]),
                                      GridSet.full(1, 4), 0.5)
    r = detect_bb(A_HALF_ONE, TWO_CELL, 0.4)
    assert r.found and verify_witness(r.witness, A_HALF_ONE, TWO_CELL, 0.4)
    assert exact_V_1d(A_HALF_ONE, TWO_CELL, 0.4)[1] > 0
    js = r.to_json()
    assert set(js) == {"verdict", "witness", "epsilon", "boxes_explored", "wall_time_ms"}


def test_detect_bb_two_dimensional():
    A = PointSet(((0.01, 0.0),))
    r = detect_bb(A, GridSet.full(2, 2), 0.5, budget=10 ** 5)
    assert r.found and verify_witness(r.witness, A, GridSet.full(2, 2), 0.5)
    A = PointSet(((0.1, 0.0), (0.0, 0.1), (0.05, 0.05)))
    E = GridSet.from_cells(2, 4, [(1, 1), (2, 2), (1, 2)])
    r = detect_bb(A, E, 0.5, budget=10 ** 5)
    assert r.found and verify_witness(r.witness, A, E, 0.5)
    assert detect_bb(A, GridSet.full(2, 4, False), 0.5).verdict == NOT_FOUND


def test_detect_bb_two_dimensional_negative():
    # a long point set cannot fit into a single small cell
    A = PointSet(((1.0, 0.0), (0.0, 1.0)))
    E = GridSet.from_cells(2, 8, [(3, 3)])
    r = detect_bb(A, E, 0.5, budget=10 ** 5)
    assert r.verdict == NOT_FOUND


def test_detect_bb_budget_and_errors():
    r = detect_bb(A_HALF_ONE, TWO_CELL, 0.4, budget=0)
    assert r.verdict == INCONCLUSIVE and "boxes_remaining" in r.to_json()
    with pytest.raises(DomainError):
        detect_bb(A_HALF_ONE, TWO_CELL, 1.0)
    with pytest.raises(DomainError):
        detect_bb(A_HALF_ONE, TWO_CELL, 0.4, epsilon=0)
    with pytest.raises(DomainError):
        detect_bb(A_HALF_ONE, GridSet.full(2, 2), 0.4)


def test_detect_1d_at_x_examples():
    r = detect_1d_at_x(PointSet.from_scalars([0.1]), GridSet.full(1, 2), 0.5, 0.0)
    assert r.found
    assert detect_1d_at_x(A_HALF_ONE, GridSet.full(1, 4, False), 0.4, 0.3).verdict == NOT_FOUND
    ivs, _ = exact_V_1d(A_HALF_ONE, TWO_CELL, 0.4)
    a, b = ivs[0]
    assert detect_1d_at_x(A_HALF_ONE, TWO_CELL, 0.4, 0.5 * (a + b)).found


def test_exact_V_examples():
    assert exact_V_1d(A_HALF_ONE, GridSet.full(1, 4, False), 0.4) == ([], 0.0)
    ivs, m = exact_V_1d(PointSet.from_scalars([0.1]), GridSet.full(1, 2), 0.5)
    assert m == pytest.approx(1.0, abs=1e-12)


def test_exact_V_against_per_x_sweep():
    A, E = PointSet.from_scalars([0.1]), GridSet.full(1, 2)
    xs = (np.arange(10 ** 4) + 0.5) / 10 ** 4
    assert all(detect_1d_at_x(A, E, 0.5, float(x)).found for x in xs)


def test_exact_V_against_monte_carlo():
    rng = random.Random(4)
    for _ in range(10):
        A, E = jittered_instance(rng, k_max=3, L_max=8)
        ivs, m = exact_V_1d(A, E, 0.4)
        n = 400
        hits = sum(detect_1d_at_x(A, E, 0.4, rng.random()).found for _ in range(n))
        sd = math.sqrt(max(m * (1 - m), 1e-4) / n)
        assert abs(hits / n - m) <= 3 * sd + 1e-9


def test_cross_validation_d1():
    rng = random.Random(2024)
    for _ in range(50):
        A, E = jittered_instance(rng)
        _, m = exact_V_1d(A, E, 0.4)
        r = detect_bb(A, E, 0.4, 1e-4)
        assert r.verdict != INCONCLUSIVE
        assert r.found == (m > 0)
        if r.found:
            assert verify_witness(r.witness, A, E, 0.4)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_monotone_in_E_and_alpha(seed):
    rng = random.Random(seed)
    A, E = jittered_instance(rng, k_max=4, L_max=10)
    r = detect_bb(A, E, 0.4, 1e-4, budget=10 ** 5)
    if not r.found:
        return
    bigger = GridSet(1, E.L, E.bits | np.array([rng.random() < 0.5 for _ in range(E.L)]))
    assert verify_witness(r.witness, A, bigger, 0.4)
    assert detect_bb(A, bigger, 0.4, 1e-4, budget=10 ** 5).found
    assert verify_witness(r.witness, A, E, 0.3)
    assert detect_bb(A, E, 0.3, 1e-4, budget=10 ** 5).found


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_epsilon_refinement(seed):
    rng = random.Random(seed)
    A, E = jittered_instance(rng, k_max=5, L_max=12)
    if detect_bb(A, E, 0.4, 1e-4).verdict == NOT_FOUND:
        for eps in (1e-3, 1e-2, 0.1):
            assert detect_bb(A, E, 0.4, eps).verdict == NOT_FOUND


def test_sample_witness_search():
    A = PointSet.from_scalars([0.01])
    f, used = sample_witness_search(A, GridSet.full(1, 8), 0.5, 1000, seed=1)
    assert f is not None and used >= 1 and verify_witness(f, A, GridSet.full(1, 8), 0.5)
    f, used = sample_witness_search(A, GridSet.full(1, 8, False), 0.5, 50, seed=1)
    assert f is None and used == 50
    rng = random.Random(9)
    for _ in range(20):
        A, E = jittered_instance(rng)
        f, _ = sample_witness_search(A, E, 0.4, 200, seed=rng.randrange(1 << 30))
        if f is not None:
            assert verify_witness(f, A, E, 0.4)
    A2 = PointSet(((0.01, 0.02),))
    f, _ = sample_witness_search(A2, GridSet.full(2, 4), 0.5, 2000, seed=3)
    assert f is not None and verify_witness(f, A2, GridSet.full(2, 4), 0.5)


def test_two_dimensional_random_instances():
    rng = random.Random(77)
    verdicts = []
    for _ in range(12):
        k = rng.randint(1, 3)
        A = PointSet(tuple((rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3)) for _ in range(k)))
        L = rng.randint(2, 5)
        E = GridSet(2, L, [rng.random() < 0.6 for _ in range(L * L)])
        r = detect_bb(A, E, 0.5, 1e-3, budget=20000)
        verdicts.append(r.verdict)
        if r.found:
            assert verify_witness(r.witness, A, E, 0.5)
        if r.verdict == NOT_FOUND:
            f, _ = sample_witness_search(A, E, 0.5, 300, seed=rng.randrange(1 << 30))
            assert f is None
    assert FOUND in verdicts
