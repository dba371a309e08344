import math
import random
from itertools import combinations

import pytest
from hypothesis import given, settings, strategies as st

from erdos_affine.arrangement import (Hyperplane, band_rectangles, buck_bound, clip_halfplane,
                                      copy_regions_1d, enumerate_regions_1d,
                                      enumerate_regions_2d, lambda_windows, lemma_constant,
                                      polygon_area, polygons_to_json,
                                      representative_scalars_1d, x_projection)
from erdos_affine.detector import verify_witness
from erdos_affine.errors import DomainError
from erdos_affine.geometry import AffineMap, PointSet
from erdos_affine.grid import GridSet


def test_buck_bound_examples():
    assert buck_bound(2, 2) == 4
    assert buck_bound(3, 2) == 7
    assert buck_bound(0, 5) == 1
    assert buck_bound(100, 3) == 1 + 100 + 4950 + 161700
    with pytest.raises(DomainError):
        buck_bound(-1, 2)


def test_lemma_constant():
    assert lemma_constant(1, 0.5) == 2 * 16
    assert lemma_constant(2, 0.5) == 5 * 32 ** 4


def test_regions_1d():
    assert [r.representative[0] for r in enumerate_regions_1d([0, 1])] == [-1, 0.5, 2]
    regs = enumerate_regions_1d([])
    assert len(regs) == 1 and regs[0].representative == (0.0,)
    assert len(enumerate_regions_1d([1, 1])) == 2


def _line(theta, offset):
    return Hyperplane.through((math.cos(theta), math.sin(theta)), offset)


def _bbox(lines):
    pts = [(0.0, 0.0)]
    for h, g in combinations(lines, 2):
        (a, b), (c, d) = h.normal, g.normal
        det = a * d - b * c
        if abs(det) > 1e-12:
            pts.append(((-h.offset * d + g.offset * b) / det, (-a * g.offset + c * h.offset) / det))
    r = max(max(abs(x), abs(y)) for x, y in pts) * 2 + 1
    return (-r, r, -r, r)


def test_regions_2d_examples():
    lines = [_line(0.1, 0.0), _line(1.3, 0.5), _line(2.4, -0.3)]
    assert enumerate_regions_2d(lines, _bbox(lines))[0] == 7
    conc = [_line(t, 0.0) for t in (0.2, 1.1, 2.0)]
    assert enumerate_regions_2d(conc, (-5, 5, -5, 5))[0] == 6
    assert enumerate_regions_2d([], (0, 1, 0, 1))[0] == 1
    with pytest.raises(DomainError):
        enumerate_regions_2d([], (0, 0, 0, 1))


def test_regions_2d_against_euler_oracle():
    # for lines in general position inside the box: 1 + n + (#crossings)
    rng = random.Random(5)
    for _ in range(30):
        n = rng.randint(1, 6)
        lines = [_line(rng.uniform(0, math.pi), rng.uniform(-1, 1)) for _ in range(n)]
        count, regions = enumerate_regions_2d(lines, _bbox(lines))
        assert count == 1 + n + math.comb(n, 2)
        for reg in regions:
            assert all(abs(h.side(reg.representative)) > 1e-10 for h in lines)
            assert reg.sign_vector == tuple("+" if h.side(reg.representative) > 0 else "-"
                                            for h in lines)


def test_clip_and_area():
    sq = [(0, 0), (1, 0), (1, 1), (0, 1)]
    assert polygon_area(sq) == 1
    half = clip_halfplane(sq, 0.5, -1.0, 0.0)  # u <= 0.5
    assert polygon_area(half) == pytest.approx(0.5)
    assert clip_halfplane(sq, -2.0, 0.0, 0.0) == []


def test_lambda_window_example():
    A = PointSet.from_scalars([0.1])
    (w,) = lambda_windows((0.5,), A, 10, 0.5)
    assert (w.ell, w.i, w.js) == (1, 1, (3, 4, 5, 6, 7))
    (w,) = lambda_windows((0.5,), PointSet.from_scalars([10.0]), 6, 0.01)
    assert w.js == tuple(range(7))


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 2), st.integers(1, 20), st.floats(0.1, 0.9), st.data())
def test_lambda_windows_match_definition(d, L, alpha, data):
    k = data.draw(st.integers(1, 4))
    pts = data.draw(st.lists(st.tuples(*[st.floats(-2, 2)] * d), min_size=k, max_size=k,
                             unique=True).filter(lambda p: all(any(c != 0 for c in q) for q in p)))
    x = data.draw(st.tuples(*[st.floats(0, 1)] * d))
    A = PointSet(tuple(pts))
    for w in lambda_windows(x, A, L, alpha):
        r = math.hypot(*A[w.i - 1]) / alpha + 1 / L
        expect = tuple(j for j in range(L + 1) if abs(x[w.ell - 1] - j / L) < r)
        # the exact computation may differ from float evaluation only at ties
        assert set(w.js) ^ set(expect) <= {j for j in range(L + 1)
                                           if abs(abs(x[w.ell - 1] - j / L) - r) < 1e-12}


def test_representatives_example():
    reps = representative_scalars_1d(0.0, PointSet.from_scalars([1.0]), 1, 0.5)
    assert len(reps) == 3
    assert sorted(reps) == [-1.25, 0.75, 1.5]
    # no breakpoint inside the band: band midpoints only
    reps = representative_scalars_1d(0.5, PointSet.from_scalars([1e-3]), 1, 0.5)
    assert sorted(reps) == [-1.25, 1.25]


def _in_poly(poly, u, v):
    n = len(poly)
    s = 1 if polygon_area(poly) > 0 else -1
    for i in range(n):
        (u0, v0), (u1, v1) = poly[i], poly[(i + 1) % n]
        if abs(u1 - u0) + abs(v1 - v0) < 1e-12:
            continue  # clipping can leave near-duplicate vertices
        if s * ((u1 - u0) * (v - v0) - (v1 - v0) * (u - u0)) <= 0:
            return False
    return True


def _random_instance(rng, k_max=4, L_max=12):
    k = rng.randint(1, k_max)
    A = PointSet.from_scalars(rng.sample([i / 20 for i in range(1, 21)], k))
    L = rng.randint(1, L_max)
    E = GridSet(1, L, [rng.random() < 0.7 for _ in range(L)])
    alpha = rng.choice([0.3, 0.4, 0.5, 0.7])
    return A, E, alpha


def test_copy_regions_examples():
    assert copy_regions_1d(PointSet.from_scalars([0.5]), GridSet.full(1, 4, False), 0.4) == []
    polys = copy_regions_1d(PointSet.from_scalars([0.1]), GridSet.full(1, 2), 0.5)
    assert x_projection(polys) == [(0.0, 1.0)]
    A = PointSet.from_scalars([0.5, 1.0])
    polys = copy_regions_1d(A, GridSet.from_cells(1, 4, [0, 2]), 0.4)
    assert any(_in_poly(p, 0.45, 0.29) for p in polys)


def test_copy_regions_membership_against_verify():
    rng = random.Random(11)
    for _ in range(200):
        A, E, alpha = _random_instance(rng)
        polys = copy_regions_1d(A, E, alpha)
        for _ in range(50):
            lam = rng.choice([-1, 1]) * rng.uniform(alpha, 1 / alpha)
            x = rng.random()
            inside = any(_in_poly(p, lam, x) for p in polys)
            assert inside == verify_witness(AffineMap([[lam]], [x]), A, E, alpha)


def test_copy_regions_disjoint_and_in_band():
    rng = random.Random(3)
    for _ in range(30):
        A, E, alpha = _random_instance(rng)
        polys = copy_regions_1d(A, E, alpha)
        total = sum(abs(polygon_area(p)) for p in polys)
        assert total <= 2 * (1 / alpha - alpha) + 1e-12
        for p in polys:
            assert all(alpha - 1e-12 <= abs(u) <= 1 / alpha + 1e-12 for u, _ in p)


def test_representatives_bound_and_oracle_agreement():
    rng = random.Random(21)
    for _ in range(100):
        A, E, alpha = _random_instance(rng)
        polys = copy_regions_1d(A, E, alpha)
        x = rng.random()
        reps = representative_scalars_1d(x, A, E.L, alpha)
        bound = 2 * (8 / alpha) * E.L * A.max_norm() * len(A)
        if 2 * A.max_norm() * E.L >= 1:
            assert len(reps) <= bound
        found = any(verify_witness(AffineMap([[r]], [x]), A, E, alpha) for r in reps)
        oracle = any(min(v for _, v in p) < x < max(v for _, v in p) for p in polys)
        assert found == oracle


def test_polygons_json_ccw():
    polys = band_rectangles(0.5)
    out = polygons_to_json([list(reversed(polys[0]))])
    v = out[0]["vertices"]
    assert polygon_area([tuple(p) for p in v]) > 0
