"""Decide whether a grid set contains an affine copy T A + x with T in the band.

``detect_bb`` is an interval branch-and-bound over boxes of matrix entries
and shifts. Each box is first contracted: for every point the enclosure of
its image is shrunk to the hull of the selected cells it meets, and that
hull is propagated back onto the box entries (outward rounded, so no
solution is ever cut). A box is discarded when some image meets no
selected cell, when its singular-value range misses the band, or when it
is smaller than ``epsilon`` and its centre is not a copy; a centre that
passes the exact check is returned as a witness.
"""
from __future__ import annotations

import math
import random
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .arrangement import copy_regions_1d, representative_scalars_1d, x_projection
from .errors import DomainError
from .geometry import AffineMap, PointSet, in_operator_band
from .grid import GridSet, contains_open

FOUND = "found"
NOT_FOUND = "not_found_certified"
INCONCLUSIVE = "inconclusive"

_INF = math.inf


@dataclass
class DetectionResult:
    verdict: str
    witness: Optional[AffineMap] = None
    epsilon: Optional[float] = None
    boxes_explored: int = 0
    boxes_remaining: int = 0
    wall_time_ms: float = 0.0

    @property
    def found(self) -> bool:
        return self.verdict == FOUND

    def to_json(self) -> dict:
        out = {
            "verdict": self.verdict,
            "epsilon": self.epsilon,
            "boxes_explored": self.boxes_explored,
            "wall_time_ms": round(self.wall_time_ms, 3),
        }
        if self.witness is not None:
            out["witness"] = self.witness.to_json()
        if self.verdict == INCONCLUSIVE:
            out["boxes_remaining"] = self.boxes_remaining
        return out


def verify_witness(f: AffineMap, A: PointSet, E: GridSet, alpha: float) -> bool:
    """Exact check that f lies in the band and maps every point into an open selected cell."""
    if f.dim != A.dim or A.dim != E.dim:
        raise DomainError("dimension mismatch")
    if not in_operator_band(f.matrix, alpha):
        return False
    return all(contains_open(E, f.exact_image(a)) for a in A)


# outward-rounded scalar helpers ---------------------------------------------------

def _dn(v):
    return math.nextafter(v, -_INF)


def _up(v):
    return math.nextafter(v, _INF)


def _mul(lo, hi, c):
    """[lo, hi] * c, outward."""
    if c >= 0:
        return _dn(lo * c), _up(hi * c)
    return _dn(hi * c), _up(lo * c)


def _div(lo, hi, c):
    if c > 0:
        return _dn(lo / c), _up(hi / c)
    return _dn(hi / c), _up(lo / c)


class _Cells:
    """Lookup tables over the selected cells of a grid."""

    def __init__(self, E: GridSet):
        self.E = E
        self.L = E.L
        self.d = E.dim
        cube = E.cube().astype(np.int64)
        sat = cube
        for ax in range(self.d):
            sat = np.cumsum(sat, axis=ax)
        self.sat = np.pad(sat, [(1, 0)] * self.d)
        if self.d == 1:
            L = self.L
            b = E.bits
            idx = np.where(b, np.arange(L), L)
            self.next_sel = np.minimum.accumulate(idx[::-1])[::-1].tolist() + [L]
            idx = np.where(b, np.arange(L), -1)
            self.prev_sel = np.maximum.accumulate(idx).tolist()
        self.bits = E.bits.tolist() if self.d == 1 else None

    def index_range(self, lo, hi):
        """Indices of open cells that can meet the closed interval [lo, hi]."""
        L = self.L
        u, l = hi * L, lo * L
        mrg = 4e-16 * max(abs(u), abs(l), 1.0)
        return max(0, math.floor(l - mrg)), min(L - 1, math.ceil(u + mrg) - 1)

    def hull_1d(self, lo, hi):
        """Closed hull of the selected cells meeting [lo, hi], or None."""
        jlo, jhi = self.index_range(lo, hi)
        if jlo > jhi:
            return None
        a = self.next_sel[jlo]
        if a > jhi:
            return None
        b = self.prev_sel[jhi]
        return _dn(a / self.L), _up((b + 1) / self.L)

    def count_box(self, ranges):
        total = 0
        for corner in range(1 << self.d):
            idx = []
            sign = 1
            for ax, (a, b) in enumerate(ranges):
                if corner >> ax & 1:
                    idx.append(a)
                    sign = -sign
                else:
                    idx.append(b + 1)
            total += sign * int(self.sat[tuple(idx)])
        return total

    def hull_nd(self, box_lo, box_hi):
        ranges = []
        for lo, hi in zip(box_lo, box_hi):
            jlo, jhi = self.index_range(lo, hi)
            if jlo > jhi:
                return None
            ranges.append((jlo, jhi))
        if self.count_box(ranges) == 0:
            return None
        size = math.prod(b - a + 1 for a, b in ranges)
        if size > 1 << 16:
            return list(zip(box_lo, box_hi))
        sub = self.E.cube()[tuple(slice(a, b + 1) for a, b in ranges)]
        out = []
        for ax, (a, _) in enumerate(ranges):
            other = tuple(i for i in range(self.d) if i != ax)
            occ = np.flatnonzero(sub.any(axis=other) if other else sub)
            out.append((_dn((a + occ[0]) / self.L), _up((a + occ[-1] + 1) / self.L)))
        return out

    def selected_open(self, y) -> bool:
        """Float screen: y strictly inside a selected cell."""
        L = self.L
        cell = []
        for c in y:
            t = c * L
            if not 0.0 < t < L:
                return False
            j = math.floor(t)
            if t == j:
                return False
            cell.append(j)
        if self.d == 1:
            return self.bits[cell[0]]
        return bool(self.E.cube()[tuple(cell)])


class _Problem:
    def __init__(self, A: PointSet, E: GridSet, alpha: float, epsilon: float):
        self.A = A
        self.E = E
        self.alpha = alpha
        self.eps = epsilon
        self.d = A.dim
        self.pts = [tuple(a) for a in A]
        self.cells = _Cells(E)
        d = self.d
        # image-space weight of each coordinate of the parameter vector
        # (floored so that entries acting on no point still get split for the band test)
        amax = [max(abs(a[j]) for a in self.pts) for j in range(d)]
        floor = 0.25 * max(amax)
        amax = [max(v, floor) for v in amax]
        self.weight = [amax[j] for _ in range(d) for j in range(d)] + [1.0] * d
        # point pairs for the singular-value test (d = 1 is covered by the scalar range)
        self.pairs = []
        if d >= 2:
            k = len(self.pts)
            idx = [(i, j) for i in range(k) for j in range(i + 1, k)] if k <= 12 else \
                [(i, i + 1) for i in range(k - 1)]
            self.pairs = [(i, j, math.dist(self.pts[i], self.pts[j])) for i, j in idx]

    # box layout: d*d matrix entries (row major) then d shifts

    def image(self, lo, hi, a):
        d = self.d
        out_lo, out_hi = [], []
        for ell in range(d):
            s_lo, s_hi = lo[d * d + ell], hi[d * d + ell]
            for j in range(d):
                p_lo, p_hi = _mul(lo[ell * d + j], hi[ell * d + j], a[j])
                s_lo, s_hi = _dn(s_lo + p_lo), _up(s_hi + p_hi)
            out_lo.append(s_lo)
            out_hi.append(s_hi)
        return out_lo, out_hi

    def contract(self, lo, hi):
        """Shrink the box in place; False when it provably holds no copy."""
        d = self.d
        for _ in range(2):
            changed = False
            for a in self.pts:
                ilo, ihi = self.image(lo, hi, a)
                if d == 1:
                    h = self.cells.hull_1d(ilo[0], ihi[0])
                    hull = None if h is None else [h]
                else:
                    hull = self.cells.hull_nd(ilo, ihi)
                if hull is None:
                    return False
                for ell in range(d):
                    tlo, thi = max(ilo[ell], hull[ell][0]), min(ihi[ell], hull[ell][1])
                    if tlo > thi:
                        return False
                    if tlo == ilo[ell] and thi == ihi[ell]:
                        continue
                    # row ell: sum_j T[ell, j] a_j + x_ell in [tlo, thi]
                    terms = [(d * d + ell, 1.0)] + [(ell * d + j, a[j]) for j in range(d) if a[j] != 0.0]
                    parts = []
                    for idx, c in terms:
                        parts.append(_mul(lo[idx], hi[idx], c))
                    tot_lo = _dn(math.fsum(p[0] for p in parts))
                    tot_hi = _up(math.fsum(p[1] for p in parts))
                    for (idx, c), (p_lo, p_hi) in zip(terms, parts):
                        # c * v lies in [tlo, thi] minus the other terms
                        r_lo = _dn(tlo - _up(tot_hi - p_hi))
                        r_hi = _up(thi - _dn(tot_lo - p_lo))
                        v_lo, v_hi = _div(r_lo, r_hi, c)
                        if v_lo > lo[idx]:
                            lo[idx] = v_lo
                            changed = True
                        if v_hi < hi[idx]:
                            hi[idx] = v_hi
                            changed = True
                        if lo[idx] > hi[idx]:
                            return False
            if not changed:
                break
        return self.band_possible(lo, hi) and self.pairs_possible(lo, hi)

    def pairs_possible(self, lo, hi):
        """sigma_min <= |T(a-b)|/|a-b| <= sigma_max, with |T(a-b)| bounded by image boxes."""
        if not self.pairs:
            return True
        boxes = [self.image(lo, hi, a) for a in self.pts]
        alpha, beta = self.alpha, 1.0 / self.alpha
        for i, j, dist in self.pairs:
            (l1, h1), (l2, h2) = boxes[i], boxes[j]
            far = math.sqrt(sum(max(b1 - a2, b2 - a1) ** 2 for a1, b1, a2, b2 in zip(l1, h1, l2, h2)))
            near = math.sqrt(sum(max(0.0, a2 - b1, a1 - b2) ** 2 for a1, b1, a2, b2 in zip(l1, h1, l2, h2)))
            if far * (1 + 1e-12) <= alpha * dist * (1 - 1e-12):
                return False
            if near * (1 - 1e-12) >= beta * dist * (1 + 1e-12):
                return False
        return True

    def band_possible(self, lo, hi):
        d = self.d
        if d == 1:
            m = min(abs(lo[0]), abs(hi[0])) if lo[0] * hi[0] > 0 else 0.0
            return max(abs(lo[0]), abs(hi[0])) > self.alpha and m < 1.0 / self.alpha
        col_max = []
        col_min = []
        for j in range(d):
            smax = smin = 0.0
            for ell in range(d):
                a, b = lo[ell * d + j], hi[ell * d + j]
                smax += max(a * a, b * b)
                if a * b > 0:
                    smin += min(a * a, b * b)
            col_max.append(math.sqrt(smax) * (1 + 1e-15))
            col_min.append(math.sqrt(smin) * (1 - 1e-15))
        # sigma_min <= every column norm; sigma_max >= every column norm
        if min(col_max) <= self.alpha:
            return False
        if max(col_min) >= 1.0 / self.alpha:
            return False
        return True

    def centre_map(self, lo, hi):
        d = self.d
        c = [0.5 * (a + b) for a, b in zip(lo, hi)]
        T = [c[r * d:(r + 1) * d] for r in range(d)]
        return AffineMap(T, c[d * d:])

    def candidates(self, lo, hi):
        f = self.centre_map(lo, hi)
        yield f
        d = self.d
        if d == 1:
            return
        # centres of symmetric boxes are often singular: also try the centre
        # matrix with its singular values pulled into the band, clipped to the box
        C = np.array(f.matrix)
        U, sv, Vt = np.linalg.svd(C)
        s_lo, s_hi = self.alpha * 1.001, 1.0 / (self.alpha * 1.001)
        if sv[-1] > s_lo and sv[0] < s_hi:
            return
        P = (U * np.clip(sv, s_lo, s_hi)) @ Vt
        P = np.clip(P.reshape(-1), lo[:d * d], hi[:d * d]).reshape(d, d)
        yield AffineMap(P, f.shift)

    def try_centre(self, lo, hi):
        for f in self.candidates(lo, hi):
            if not all(self.cells.selected_open(f(a)) for a in self.pts):
                continue
            if verify_witness(f, self.A, self.E, self.alpha):
                return f
        return None

    def small(self, lo, hi):
        d = self.d
        rad = math.sqrt(sum((0.5 * (hi[i] - lo[i])) ** 2 for i in range(d * d)))
        if rad >= self.eps:
            return False
        for a in self.pts:
            ilo, ihi = self.image(lo, hi, a)
            if any(h - l >= self.eps for l, h in zip(ilo, ihi)):
                return False
        return True


def _root_boxes(d: int, alpha: float, shift=None):
    b = 1.0 / alpha
    if shift is None:
        xs_lo, xs_hi = [0.0] * d, [1.0] * d
    else:
        xs_lo, xs_hi = [float(v) for v in shift], [float(v) for v in shift]
    if d == 1:
        return [([alpha] + xs_lo, [b] + xs_hi), ([-b] + xs_lo, [-alpha] + xs_hi)]
    return [([-b] * (d * d) + xs_lo, [b] * (d * d) + xs_hi)]


def detect_bb(A: PointSet, E: GridSet, alpha: float, epsilon: float = 1e-4,
              budget: int = 10 ** 7, shift=None) -> DetectionResult:
    """Search T in the band and x in [0,1]^d (or the fixed ``shift``) with T A + x inside E."""
    if not 0.0 < alpha < 1.0:
        raise DomainError("alpha must lie in (0, 1)")
    if not epsilon > 0:
        raise DomainError("epsilon must be positive")
    if A.dim != E.dim:
        raise DomainError("dimension mismatch")
    t0 = time.perf_counter()
    prob = _Problem(A, E, alpha, epsilon)
    stack = _root_boxes(A.dim, alpha, shift)
    explored = 0

    def result(verdict, witness=None):
        return DetectionResult(verdict, witness, epsilon, explored, len(stack),
                               1000 * (time.perf_counter() - t0))

    if E.count() == 0:
        return result(NOT_FOUND)
    while stack:
        if explored >= budget:
            return result(INCONCLUSIVE)
        lo, hi = stack.pop()
        explored += 1
        if not prob.contract(lo, hi):
            continue
        w = prob.try_centre(lo, hi)
        if w is not None:
            return result(FOUND, w)
        if prob.small(lo, hi):
            continue
        i = max(range(len(lo)), key=lambda t: (hi[t] - lo[t]) * prob.weight[t])
        mid = 0.5 * (lo[i] + hi[i])
        if not lo[i] < mid < hi[i]:
            continue
        lo2, hi2 = list(lo), list(hi)
        hi[i] = mid
        lo2[i] = mid
        stack.append((lo2, hi2))
        stack.append((lo, hi))
    return result(NOT_FOUND)


# one-dimensional exact routes -------------------------------------------------------

def detect_1d_at_x(A: PointSet, E: GridSet, alpha: float, x: float) -> DetectionResult:
    """Exact decision at a fixed shift by testing one scalar per arrangement region."""
    if A.dim != 1 or E.dim != 1:
        raise DomainError("detect_1d_at_x needs d = 1")
    t0 = time.perf_counter()
    reps = representative_scalars_1d(x, A, E.L, alpha) if E.count() else []
    for lam in reps:
        f = AffineMap([[lam]], [x])
        if verify_witness(f, A, E, alpha):
            return DetectionResult(FOUND, f, None, len(reps), 0, 1000 * (time.perf_counter() - t0))
    return DetectionResult(NOT_FOUND, None, 0.0, len(reps), 0, 1000 * (time.perf_counter() - t0))


def exact_V_1d(A: PointSet, E: GridSet, alpha: float):
    """Shifts x in [0,1] admitting a band scalar with lambda*A + x inside E.

    Returns the merged open intervals and their total length.
    """
    if A.dim != 1 or E.dim != 1:
        raise DomainError("exact_V_1d needs d = 1")
    if E.count() == 0:
        return [], 0.0
    ivs = x_projection(copy_regions_1d(A, E, alpha))
    ivs = [(max(0.0, a), min(1.0, b)) for a, b in ivs if b > 0.0 and a < 1.0]
    return ivs, math.fsum(b - a for a, b in ivs)


def sample_witness_search(A: PointSet, E: GridSet, alpha: float, trials: int, seed: int):
    """Random band maps filtered by exact verification; returns (witness or None, trials used)."""
    rng = random.Random(seed)
    d = A.dim
    b = 1.0 / alpha
    for t in range(1, trials + 1):
        if d == 1:
            T = [[rng.choice((-1, 1)) * rng.uniform(alpha, b)]]
        else:
            T = [[rng.uniform(-b, b) for _ in range(d)] for _ in range(d)]
        x = [rng.random() for _ in range(d)]
        f = AffineMap(T, x)
        if all(contains_open(E, f(a)) for a in A) and verify_witness(f, A, E, alpha):
            return f, t
    return None, trials
