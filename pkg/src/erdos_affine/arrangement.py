"""Hyperplane arrangements: region counts, representatives, and the exact
one-dimensional copy regions in the (lambda, x) parameter plane."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError
from .geometry import PointSet, norm
from .grid import GridSet


def buck_bound(num_hyperplanes: int, ambient_dim: int) -> int:
    """Maximum number of regions cut from R^m by n hyperplanes."""
    if num_hyperplanes < 0 or ambient_dim < 0:
        raise DomainError("counts must be nonnegative")
    return sum(math.comb(num_hyperplanes, k) for k in range(ambient_dim + 1))


def lemma_constant(d: int, alpha: float) -> float:
    """(d^2 + 1) (8d/alpha)^(d^2)."""
    return (d * d + 1) * (8 * d / alpha) ** (d * d)


@dataclass(frozen=True)
class Hyperplane:
    """The set {y : normal . y + offset = 0} with a unit normal."""

    normal: tuple
    offset: float

    @classmethod
    def through(cls, normal: Sequence[float], offset: float) -> "Hyperplane":
        s = norm(normal)
        if s == 0:
            raise DomainError("zero normal")
        return cls(tuple(c / s for c in normal), offset / s)

    def side(self, y: Sequence[float]) -> float:
        return sum(a * b for a, b in zip(self.normal, y)) + self.offset


@dataclass(frozen=True)
class Region:
    sign_vector: tuple
    representative: tuple


def _signs(planes, y):
    return tuple("+" if h.side(y) > 0 else "-" for h in planes)


def enumerate_regions_1d(breakpoints: Iterable[float]) -> list:
    bs = sorted(set(float(b) for b in breakpoints))
    if not bs:
        return [Region((), (0.0,))]
    reps = [bs[0] - 1.0]
    reps += [0.5 * (a + b) for a, b in zip(bs, bs[1:])]
    reps.append(bs[-1] + 1.0)
    planes = [Hyperplane((1.0,), -b) for b in bs]
    return [Region(_signs(planes, (r,)), (r,)) for r in reps]


# convex polygons -------------------------------------------------------------

def clip_halfplane(poly: list, c0: float, c1: float, c2: float) -> list:
    """Part of a convex polygon where c0 + c1*u + c2*v >= 0."""
    out = []
    n = len(poly)
    if n == 0:
        return out
    vals = [c0 + c1 * u + c2 * v for u, v in poly]
    for i in range(n):
        p, fp = poly[i], vals[i]
        q, fq = poly[(i + 1) % n], vals[(i + 1) % n]
        if fp >= 0:
            out.append(p)
        if (fp > 0 > fq) or (fp < 0 < fq):
            t = fp / (fp - fq)
            out.append((p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])))
    return out


def polygon_area(poly: list) -> float:
    s = 0.0
    n = len(poly)
    for i in range(n):
        u0, v0 = poly[i]
        u1, v1 = poly[(i + 1) % n]
        s += u0 * v1 - u1 * v0
    return 0.5 * s


def centroid(poly: list) -> tuple:
    n = len(poly)
    return (sum(p[0] for p in poly) / n, sum(p[1] for p in poly) / n)


def enumerate_regions_2d(lines: Sequence[Hyperplane], bbox: tuple):
    """Regions of ``bbox`` minus the lines, by incremental splitting.

    ``bbox`` is ``(xmin, xmax, ymin, ymax)``. Returns ``(count, regions)``.
    """
    xmin, xmax, ymin, ymax = (float(v) for v in bbox)
    if not (xmax > xmin and ymax > ymin):
        raise DomainError("degenerate bounding box")
    scale = max(abs(xmin), abs(xmax), abs(ymin), abs(ymax), 1.0)
    tol = 1e-12 * scale
    min_area = 1e-18 * (xmax - xmin) * (ymax - ymin)
    polys = [[(xmin, ymin), (xmax, ymin), (xmax, ymax), (xmin, ymax)]]
    for h in lines:
        if len(h.normal) != 2:
            raise DomainError("enumerate_regions_2d needs lines in the plane")
        a, b = h.normal
        c = h.offset
        nxt = []
        for poly in polys:
            vals = [a * u + b * v + c for u, v in poly]
            if max(vals) > tol and min(vals) < -tol:
                for piece in (clip_halfplane(poly, c, a, b), clip_halfplane(poly, -c, -a, -b)):
                    if len(piece) >= 3 and polygon_area(piece) > min_area:
                        nxt.append(piece)
            else:
                nxt.append(poly)
        polys = nxt
    regions = []
    for poly in polys:
        rep = centroid(poly)
        regions.append(Region(_signs(lines, rep), rep))
    return len(regions), regions


# Lemma-style windows and representatives ---------------------------------------

@dataclass(frozen=True)
class LambdaWindow:
    ell: int
    i: int
    js: tuple


def _dec(v) -> Fraction:
    return Fraction(repr(float(v)))


def lambda_windows(x: Sequence[float], A: PointSet, L: int, alpha: float) -> list:
    """Grid-line indices j with dist(x, {y_ell = j/L}) < |a_i|/alpha + 1/L."""
    if len(x) != A.dim:
        raise DomainError("dimension mismatch")
    # inputs are read as their shortest decimal strings, so that e.g. 0.1 means 1/10
    out = []
    a_inv = 1 / _dec(alpha)
    for ell in range(A.dim):
        xl = _dec(x[ell]) * L
        for i, a in enumerate(A):
            radius = _dec(norm(a)) * a_inv * L + 1
            js = tuple(j for j in range(L + 1) if abs(xl - j) < radius)
            out.append(LambdaWindow(ell + 1, i + 1, js))
    total = sum(len(w.js) for w in out)
    M = A.max_norm()
    if 2 * M * L >= 1:
        limit = 8 * A.dim * M * L * len(A) / alpha
        assert total <= limit, f"{total} hyperplanes exceed {limit}"
    return out


def _band_intervals(alpha: float):
    a = Fraction(alpha)
    return [(-1 / a, -a), (a, 1 / a)]


def representative_scalars_1d(x: float, A: PointSet, L: int, alpha: float) -> list:
    """One scalar per region of the band cut by lambda = (j/L - x)/a_i."""
    if A.dim != 1:
        raise DomainError("representative_scalars_1d needs d = 1")
    if any(a[0] == 0 for a in A):
        raise DomainError("points must be nonzero")
    xf = Fraction(x)
    bps = set()
    for w in lambda_windows((x,), A, L, alpha):
        ai = Fraction(A[w.i - 1][0])
        for j in w.js:
            bps.add((Fraction(j, L) - xf) / ai)
    reps = []
    for lo, hi in _band_intervals(alpha):
        cuts = [lo] + sorted(b for b in bps if lo < b < hi) + [hi]
        reps += [float((u + v) / 2) for u, v in zip(cuts, cuts[1:])]
    M = A.max_norm()
    if 2 * M * L >= 1:
        bound = lemma_constant(1, alpha) * L * M * len(A)
        assert len(reps) <= bound, f"{len(reps)} representatives exceed {bound}"
    return reps


# copy regions in the (lambda, x) plane -------------------------------------------

def band_rectangles(alpha: float, x_range=(0.0, 1.0)) -> list:
    lo, hi = alpha, 1.0 / alpha
    x0, x1 = x_range
    return [
        [(-hi, x0), (-lo, x0), (-lo, x1), (-hi, x1)],
        [(lo, x0), (hi, x0), (hi, x1), (lo, x1)],
    ]


def _chain_order(values: Sequence[float]) -> list:
    return sorted(range(len(values)), key=lambda i: -values[i])


def copy_regions_1d(A: PointSet, E: GridSet, alpha: float, seeds=None) -> list:
    """Open convex polygons whose union is the set of (lambda, x) with
    lambda in the band, x in [0,1] and lambda*A + x inside E.

    Each polygon fixes the cell that every point lands in; polygons are
    pairwise disjoint. ``seeds`` optionally restricts the search to given
    starting polygons (each must lie inside the band rectangles).
    """
    if A.dim != 1 or E.dim != 1:
        raise DomainError("copy_regions_1d needs d = 1")
    L = E.L
    sel = E.bits
    vals = [a[0] for a in A]
    order = _chain_order(vals)
    k = len(vals)
    min_area = 1e-12 / (L * L) * max(1.0, max(abs(v) for v in vals)) ** -1
    out = []
    stack = [(poly, 0) for poly in (seeds if seeds is not None else band_rectangles(alpha))]
    while stack:
        poly, m = stack.pop()
        if m == k:
            out.append(poly)
            continue
        a = vals[order[m]]
        fs = [a * u + v for u, v in poly]
        jlo = max(0, math.floor(min(fs) * L))
        jhi = min(L - 1, math.ceil(max(fs) * L) - 1)
        for j in range(jlo, jhi + 1):
            if not sel[j]:
                continue
            piece = clip_halfplane(poly, -j / L, a, 1.0)
            if len(piece) < 3:
                continue
            piece = clip_halfplane(piece, (j + 1) / L, -a, -1.0)
            if len(piece) >= 3 and polygon_area(piece) > min_area:
                stack.append((piece, m + 1))
    return out


def polygons_to_json(polys: list) -> list:
    res = []
    for poly in polys:
        pts = [list(p) for p in poly]
        if polygon_area(poly) < 0:
            pts.reverse()
        res.append({"vertices": pts})
    return res


def x_projection(polys: list) -> list:
    """Disjoint open x-intervals covered by the polygons, merged where they touch."""
    spans = sorted((min(p[1] for p in poly), max(p[1] for p in poly)) for poly in polys)
    merged = []
    for lo, hi in spans:
        if merged and lo <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], hi)
        else:
            merged.append([lo, hi])
    return [tuple(iv) for iv in merged]
