"""Finite point-set families A_1, A_2, ... and the -log(delta)/#A_n report."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence, Union

import numpy as np

from .errors import DomainError, SearchExhausted
from .geometry import PointSet, delta, norm

Rule = Union[Callable[[int], float], Sequence[float]]

EPS = np.finfo(float).eps


def _term(seq, n: int):
    """n-th term (1-indexed) of a callable rule or an explicit sequence."""
    if callable(seq):
        return seq(n)
    if n - 1 >= len(seq):
        raise DomainError(f"sequence has no term {n}")
    return seq[n - 1]


@dataclass(frozen=True)
class SequenceFamily:
    dim: int
    generator: Callable[[int], PointSet] = field(repr=False)
    label: str
    params: dict = field(default_factory=dict)

    def __call__(self, n: int) -> PointSet:
        A = self.generator(n)
        if A.contains_origin():
            raise DomainError(f"{self.label}: A_{n} contains the origin")
        return A


@dataclass(frozen=True)
class ConditionRow:
    n: int
    k_n: int
    delta_n: float
    score: float


# families --------------------------------------------------------------------

def gen_polygon_family(radii: Rule, jitter: float = 0.0) -> SequenceFamily:
    """A_n = vertices of a regular (n+1)-gon of radius a_n.

    ``jitter`` > 0 scales vertex j radially by ``1 + jitter*j/(n+1)`` so
    that all norms inside A_n become distinct.
    """

    def gen(n: int) -> PointSet:
        a = float(_term(radii, n))
        if not a > 0:
            raise DomainError(f"radius a_{n} = {a} must be positive")
        m = n + 1
        pts = []
        for j in range(m):
            r = a * (1.0 + jitter * j / m)
            t = 2.0 * math.pi * j / m
            pts.append((r * math.cos(t), r * math.sin(t)))
        return PointSet(tuple(pts))

    return SequenceFamily(2, gen, "polygon", {"jitter": jitter})


def product_delta(rho: float, n: int) -> float:
    return rho ** (n - 1) * (1.0 - rho)


def gen_product_family(r_seq: Rule, rho_seq: Rule, normalize: bool = False,
                       check_r: str = "warn") -> SequenceFamily:
    """A_n = {c_n rho_n^k : k = 0..n} with c_n = r_1...r_n rho_1 rho_2^2 ... rho_{n-1}^{n-1}.

    ``normalize`` drops the prefactor c_n (so the largest point is 1); the
    relative separation is unchanged. ``check_r`` is ``"warn"``, ``"raise"``
    or ``"ignore"`` for a non-decreasing r_n.
    """

    def rho_at(j):
        v = float(_term(rho_seq, j))
        if not 0.0 < v < 1.0:
            raise DomainError(f"rho_{j} = {v} outside (0, 1)")
        return v

    def gen(n: int) -> PointSet:
        rho = rho_at(n)
        if normalize:
            c = 1.0
        else:
            logc = 0.0
            prev = None
            for i in range(1, n + 1):
                r = float(_term(r_seq, i))
                if not 0.0 < r < 1.0:
                    raise DomainError(f"r_{i} = {r} outside (0, 1)")
                if prev is not None and r >= prev and check_r != "ignore":
                    msg = f"r_n is not strictly decreasing at n = {i}"
                    if check_r == "raise":
                        raise DomainError(msg)
                    warnings.warn(msg)
                prev = r
                logc += math.log(r)
            logc += sum(j * math.log(rho_at(j)) for j in range(1, n))
            c = math.exp(logc)
            if c < np.finfo(float).tiny:
                raise DomainError(f"prefactor of A_{n} underflows; use normalize=True")
        A = PointSet.from_scalars(c * rho ** k for k in range(n + 1))
        if n >= 1:
            expect = product_delta(rho, n)
            got = delta(A)
            tol = 1e-12 + 16 * EPS / (1.0 - rho)
            if abs(got - expect) > tol * expect:
                raise ArithmeticError(f"delta(A_{n}) = {got} disagrees with {expect}")
        return A

    return SequenceFamily(1, gen, "product", {"normalize": normalize})


def rate_condition(rho_seq: Rule, n_max: int) -> list:
    """Values log(1 - rho_n)/n for n = 1..n_max (descriptive)."""
    return [math.log1p(-float(_term(rho_seq, n))) / n for n in range(1, n_max + 1)]


def gen_sphere_family(norms: Rule, directions: Rule) -> SequenceFamily:
    """Element k is a_k u_k; A_n is the prefix of the first n+1 elements."""

    def element(k):
        a = float(_term(norms, k))
        u = tuple(float(c) for c in _term(directions, k))
        if not a > 0:
            raise DomainError(f"norm a_{k} must be positive")
        if abs(norm(u) - 1.0) > 1e-12:
            raise DomainError(f"direction u_{k} is not a unit vector")
        return tuple(a * c for c in u)

    dim = len(tuple(_term(directions, 1)))

    def gen(n: int) -> PointSet:
        return PointSet(tuple(element(k) for k in range(1, n + 2)))

    return SequenceFamily(dim, gen, "sphere")


def gen_geometric_family(ratio: float) -> SequenceFamily:
    """A_n = {r, r^2, ..., r^n}: fails the separation condition."""
    if not 0.0 < ratio < 1.0:
        raise DomainError("ratio must lie in (0, 1)")

    def gen(n: int) -> PointSet:
        return PointSet.from_scalars(ratio ** j for j in range(1, n + 1))

    return SequenceFamily(1, gen, "geometric", {"ratio": ratio})


# annulus selection -------------------------------------------------------------

@dataclass(frozen=True)
class AnnulusSelection:
    indices: tuple
    rho: float
    m: int
    k0: int

    def lower_bound(self) -> float:
        n = len(self.indices) - 1
        return self.rho ** (2 * n - 1) * (1.0 - self.rho)


class _NormCache:
    def __init__(self, norm_fn, budget):
        self.fn = norm_fn
        self.budget = budget
        self.vals = np.empty(0)

    def upto(self, count):
        count = min(count, self.budget)
        if count > len(self.vals):
            extra = [float(self.fn(k)) for k in range(len(self.vals) + 1, count + 1)]
            self.vals = np.concatenate([self.vals, extra])
        return self.vals


def select_annulus_subsequence(norm_fn: Callable[[int], float], n: int, window: int = 64,
                               scan_budget: int = 10 ** 6) -> AnnulusSelection:
    """Pick n+1 indices whose norms fall into alternate annuli [rho^(m+j), rho^(m+j-1)).

    ``norm_fn(k)`` is the norm of the k-th element (1-indexed). Within each
    annulus the smallest qualifying index is taken; k0 is the first index
    from which ``window`` consecutive ratios exceed rho.
    """
    if n < 1:
        raise DomainError("n must be at least 1")
    rho = -math.expm1(-math.sqrt(n))
    cache = _NormCache(norm_fn, scan_budget)

    k0 = None
    size = 1024
    while k0 is None:
        vals = cache.upto(size + window + 1)
        if np.any(vals <= 0) or not np.all(np.isfinite(vals)):
            raise SearchExhausted("norms must stay positive and finite")
        good = vals[1:] / vals[:-1] > rho
        run = np.convolve(good.astype(np.int64), np.ones(window, dtype=np.int64), "valid")
        hits = np.flatnonzero(run == window)
        if hits.size:
            k0 = int(hits[0]) + 1
        elif len(vals) >= scan_budget:
            raise SearchExhausted(f"no k0 with ratios > {rho:.6g} within {scan_budget} terms")
        else:
            size *= 4

    x0 = cache.vals[k0 - 1]
    m = max(1, math.ceil(math.log(x0) / math.log(rho)))
    while rho ** m > x0:
        m += 1
    while m > 1 and rho ** (m - 1) <= x0:
        m -= 1

    indices = []
    for j in range(1, 2 * n + 2, 2):
        lo, hi = rho ** (m + j), rho ** (m + j - 1)
        found = None
        size = max(len(cache.vals), 1024)
        while found is None:
            vals = cache.upto(size)
            hit = np.flatnonzero((vals >= lo) & (vals < hi))
            if hit.size:
                found = int(hit[0]) + 1
            elif len(vals) >= scan_budget:
                raise SearchExhausted(f"annulus {j} is empty within {scan_budget} terms")
            else:
                size *= 4
        indices.append(found)
    return AnnulusSelection(tuple(indices), rho, m, k0)


def gen_annulus_family(vector_fn: Callable[[int], Sequence[float]], window: int = 64,
                       scan_budget: int = 10 ** 6) -> SequenceFamily:
    """A_n built from a vector sequence by annulus selection."""
    first = tuple(float(c) for c in vector_fn(1))

    def gen(n: int) -> PointSet:
        sel = select_annulus_subsequence(lambda k: norm(vector_fn(k)), n, window, scan_budget)
        A = PointSet(tuple(tuple(vector_fn(k)) for k in sel.indices))
        bound = sel.lower_bound()
        if delta(A) < bound * (1 - 1e-12):
            raise ArithmeticError(f"delta(A_{n}) below the annulus lower bound {bound}")
        return A

    return SequenceFamily(len(first), gen, "annulus", {"window": window})


# reporting -------------------------------------------------------------------

def condition_report(family: SequenceFamily, n_max: int) -> list:
    """One row per n <= n_max whose A_n has at least two points."""
    if n_max < 1:
        raise DomainError("n_max must be at least 1")
    rows = []
    for n in range(1, n_max + 1):
        A = family(n)
        if len(A) < 2:
            continue
        d = delta(A)
        rows.append(ConditionRow(n, len(A), d, -math.log(d) / len(A)))
    return rows
