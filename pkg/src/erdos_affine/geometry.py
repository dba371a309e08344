"""Vectors, point sets, affine maps and singular-value predicates.

Singular values are certified with exact rational arithmetic: the
characteristic polynomial of ``T^T T`` is built over ``Fraction`` and,
because it is real-rooted, Descartes' rule of signs applied to its Taylor
shift counts eigenvalues above any rational threshold exactly.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError

Point = tuple  # tuple of d floats


def as_point(coords: Iterable[float]) -> Point:
    p = tuple(float(c) for c in coords)
    if not p:
        raise DomainError("a point needs at least one coordinate")
    if not all(math.isfinite(c) for c in p):
        raise DomainError(f"non-finite coordinate in {p}")
    return p


def norm(p: Sequence[float]) -> float:
    return math.hypot(*p)


@dataclass(frozen=True)
class PointSet:
    """A finite ordered set of distinct points of R^d."""

    points: tuple

    def __post_init__(self):
        pts = tuple(as_point(p) for p in self.points)
        if not pts:
            raise DomainError("a point set must be nonempty")
        d = len(pts[0])
        if any(len(p) != d for p in pts):
            raise DomainError("points have mixed dimensions")
        if len(set(pts)) != len(pts):
            raise DomainError("points must be pairwise distinct")
        object.__setattr__(self, "points", pts)

    @classmethod
    def from_scalars(cls, values: Iterable[float]) -> "PointSet":
        return cls(tuple((float(v),) for v in values))

    @property
    def dim(self) -> int:
        return len(self.points[0])

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def __getitem__(self, i):
        return self.points[i]

    def array(self) -> np.ndarray:
        return np.array(self.points, dtype=float)

    def max_norm(self) -> float:
        return max(norm(p) for p in self.points)

    def min_norm(self) -> float:
        return min(norm(p) for p in self.points)

    def contains_origin(self) -> bool:
        return any(all(c == 0.0 for c in p) for p in self.points)

    def with_origin(self) -> "PointSet":
        if self.contains_origin():
            return self
        return PointSet(self.points + ((0.0,) * self.dim,))

    def dumps(self) -> str:
        lines = [f"d={self.dim} k={len(self)}"]
        lines += [" ".join(repr(c) for c in p) for p in self.points]
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> "PointSet":
        lines = [ln for ln in text.strip().splitlines() if ln.strip()]
        if not lines:
            raise DomainError("empty point-set file")
        try:
            head = dict(tok.split("=") for tok in lines[0].split())
            d, k = int(head["d"]), int(head["k"])
            rows = [tuple(float(t) for t in ln.split()) for ln in lines[1:]]
        except (ValueError, KeyError) as exc:
            raise DomainError(f"malformed point-set file: {exc}") from None
        if len(rows) != k or any(len(r) != d for r in rows):
            raise DomainError("point-set header does not match its rows")
        return cls(tuple(rows))


def delta(A: PointSet) -> float:
    """Minimum pairwise distance over maximum norm."""
    if len(A) < 2:
        raise DomainError("delta needs at least two points")
    m = A.max_norm()
    if m == 0.0:
        raise DomainError("delta undefined when every point is the origin")
    if A.dim == 1:
        xs = sorted(p[0] for p in A)
        gap = min(b - a for a, b in zip(xs, xs[1:]))
    else:
        gap = min(math.dist(p, q) for p, q in combinations(A.points, 2))
    return gap / m


@dataclass(frozen=True)
class AffineMap:
    """The map a -> T a + x."""

    matrix: tuple
    shift: Point

    def __post_init__(self):
        T = tuple(tuple(float(v) for v in row) for row in np.atleast_2d(np.asarray(self.matrix, dtype=float)))
        x = as_point(np.atleast_1d(np.asarray(self.shift, dtype=float)))
        d = len(x)
        if len(T) != d or any(len(r) != d for r in T):
            raise DomainError("matrix and shift dimensions disagree")
        if not all(math.isfinite(v) for r in T for v in r):
            raise DomainError("non-finite matrix entry")
        object.__setattr__(self, "matrix", T)
        object.__setattr__(self, "shift", x)

    @property
    def dim(self) -> int:
        return len(self.shift)

    def __call__(self, a: Sequence[float]) -> Point:
        return tuple(
            math.fsum([*(t * ai for t, ai in zip(row, a)), xi])
            for row, xi in zip(self.matrix, self.shift)
        )

    def exact_image(self, a: Sequence[float]) -> tuple:
        """T a + x in exact rationals."""
        return tuple(
            sum((Fraction(t) * Fraction(ai) for t, ai in zip(row, a)), Fraction(xi))
            for row, xi in zip(self.matrix, self.shift)
        )

    def to_json(self) -> dict:
        return {"matrix": [list(r) for r in self.matrix], "shift": list(self.shift)}


def apply_affine(f: AffineMap, A: PointSet) -> PointSet:
    if f.dim != A.dim:
        raise DomainError(f"map acts on R^{f.dim}, points live in R^{A.dim}")
    return PointSet(tuple(f(a) for a in A))


def normalize_origin(A: PointSet, pivot_index: int):
    """Translate ``A`` so the pivot sits at the origin.

    Returns the translated set and ``C/(C + |a0|)`` where ``C`` is the least
    norm in ``A``; the translated set then has relative separation at least
    that constant times the original one.
    """
    a0 = A[pivot_index]
    shifted = PointSet(tuple(tuple(c - c0 for c, c0 in zip(p, a0)) for p in A))
    C = A.min_norm()
    if C == 0.0:
        warnings.warn("origin already in the set: the normalisation constant degenerates to 0")
        return shifted, 0.0
    return shifted, C / (C + norm(a0))


# singular values -------------------------------------------------------------

@dataclass(frozen=True)
class SigmaBounds:
    sigma_min_lo: float
    sigma_min_hi: float
    sigma_max_lo: float
    sigma_max_hi: float


def _as_matrix(T) -> np.ndarray:
    M = np.atleast_2d(np.asarray(T, dtype=float))
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DomainError("expected a square matrix")
    if not np.all(np.isfinite(M)):
        raise DomainError("non-finite matrix entry")
    return M


def _gram_charpoly(M: np.ndarray) -> list:
    """Coefficients c[0..d] (constant first) of det(t I - M^T M), exact."""
    d = M.shape[0]
    F = [[Fraction(float(v)) for v in row] for row in M]
    G = [[sum(F[k][i] * F[k][j] for k in range(d)) for j in range(d)] for i in range(d)]
    # Faddeev-LeVerrier
    coeffs = [Fraction(0)] * (d + 1)
    coeffs[d] = Fraction(1)
    Mk = [[Fraction(0)] * d for _ in range(d)]
    for k in range(1, d + 1):
        prev = coeffs[d - k + 1]
        Mk = [
            [sum(G[i][r] * Mk[r][j] for r in range(d)) + (prev if i == j else 0) for j in range(d)]
            for i in range(d)
        ]
        tr = sum(sum(G[i][r] * Mk[r][i] for r in range(d)) for i in range(d))
        coeffs[d - k] = -tr / k
    return coeffs


def _taylor_shift(coeffs: list, x: Fraction) -> list:
    c = list(coeffs)
    n = len(c) - 1
    for i in range(n):
        for j in range(n - 1, i - 1, -1):
            c[j] += x * c[j + 1]
    return c


def _roots_above(coeffs: list, x: Fraction) -> tuple:
    """(# roots > x, # roots == x) of a real-rooted polynomial."""
    q = _taylor_shift(coeffs, x)
    at = 0
    while at < len(q) and q[at] == 0:
        at += 1
    nz = [v for v in q[at:] if v != 0]
    changes = sum(1 for a, b in zip(nz, nz[1:]) if (a > 0) != (b > 0))
    return changes, at


class _Gram:
    """Exact eigenvalue counting for M^T M."""

    def __init__(self, M: np.ndarray):
        self.d = M.shape[0]
        self.coeffs = _gram_charpoly(M)

    def count_gt(self, t: Fraction) -> int:
        return _roots_above(self.coeffs, t)[0]

    def count_ge(self, t: Fraction) -> int:
        gt, eq = _roots_above(self.coeffs, t)
        return gt + eq

    def min_at_least(self, s: float) -> bool:
        return s <= 0 or self.count_ge(Fraction(s) ** 2) == self.d

    def min_at_most(self, s: float) -> bool:
        return self.count_gt(Fraction(s) ** 2) < self.d

    def max_at_least(self, s: float) -> bool:
        return s <= 0 or self.count_ge(Fraction(s) ** 2) >= 1

    def max_at_most(self, s: float) -> bool:
        return self.count_gt(Fraction(s) ** 2) == 0


def _certify(lo_test, hi_test, guess: float, scale: float, upper: float) -> tuple:
    t = 2e-11 * scale
    for _ in range(8):
        lo, hi = max(0.0, guess - t), guess + t
        if lo_test(lo) and hi_test(hi):
            return lo, hi
        t *= 8
    lo, hi = 0.0, upper
    while hi - lo > 4e-11 * scale:
        mid = 0.5 * (lo + hi)
        if lo_test(mid):
            lo = mid
        else:
            hi = mid
    return lo, hi


def op_norm_bounds(T) -> SigmaBounds:
    """Certified enclosures of the smallest and largest singular values."""
    M = _as_matrix(T)
    if M.shape[0] == 1:
        s = abs(float(M[0, 0]))
        return SigmaBounds(s, s, s, s)
    s = np.linalg.svd(M, compute_uv=False)
    smax, smin = float(s[0]), float(s[-1])
    scale = 1.0 + smax
    fro = float(np.sqrt(np.sum(M * M))) * (1 + 1e-12) + 1e-300
    g = _Gram(M)
    mn = _certify(g.min_at_least, g.min_at_most, smin, scale, fro)
    mx = _certify(g.max_at_least, g.max_at_most, smax, scale, fro)
    return SigmaBounds(mn[0], mn[1], mx[0], mx[1])


def in_operator_band(T, alpha: float) -> bool:
    """Whether alpha < sigma_min(T) and sigma_max(T) < 1/alpha, decided exactly."""
    if not 0.0 < alpha < 1.0:
        raise DomainError("alpha must lie in (0, 1)")
    M = _as_matrix(T)
    a = Fraction(alpha)
    if M.shape[0] == 1:
        lam = abs(Fraction(float(M[0, 0])))
        return a < lam < 1 / a
    g = _Gram(M)
    return g.count_gt(a * a) == g.d and g.count_ge(1 / (a * a)) == 0
