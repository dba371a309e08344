"""Random unions of open subcubes of [0,1]^d.

Cell ``(j_1, ..., j_d)`` is the open box ``prod (j_i/L, (j_i+1)/L)`` and has
linear index ``j_1 L^(d-1) + ... + j_d`` (C order, ``j_d`` fastest).

Per-cell randomness is counter based and stateless::

    key  = mix64(seed ^ mix64(n + GOLDEN))
    h(i) = mix64(key + (i + 1) * GOLDEN)      (all arithmetic mod 2^64)
    bit(i) = h(i) < ceil(p * 2^64)

where ``mix64`` is the SplitMix64 finaliser. A cell therefore depends only
on ``(seed, n, i)``, so any split of the index range gives the same grid.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Optional

import numpy as np

from .errors import DomainError, ResourceError
from .geometry import PointSet, delta

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
DEFAULT_MAX_CELLS = 1 << 30
_CHUNK = 1 << 22

ON_BOUNDARY = "on_boundary"
OUTSIDE = "outside"


def mix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def _mix64_array(z: np.ndarray) -> np.ndarray:
    z = z ^ (z >> np.uint64(30))
    z = z * np.uint64(0xBF58476D1CE4E5B9)
    z = z ^ (z >> np.uint64(27))
    z = z * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


def stream_key(seed: int, n: int) -> int:
    return mix64((seed & MASK64) ^ mix64(n + GOLDEN))


def cell_hashes(seed: int, n: int, start: int, stop: int) -> np.ndarray:
    key = np.uint64(stream_key(seed, n))
    i = np.arange(start + 1, stop + 1, dtype=np.uint64)
    return _mix64_array(key + i * np.uint64(GOLDEN))


def derive_seed(master: int, i: int) -> int:
    """Independent 64-bit substream seed for sample ``i``."""
    return mix64(mix64(master) ^ mix64(i + 1))


# stage parameters ---------------------------------------------------------------

@dataclass(frozen=True)
class StageParams:
    n: int
    dim: int
    alpha: float
    k_n: int
    delta_n: float
    M_n: float
    L_n: int
    p_n: float
    slack: float

    @property
    def cells(self) -> int:
        return self.L_n ** self.dim

    def with_p(self, p: float) -> "StageParams":
        return replace(self, p_n=p)

    def to_json(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def log_p_threshold(d: int, delta_n: float, k_n: int, slack: float) -> float:
    return (d * d * math.log(delta_n) - (d * d + 1 + slack) * math.log(k_n)) / k_n


def grid_resolution(d: int, alpha: float, M: float, delta_n: float) -> int:
    """ceil(d / (alpha M delta)) evaluated exactly on the given floats."""
    den = Fraction(alpha) * Fraction(M) * Fraction(delta_n)
    if den <= 0:
        raise DomainError("alpha, M and delta must be positive")
    return math.ceil(Fraction(d) / den)


def stage_params(A: PointSet, alpha: float, slack: float = 1.0, n: int = 0) -> StageParams:
    if not 0.0 < alpha < 1.0:
        raise DomainError("alpha must lie in (0, 1)")
    if len(A) < 2:
        raise DomainError("a stage needs at least two points")
    if A.contains_origin():
        raise DomainError("the stage point set must exclude the origin")
    if not slack > 0:
        raise DomainError("slack must be positive")
    d = A.dim
    k = len(A)
    dl = delta(A)
    M = A.max_norm()
    L = grid_resolution(d, alpha, M, dl)
    p = math.exp(log_p_threshold(d, dl, k, slack))
    p = min(max(p, np.nextafter(0.0, 1.0)), np.nextafter(1.0, 0.0))
    return StageParams(n, d, alpha, k, dl, M, L, p, slack)


# grids ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class GridSet:
    dim: int
    L: int
    bits: np.ndarray = field(repr=False)
    seed: Optional[int] = None

    def __post_init__(self):
        b = np.ascontiguousarray(self.bits, dtype=bool).reshape(-1)
        if b.size != self.L ** self.dim:
            raise DomainError(f"expected {self.L ** self.dim} cells, got {b.size}")
        b.flags.writeable = False
        object.__setattr__(self, "bits", b)

    def __eq__(self, other):
        return (isinstance(other, GridSet) and self.dim == other.dim and self.L == other.L
                and np.array_equal(self.bits, other.bits))

    @classmethod
    def full(cls, dim: int, L: int, value: bool = True) -> "GridSet":
        return cls(dim, L, np.full(L ** dim, value, dtype=bool))

    @classmethod
    def from_cells(cls, dim: int, L: int, cells) -> "GridSet":
        bits = np.zeros((L,) * dim, dtype=bool)
        for c in cells:
            bits[tuple(np.atleast_1d(c))] = True
        return cls(dim, L, bits)

    def cube(self) -> np.ndarray:
        return self.bits.reshape((self.L,) * self.dim)

    def count(self) -> int:
        return int(np.count_nonzero(self.bits))

    def __getitem__(self, cell) -> bool:
        return bool(self.cube()[tuple(np.atleast_1d(cell))])

    def selected_cells(self) -> np.ndarray:
        return np.argwhere(self.cube())

    def dumps(self) -> str:
        seed = "none" if self.seed is None else str(self.seed)
        body = np.where(self.bits, ord("1"), ord("0")).astype(np.uint8).tobytes().decode()
        return f"ERDGRID v1 d={self.dim} L={self.L} seed={seed}\n{body}\n"

    @classmethod
    def loads(cls, text: str) -> "GridSet":
        lines = text.split("\n")
        head = lines[0].split()
        try:
            if head[:2] != ["ERDGRID", "v1"]:
                raise ValueError("bad magic")
            kv = dict(tok.split("=") for tok in head[2:])
            d, L = int(kv["d"]), int(kv["L"])
            seed = None if kv["seed"] == "none" else int(kv["seed"])
            body = lines[1].strip() if len(lines) > 1 else ""
        except (ValueError, KeyError, IndexError) as exc:
            raise DomainError(f"malformed grid file: {exc}") from None
        if len(body) != L ** d or set(body) - {"0", "1"}:
            raise DomainError("malformed grid body")
        bits = np.frombuffer(body.encode(), dtype=np.uint8) == ord("1")
        return cls(d, L, bits.copy(), seed)

    def to_pbm(self) -> str:
        if self.dim != 2:
            raise DomainError("PBM export needs d = 2")
        # image row r, column c <-> cell (j1 = c, j2 = L-1-r); selected cells white
        img = 1 - self.cube().T[::-1].astype(np.uint8)
        rows = [" ".join(map(str, r)) for r in img]
        return f"P1\n{self.L} {self.L}\n" + "\n".join(rows) + "\n"


def _check_cap(cells: int, max_cells: int):
    if cells > max_cells:
        raise ResourceError(f"{cells} cells exceed the cap of {max_cells}")


def sample_grid(params: StageParams, seed: int, max_cells: int = DEFAULT_MAX_CELLS) -> GridSet:
    total = params.L_n ** params.dim
    _check_cap(total, max_cells)
    p = params.p_n
    bits = np.empty(total, dtype=bool)
    if p >= 1.0:
        bits[:] = True
    elif p <= 0.0:
        bits[:] = False
    else:
        thresh = math.ceil(p * 2.0 ** 64)
        for s in range(0, total, _CHUNK):
            e = min(total, s + _CHUNK)
            if thresh > MASK64:
                bits[s:e] = True
            else:
                bits[s:e] = cell_hashes(seed, params.n, s, e) < np.uint64(thresh)
    return GridSet(params.dim, params.L_n, bits, seed & MASK64)


def measure(E: GridSet) -> Fraction:
    return Fraction(E.count(), E.L ** E.dim)


def locate(p, L: int):
    """The open cell containing ``p``, or ``ON_BOUNDARY`` / ``OUTSIDE``."""
    cell = []
    boundary = False
    for c in p:
        t = Fraction(c) * L
        if t < 0 or t > L:
            return OUTSIDE
        if t.denominator == 1:
            boundary = True
        cell.append(min(int(t), L - 1))
    return ON_BOUNDARY if boundary else tuple(cell)


def contains_open(E: GridSet, p) -> bool:
    if len(p) != E.dim:
        raise DomainError("point and grid dimensions differ")
    c = locate(p, E.L)
    return isinstance(c, tuple) and E[c]


def refine(E: GridSet, factor: int, max_cells: int = DEFAULT_MAX_CELLS) -> GridSet:
    """Subdivide each cell ``factor`` times per axis, keeping only subcells
    that do not touch the boundary of a selected parent."""
    if factor < 1:
        raise DomainError("factor must be >= 1")
    if factor == 1:
        return E
    _check_cap((E.L * factor) ** E.dim, max_cells)
    inner = np.zeros(factor, dtype=bool)
    inner[1:factor - 1] = True
    out = E.cube()
    for axis in range(E.dim):
        out = np.repeat(out, factor, axis=axis)
        shape = [1] * E.dim
        shape[axis] = E.L * factor
        out = out & np.tile(inner, E.L).reshape(shape)
    return GridSet(E.dim, E.L * factor, out, E.seed)


def _same_shape(E1: GridSet, E2: GridSet):
    if E1.dim != E2.dim or E1.L != E2.L:
        raise DomainError("grids differ in dimension or resolution; refine first")


def intersect(E1: GridSet, E2: GridSet) -> GridSet:
    _same_shape(E1, E2)
    return GridSet(E1.dim, E1.L, E1.bits & E2.bits)


def subtract(E1: GridSet, E2: GridSet) -> GridSet:
    _same_shape(E1, E2)
    return GridSet(E1.dim, E1.L, E1.bits & ~E2.bits)


def common_resolution(Ls, max_cells: int = DEFAULT_MAX_CELLS, dim: int = 1) -> int:
    L = math.lcm(*Ls)
    _check_cap(L ** dim, max_cells)
    return L
