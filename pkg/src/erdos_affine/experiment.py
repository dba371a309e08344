"""Monte Carlo estimators, the stage failure bound, single-stage extraction
and finite multi-stage assembly of an avoiding set (d = 1 for the exact steps)."""
from __future__ import annotations

import csv
import io
import json
import math
import random
import statistics
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence, Union

from .detector import FOUND, NOT_FOUND, detect_bb, exact_V_1d
from .errors import DomainError, SearchFailed
from .geometry import PointSet
from .grid import (DEFAULT_MAX_CELLS, GridSet, StageParams, common_resolution, derive_seed,
                   intersect, measure, refine, sample_grid, stage_params, subtract)
from .sequences import SequenceFamily, condition_report

EXACT = "exact"
SAMPLED = "sampled"


@dataclass(frozen=True)
class MeasureInterval:
    lower: float
    upper: float
    method: str
    samples: int = 0

    def __post_init__(self):
        if not 0.0 <= self.lower <= self.upper <= 1.0:
            raise DomainError(f"bad measure interval [{self.lower}, {self.upper}]")
        if self.method == EXACT and self.lower != self.upper:
            raise DomainError("an exact measure has lower == upper")

    @classmethod
    def exact(cls, value: float) -> "MeasureInterval":
        v = min(1.0, max(0.0, float(value)))
        return cls(v, v, EXACT, 0)

    def contains(self, v: float, slack: float = 0.0) -> bool:
        return self.lower - slack <= v <= self.upper + slack

    def to_json(self) -> dict:
        return {"lower": self.lower, "upper": self.upper, "method": self.method,
                "samples": self.samples}


@dataclass(frozen=True)
class SampledMode:
    """x-sampling estimate of mu(V) through detect_bb at fixed shifts."""

    x_samples: int = 200
    epsilon: float = 1e-4
    budget: int = 20000
    z: float = 3.0


@dataclass
class StageReport:
    params: StageParams
    mu_E: Fraction
    mu_V: MeasureInterval
    bound: float
    seed: int
    omega_accepted: bool
    points: Optional[PointSet] = field(default=None, repr=False)
    grid: Optional[GridSet] = field(default=None, repr=False)
    v_intervals: list = field(default_factory=list, repr=False)
    stats: list = field(default_factory=list, repr=False)

    def to_json(self) -> dict:
        return {
            "params": self.params.to_json(),
            "mu_E": f"{self.mu_E.numerator}/{self.mu_E.denominator}",
            "mu_E_float": float(self.mu_E),
            "mu_V": self.mu_V.to_json(),
            "bound": self.bound,
            "seed": self.seed,
            "omega_accepted": self.omega_accepted,
            "v_intervals": [list(iv) for iv in self.v_intervals],
            "stats": self.stats,
        }


@dataclass
class StageEntry:
    alpha: float
    report: StageReport
    grid_file: Optional[str]
    cover_cells: int
    loss: float


@dataclass
class AvoidingSetReport:
    stages: list
    final_measure_lower: float
    verification: list
    final_grid: Optional[GridSet] = field(default=None, repr=False)
    refinement_loss: float = 0.0
    final_grid_file: Optional[str] = None

    def to_json(self) -> dict:
        return {
            "stages": [
                {"alpha": s.alpha, "report": s.report.to_json(), "grid_file": s.grid_file,
                 "cover_cells": s.cover_cells, "loss": s.loss}
                for s in self.stages
            ],
            "final_L": None if self.final_grid is None else self.final_grid.L,
            "final_measure_lower": self.final_measure_lower,
            "refinement_loss": self.refinement_loss,
            "final_grid_file": self.final_grid_file,
            "verification": self.verification,
        }


# estimators ---------------------------------------------------------------------

def estimate_mean_measure(params: StageParams, num_samples: int, seed: int,
                          max_cells: int = DEFAULT_MAX_CELLS):
    """Sample mean and standard error of mu(E) over independent substreams."""
    if num_samples < 2:
        raise DomainError("num_samples must be at least 2")
    vals = [float(measure(sample_grid(params, derive_seed(seed, i), max_cells)))
            for i in range(num_samples)]
    mean = math.fsum(vals) / num_samples
    return mean, statistics.stdev(vals, mean) / math.sqrt(num_samples)


def _wilson(successes: int, n: int, z: float):
    if n == 0:
        return 0.0, 1.0
    ph = successes / n
    den = 1 + z * z / n
    mid = (ph + z * z / (2 * n)) / den
    half = z * math.sqrt(ph * (1 - ph) / n + z * z / (4 * n * n)) / den
    lo = 0.0 if successes == 0 else max(0.0, mid - half)
    hi = 1.0 if successes == n else min(1.0, mid + half)
    return lo, hi


def estimate_mu_V(A: PointSet, params: StageParams, E: GridSet,
                  mode: Union[str, SampledMode] = "exact_1d", seed: int = 0) -> MeasureInterval:
    """Exact (d = 1) or sampled enclosure of the measure of bad shifts.

    In sampled mode a Found shift counts toward the lower end, a certified
    miss toward 1 - upper, and an inconclusive shift widens the interval.
    """
    if mode == "exact_1d":
        if A.dim != 1:
            raise DomainError("exact_1d mode needs d = 1")
        _, m = exact_V_1d(A, E, params.alpha)
        return MeasureInterval.exact(m)
    if not isinstance(mode, SampledMode):
        raise DomainError(f"unknown mode {mode!r}")
    rng = random.Random(seed)
    found = missed = 0
    for _ in range(mode.x_samples):
        x = [rng.random() for _ in range(A.dim)]
        r = detect_bb(A, E, params.alpha, mode.epsilon, mode.budget, shift=x)
        if r.verdict == FOUND:
            found += 1
        elif r.verdict == NOT_FOUND:
            missed += 1
    lo, _ = _wilson(found, mode.x_samples, mode.z)
    _, hi = _wilson(mode.x_samples - missed, mode.x_samples, mode.z)
    return MeasureInterval(lo, max(lo, hi), SAMPLED, mode.x_samples)


def log_analytic_bound(params: StageParams) -> float:
    d, k = params.dim, params.k_n
    if k < 2:
        raise DomainError("the bound needs k_n >= 2")
    logC = math.log(d * d + 1) + d * d * math.log(8 * d / params.alpha)
    return (logC + d * d * math.log(params.L_n * params.M_n * k)
            + k * math.log(params.p_n))


def analytic_bound(params: StageParams) -> float:
    """C (L M k)^(d^2) p^k with C = (d^2+1)(8d/alpha)^(d^2); not clamped to 1."""
    lb = log_analytic_bound(params)
    return math.inf if lb > 709.0 else math.exp(lb)


# single-stage extraction ---------------------------------------------------------

def _default_mode(dim: int):
    return "exact_1d" if dim == 1 else SampledMode()


def extract_good_omega(family: SequenceFamily, alpha: float, quality_k: int, n_range,
                       omega_trials: int, seed: int, slack: float = 1.0,
                       mode=None, max_cells: int = DEFAULT_MAX_CELLS,
                       time_limit: Optional[float] = None) -> StageReport:
    """First (n, omega) in ascending n with mu(E) > 1 - 1/q and mu(V) < 1/q."""
    if quality_k < 2:
        raise DomainError("quality_k must be at least 2")
    mode = _default_mode(family.dim) if mode is None else mode
    if mode == "exact_1d" and family.dim != 1:
        raise DomainError("exact_1d mode needs d = 1")
    q = Fraction(1, quality_k)
    stats = []
    t0 = time.perf_counter()
    if omega_trials <= 0:
        raise SearchFailed("omega_trials = 0: nothing to try", stats)
    for n in n_range:
        A = family(n)
        if len(A) < 2:
            continue
        params = stage_params(A, alpha, slack, n)
        row = {"n": n, "k_n": params.k_n, "L_n": params.L_n, "p_n": params.p_n,
               "trials": 0, "reject_E": 0, "reject_V": 0}
        stats.append(row)
        if params.cells > max_cells:
            row["skipped"] = "cell cap"
            continue
        # mu(E) concentrates near p_n; skip stages that cannot pass the E test
        sd = math.sqrt(params.p_n * (1 - params.p_n) / params.cells)
        if params.p_n + 8 * sd <= 1 - float(q):
            row["skipped"] = "p_n too small"
            continue
        n_seed = derive_seed(seed, n)
        for t in range(omega_trials):
            if time_limit is not None and time.perf_counter() - t0 > time_limit:
                raise SearchFailed(f"time limit {time_limit}s reached at n = {n}", stats)
            s = derive_seed(n_seed, t)
            E = sample_grid(params, s, max_cells)
            row["trials"] += 1
            mu_E = measure(E)
            if not mu_E > 1 - q:
                row["reject_E"] += 1
                continue
            ivs = []
            if mode == "exact_1d":
                ivs, m = exact_V_1d(A, E, alpha)
                mu_V = MeasureInterval.exact(m)
            else:
                mu_V = estimate_mu_V(A, params, E, mode, s)
            if mu_V.upper < float(q):
                return StageReport(params, mu_E, mu_V, analytic_bound(params), s, True,
                                   A, E, ivs, stats)
            row["reject_V"] += 1
    raise SearchFailed("no acceptable selection in the scanned range", stats)


# multi-stage assembly --------------------------------------------------------------

def v_cover(intervals: Sequence, L: int) -> GridSet:
    """Cells meeting the intervals inflated by one cell on each side."""
    bits = [False] * L
    for a, b in intervals:
        j0 = max(0, math.floor(a * L) - 1)
        j1 = min(L - 1, math.ceil(b * L))
        for j in range(j0, j1 + 1):
            bits[j] = True
    return GridSet(1, L, bits)


def _write(path: Path, text: str) -> str:
    path.write_text(text)
    return str(path)


def assemble_avoiding_set(family: SequenceFamily, K: int, quality_k: int, budget: int,
                          seed: int, n_range=range(2, 200), slack: float = 1.0,
                          min_factor: int = 1, probe_budget: int = 200_000,
                          epsilon: float = 1e-4, max_cells: int = DEFAULT_MAX_CELLS,
                          out_dir: Optional[Path] = None) -> AvoidingSetReport:
    """Stages alpha_k = 4^-k, each with its V-cover removed, refined to a
    common resolution and intersected.

    ``budget`` is the number of grids drawn per n in each stage. Each stage's
    point set is re-probed together with the origin: a copy of A + {0} in the
    final set would put its translation x inside the set, hence outside the
    removed cover of V.
    """
    if K < 1:
        raise DomainError("K must be at least 1")
    if family.dim != 1:
        raise DomainError("assembly needs d = 1")
    entries, reduced = [], []
    for k in range(1, K + 1):
        alpha = 4.0 ** -k
        rep = extract_good_omega(family, alpha, quality_k, n_range, budget,
                                 derive_seed(seed, k), slack, "exact_1d", max_cells)
        E = rep.grid
        cover = v_cover(rep.v_intervals, E.L)
        Et = subtract(E, cover)
        ref = None
        if out_dir is not None:
            ref = _write(Path(out_dir) / f"stage_{k}.grid", Et.dumps())
        loss = 1.0 - float(measure(Et))
        entries.append(StageEntry(alpha, rep, ref, cover.count(), loss))
        reduced.append(Et)

    Ls = [E.L for E in reduced]
    L = common_resolution(Ls, max_cells)
    if min_factor > 1:
        m = math.ceil(min_factor * max(Ls) / L)
        L = common_resolution([L * max(1, m)], max_cells)
    final = None
    refinement_loss = 0.0
    for Et in reduced:
        R = refine(Et, L // Et.L, max_cells)
        refinement_loss += float(measure(Et) - measure(R))
        final = R if final is None else intersect(final, R)
    # union bound: 1 - sum(losses) <= exact measure of the intersection
    final_lower = float(measure(final))

    verification = []
    for e, Et in zip(entries, reduced):
        probe = e.report.points.with_origin()
        r = detect_bb(probe, final, e.alpha, epsilon, probe_budget)
        _, m_stage = exact_V_1d(probe, Et, e.alpha)
        verification.append({
            "alpha": e.alpha, "n": e.report.params.n, "k_probe": len(probe),
            "detect_bb": r.to_json(), "exact_stage_V_with_origin": m_stage,
        })

    final_ref = None
    if out_dir is not None:
        final_ref = _write(Path(out_dir) / "final.grid", final.dumps())
    return AvoidingSetReport(entries, final_lower, verification, final,
                             refinement_loss, final_ref)


# reporting -----------------------------------------------------------------------

CSV_COLUMNS = ["n", "k_n", "delta_n", "score", "L_n", "p_n", "bound", "mu_E",
               "mu_V_lo", "mu_V_hi"]


def convergence_rows(family: SequenceFamily, alpha: float, n_values, samples: int = 0,
                     seed: int = 0, slack: float = 1.0, max_cells: int = DEFAULT_MAX_CELLS,
                     exact_v: bool = False) -> list:
    """Per-n condition score, stage parameters and bound; optional mu(E)/mu(V) samples."""
    scores = {r.n: r for r in condition_report(family, max(n_values))}
    rows = []
    for n in n_values:
        if n not in scores:
            continue
        A = family(n)
        params = stage_params(A, alpha, slack, n)
        row = {"n": n, "k_n": params.k_n, "delta_n": params.delta_n,
               "score": scores[n].score, "L_n": params.L_n, "p_n": params.p_n,
               "bound": analytic_bound(params), "mu_E": "", "mu_V_lo": "", "mu_V_hi": ""}
        if samples >= 2 and params.cells <= max_cells:
            mean, _ = estimate_mean_measure(params, samples, derive_seed(seed, n), max_cells)
            row["mu_E"] = mean
            if exact_v and family.dim == 1:
                E = sample_grid(params, derive_seed(seed, n), max_cells)
                iv = estimate_mu_V(A, params, E, "exact_1d")
                row["mu_V_lo"], row["mu_V_hi"] = iv.lower, iv.upper
        rows.append(row)
    return rows


def rows_to_csv(rows: list) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({c: r.get(c, "") for c in CSV_COLUMNS})
    return buf.getvalue()


def dumps_report(report) -> str:
    return json.dumps(report.to_json(), indent=2, sort_keys=True) + "\n"
