"""Command-line driver: ``erdos-affine <command> key=value ...``.

Every run writes ``manifest.json`` (the fully resolved configuration) into
its output directory; ``erdos-affine replay manifest=<path>`` reruns it.

Exit codes: 0 success, 2 usage, 3 domain error, 4 resource, 5 search failed.
"""
from __future__ import annotations

import argparse
import json
import math
import random
import sys
from pathlib import Path

from . import __version__
from .detector import detect_bb
from .errors import DomainError, ResourceError, SearchExhausted, SearchFailed
from .experiment import (SampledMode, StageReport, analytic_bound, assemble_avoiding_set,
                         dumps_report, estimate_mu_V, extract_good_omega)
from .geometry import PointSet
from .grid import GridSet, measure, sample_grid, stage_params
from .sequences import (condition_report, gen_annulus_family, gen_geometric_family,
                        gen_polygon_family, gen_product_family, gen_sphere_family)

EXIT_OK, EXIT_USAGE, EXIT_DOMAIN, EXIT_RESOURCE, EXIT_SEARCH = 0, 2, 3, 4, 5

FAMILIES = ("polygon", "product", "sphere", "annulus", "geometric")


def _bool(s):
    if isinstance(s, bool):
        return s
    v = str(s).lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s}")


COMMON = {
    "seed": (int, 1),
    "out": (str, None),
    "threads": (int, 1),
    "max_cells": (int, 1 << 30),
}

FAMILY_KEYS = {
    "family": (str, "product"),
    "radius": (float, 1.0),        # polygon: a_n = radius / n**radius_decay
    "radius_decay": (float, 0.0),
    "jitter": (float, 0.0),
    "rho_power": (float, 2.0),     # product: rho_n = 1 - (n+1)^-rho_power
    "r0": (float, 0.5),            # product: r_n = r0 / n
    "normalize": (_bool, True),
    "dim": (int, 2),               # sphere / annulus
    "norm_power": (float, 1.0),    # sphere / annulus: |x_k| = k^-norm_power
    "ratio": (float, 0.5),         # geometric
}

SCHEMAS = {
    "seq": {**FAMILY_KEYS, "n_max": (int, 20)},
    "construct": {**FAMILY_KEYS, "n": (int, 10), "alpha": (float, 0.5), "slack": (float, 1.0),
                  "x_samples": (int, 20), "epsilon": (float, 1e-4), "budget": (int, 20000)},
    "detect": {"grid": (str, None), "points": (str, None), "alpha": (float, 0.5),
               "epsilon": (float, 1e-4), "budget": (int, 10 ** 7)},
    "prop23": {**FAMILY_KEYS, "alpha": (float, 0.5), "quality_k": (int, 4),
               "n_min": (int, 2), "n_max": (int, 150), "omega_trials": (int, 5),
               "slack": (float, 1.0), "mode": (str, "auto"), "x_samples": (int, 50),
               "epsilon": (float, 1e-4), "budget": (int, 20000)},
    "theorem21": {**FAMILY_KEYS, "K": (int, 2), "quality_k": (int, 2), "budget": (int, 20),
                  "n_min": (int, 2), "n_max": (int, 150), "slack": (float, 1.0),
                  "probe_budget": (int, 200000), "min_factor": (int, 1),
                  "epsilon": (float, 1e-4)},
    "replay": {"manifest": (str, None)},
}


class UsageError(Exception):
    pass


def parse_pairs(command: str, pairs) -> dict:
    schema = {**COMMON, **SCHEMAS[command]}
    cfg = {k: v[1] for k, v in schema.items()}
    for tok in pairs:
        if "=" not in tok:
            raise UsageError(f"expected key=value, got {tok!r}")
        k, v = tok.split("=", 1)
        if k not in schema:
            raise UsageError(f"unknown key {k!r} for {command}; known: {', '.join(sorted(schema))}")
        try:
            cfg[k] = schema[k][0](v)
        except ValueError as exc:
            raise UsageError(f"bad value for {k}: {exc}") from None
    if cfg["out"] is None:
        cfg["out"] = str(Path("runs") / command)
    return cfg


def build_family(cfg: dict):
    name = cfg["family"]
    if name == "polygon":
        a, s = cfg["radius"], cfg["radius_decay"]
        return gen_polygon_family(lambda n: a / n ** s, cfg["jitter"])
    if name == "product":
        r0, pw = cfg["r0"], cfg["rho_power"]
        return gen_product_family(lambda n: r0 / n, lambda n: 1.0 - (n + 1.0) ** -pw,
                                  normalize=cfg["normalize"])
    if name in ("sphere", "annulus"):
        d, pw = cfg["dim"], cfg["norm_power"]
        seed = cfg["seed"]
        cache = {}

        def direction(k):
            if k not in cache:
                rng = random.Random(seed * 1_000_003 + k)
                v = [rng.gauss(0.0, 1.0) for _ in range(d)]
                s = math.hypot(*v)
                cache[k] = tuple(c / s for c in v)
            return cache[k]

        if name == "sphere":
            return gen_sphere_family(lambda k: k ** -pw, direction)
        return gen_annulus_family(lambda k: tuple(k ** -pw * c for c in direction(k)))
    if name == "geometric":
        return gen_geometric_family(cfg["ratio"])
    raise UsageError(f"unknown family {name!r}; choose from {', '.join(FAMILIES)}")


def _out(cfg) -> Path:
    p = Path(cfg["out"])
    p.mkdir(parents=True, exist_ok=True)
    return p


def _manifest(out: Path, command: str, cfg: dict, outputs: list):
    data = {"command": command, "version": __version__, "config": cfg, "outputs": outputs}
    (out / "manifest.json").write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")


# commands --------------------------------------------------------------------------

def cmd_seq(cfg):
    fam = build_family(cfg)
    rows = condition_report(fam, cfg["n_max"])
    text = "n,k_n,delta_n,score\n" + "".join(
        f"{r.n},{r.k_n},{r.delta_n!r},{r.score!r}\n" for r in rows)
    out = _out(cfg)
    (out / "seq.csv").write_text(text)
    _manifest(out, "seq", cfg, ["seq.csv"])
    sys.stdout.write(text)


def cmd_construct(cfg):
    fam = build_family(cfg)
    A = fam(cfg["n"])
    params = stage_params(A, cfg["alpha"], cfg["slack"], cfg["n"])
    E = sample_grid(params, cfg["seed"], cfg["max_cells"])
    out = _out(cfg)
    outputs = ["stage.grid", "points.txt", "stage.json"]
    (out / "stage.grid").write_text(E.dumps())
    (out / "points.txt").write_text(A.dumps())
    if E.dim == 2:
        (out / "stage.pbm").write_text(E.to_pbm())
        outputs.append("stage.pbm")
    if A.dim == 1:
        mu_V = estimate_mu_V(A, params, E, "exact_1d")
    else:
        mode = SampledMode(cfg["x_samples"], cfg["epsilon"], cfg["budget"])
        mu_V = estimate_mu_V(A, params, E, mode, cfg["seed"])
    rep = StageReport(params, measure(E), mu_V, analytic_bound(params), cfg["seed"], False)
    (out / "stage.json").write_text(dumps_report(rep))
    _manifest(out, "construct", cfg, outputs)
    sys.stdout.write(dumps_report(rep))


def _read(path, what):
    if not path:
        raise UsageError(f"{what}= is required")
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise DomainError(f"cannot read {what} file: {exc}") from None


def cmd_detect(cfg):
    E = GridSet.loads(_read(cfg["grid"], "grid"))
    A = PointSet.loads(_read(cfg["points"], "points"))
    r = detect_bb(A, E, cfg["alpha"], cfg["epsilon"], cfg["budget"])
    text = json.dumps(r.to_json(), indent=2, sort_keys=True) + "\n"
    out = _out(cfg)
    (out / "detect.json").write_text(text)
    _manifest(out, "detect", cfg, ["detect.json"])
    sys.stdout.write(text)


def _mode(cfg, dim):
    m = cfg["mode"]
    if m == "auto":
        m = "exact_1d" if dim == 1 else "sampled"
    if m == "exact_1d":
        if dim != 1:
            raise DomainError("mode=exact_1d needs a one-dimensional family")
        return m
    if m == "sampled":
        return SampledMode(cfg["x_samples"], cfg["epsilon"], cfg["budget"])
    raise UsageError(f"unknown mode {m!r}")


def cmd_prop23(cfg):
    fam = build_family(cfg)
    rep = extract_good_omega(fam, cfg["alpha"], cfg["quality_k"],
                             range(cfg["n_min"], cfg["n_max"] + 1), cfg["omega_trials"],
                             cfg["seed"], cfg["slack"], _mode(cfg, fam.dim), cfg["max_cells"])
    out = _out(cfg)
    (out / "stage.grid").write_text(rep.grid.dumps())
    (out / "points.txt").write_text(rep.points.dumps())
    (out / "prop23.json").write_text(dumps_report(rep))
    _manifest(out, "prop23", cfg, ["stage.grid", "points.txt", "prop23.json"])
    sys.stdout.write(dumps_report(rep))


def cmd_theorem21(cfg):
    fam = build_family(cfg)
    out = _out(cfg)
    rep = assemble_avoiding_set(fam, cfg["K"], cfg["quality_k"], cfg["budget"], cfg["seed"],
                                range(cfg["n_min"], cfg["n_max"] + 1), cfg["slack"],
                                cfg["min_factor"], cfg["probe_budget"], cfg["epsilon"],
                                cfg["max_cells"], out)
    (out / "theorem21.json").write_text(dumps_report(rep))
    files = [Path(s.grid_file).name for s in rep.stages] + ["final.grid", "theorem21.json"]
    _manifest(out, "theorem21", cfg, files)
    sys.stdout.write(dumps_report(rep))


COMMANDS = {"seq": cmd_seq, "construct": cmd_construct, "detect": cmd_detect,
            "prop23": cmd_prop23, "theorem21": cmd_theorem21}


def _replay(cfg):
    data = json.loads(_read(cfg["manifest"], "manifest"))
    command, conf = data.get("command"), data.get("config", {})
    if command not in COMMANDS:
        raise DomainError(f"manifest names no known command: {command!r}")
    pairs = [f"{k}={v}" for k, v in conf.items()]
    COMMANDS[command](parse_pairs(command, pairs))


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="erdos-affine",
                                 description="Random affine-copy-avoiding sets in [0,1]^d.")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)
    for name in [*COMMANDS, "replay"]:
        keys = sorted({**COMMON, **SCHEMAS[name]})
        sp = sub.add_parser(name, help=f"keys: {' '.join(keys)}")
        sp.add_argument("pairs", nargs="*", metavar="key=value")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        ns = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        cfg = parse_pairs(ns.command, ns.pairs)
        if ns.command == "replay":
            _replay(cfg)
        else:
            COMMANDS[ns.command](cfg)
    except UsageError as exc:
        ap.print_usage(sys.stderr)
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ResourceError as exc:
        print(f"resource error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (SearchFailed, SearchExhausted) as exc:
        print(f"search failed: {exc}", file=sys.stderr)
        return EXIT_SEARCH
    except (DomainError, ArithmeticError) as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
