"""Assemble a K-stage avoiding set and print the stage and verification summary."""
import argparse
import json

from erdos_affine.experiment import assemble_avoiding_set
from erdos_affine.sequences import gen_product_family


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--K", type=int, default=2)
    ap.add_argument("--quality-k", type=int, default=2)
    ap.add_argument("--trials", type=int, default=20)
    ap.add_argument("--n-max", type=int, default=80)
    ap.add_argument("--seed", type=int, default=9)
    ap.add_argument("--out", default=None, help="directory for stage and final grids")
    args = ap.parse_args()
    fam = gen_product_family(lambda n: 0.5 / n, lambda n: 1.0 - (n + 1.0) ** -2, normalize=True)
    rep = assemble_avoiding_set(fam, args.K, args.quality_k, args.trials, args.seed,
                                n_range=range(2, args.n_max), out_dir=args.out)
    for s in rep.stages:
        print(f"alpha={s.alpha:g} n={s.report.params.n} L={s.report.params.L_n} "
              f"loss={s.loss:.4f}")
    print(f"final L={rep.final_grid.L} measure={rep.final_measure_lower:.4f}")
    print(json.dumps(rep.verification, indent=2))


if __name__ == "__main__":
    main()
