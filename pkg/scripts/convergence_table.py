"""Print the convergence table (CSV) for the normalized product family.

    python scripts/convergence_table.py --alpha 0.5 --n 5 10 20 40 80
"""
import argparse

from erdos_affine.experiment import convergence_rows, rows_to_csv
from erdos_affine.sequences import gen_product_family


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--alpha", type=float, default=0.5)
    ap.add_argument("--n", type=int, nargs="+", default=[5, 10, 20, 40, 80])
    ap.add_argument("--samples", type=int, default=4, help="grids drawn per n for mu(E)")
    ap.add_argument("--exact-v", action="store_true", help="also compute exact mu(V)")
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args()
    fam = gen_product_family(lambda n: 0.5 / n, lambda n: 1.0 - (n + 1.0) ** -2, normalize=True)
    rows = convergence_rows(fam, args.alpha, args.n, samples=args.samples, seed=args.seed,
                            exact_v=args.exact_v)
    print(rows_to_csv(rows), end="")


if __name__ == "__main__":
    main()
