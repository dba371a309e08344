"""Find a good stage (n, omega) for the product family, then search again from that n
with another master seed."""
import argparse

from erdos_affine.detector import exact_V_1d
from erdos_affine.experiment import extract_good_omega
from erdos_affine.grid import measure
from erdos_affine.sequences import gen_product_family


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--alpha", type=float, default=0.5)
    ap.add_argument("--quality-k", type=int, default=4)
    ap.add_argument("--trials", type=int, default=10)
    ap.add_argument("--seed", type=int, default=8)
    args = ap.parse_args()
    fam = gen_product_family(lambda n: 0.5 / n, lambda n: 1.0 - (n + 1.0) ** -2, normalize=True)
    rep = extract_good_omega(fam, args.alpha, args.quality_k, range(2, 200), args.trials,
                             args.seed)
    n = rep.params.n
    print(f"accepted n={n} L={rep.params.L_n} p={rep.params.p_n:.4f} "
          f"mu(E)={float(rep.mu_E):.4f} mu(V)={rep.mu_V.upper:.4f}")
    again = extract_good_omega(fam, args.alpha, args.quality_k, range(n, 200), args.trials,
                               args.seed + 1)
    _, mv = exact_V_1d(again.points, again.grid, args.alpha)
    print(f"reseeded n={again.params.n} mu(E)={float(measure(again.grid)):.4f} mu(V)={mv:.4f}")


if __name__ == "__main__":
    main()
