"""Nearest-neighbor extension keeps envy within 2 L r for Lipschitz utilities.

The training-time LP is dense, so sample sizes beyond about a hundred are slow.

r is the covering radius of the training sample over the evaluation points.
As the sample grows, r shrinks and so does the worst envy gap.
"""
import argparse

from envyfree import harness


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sizes", type=int, nargs="+", default=[5, 10, 20, 40, 80])
    ap.add_argument("--L", type=float, default=1.0)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    print(f"{'n':>5} {'radius r':>9} {'2Lr':>8} {'worst gap':>10}")
    for n in args.sizes:
        r, worst = harness._extension_trial(q=2, k=3, L=args.L, n=n, holdout=5000, seed=args.seed)
        print(f"{n:5d} {r:9.4f} {2 * args.L * r:8.4f} {worst:10.4f}")


if __name__ == "__main__":
    main()
