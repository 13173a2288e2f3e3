"""Natarajan dimension of small label families, and a weight cover check.

Prints each random family's dimension, that of its pairwise product, and
the growth bound against the number of distinct restrictions.  Then checks
that random mixture weights are within gamma (L1) of the cover.
"""
import argparse

import numpy as np

from envyfree import families, harness


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--families", type=int, default=6)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    print(f"{'|G|':>4} {'n':>3} {'k':>2} {'d':>2} {'d_prod':>6} {'patterns':>8} {'bound':>8}")
    for _ in range(args.families):
        G = harness.random_family(rng, 24, 6, 3)
        d = families.natarajan_dim(G)
        d2 = families.natarajan_dim(families.product_family(G))
        n = len(G.domain)
        patterns = len(families.restrict_family(G, G.domain))
        print(f"{len(G.members):4d} {n:3d} {G.k:2d} {d:2d} {d2:6d} {patterns:8d} "
              f"{families.natarajan_bound(n, d, G.k):8d}")
    for m, gamma in [(2, 0.1), (3, 0.1), (4, 0.2)]:
        cover = families.build_weight_cover(m, gamma)
        P = rng.dirichlet(np.ones(m), 2000)
        dist = np.abs(P[:, None, :] - cover.points[None]).sum(axis=2).min(axis=1)
        print(f"cover m={m} gamma={gamma}: {len(cover.points)} points, max L1 distance {dist.max():.4f}")


if __name__ == "__main__":
    main()
