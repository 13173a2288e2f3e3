"""Extending a sample-EF classifier to unseen individuals can fail badly.

Each cube of a 4^q grid has a random favorite outcome.  We give the sampled
half of the centers their favorite, extend by nearest neighbor, and count
envious pairs over all centers.  The constant strategy is shown for contrast.
"""
import argparse

import numpy as np

from envyfree import lowerbound


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--q", type=int, default=4)
    ap.add_argument("--L", type=float, default=8.0)
    ap.add_argument("--seeds", type=int, default=10)
    args = ap.parse_args()
    for name in ("nn", "constant"):
        alphas, balanced = [], 0
        for seed in range(args.seeds):
            world = lowerbound.build_grid(args.q, args.L, seed)
            res = lowerbound.run_adversarial_experiment(world, name, seed)
            alphas.append(res.envy_report.alpha_hat)
            balanced += res.balanced
        alphas = np.array(alphas)
        print(f"{name:>8}: envy rate mean {alphas.mean():.4f}, min {alphas.min():.4f}, "
              f"max {alphas.max():.4f}; balanced samples {balanced}/{args.seeds}")
    world = lowerbound.build_grid(args.q, args.L, 0)
    lip = lowerbound.verify_lipschitz(world, 20_000, seed=0, scale=0.05)
    print(f"empirical Lipschitz constant (sup norm): {lip:.3f} <= L = {args.L:g}")


if __name__ == "__main__":
    main()
