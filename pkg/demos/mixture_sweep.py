"""Envy of a fitted EF mixture on fresh pairs versus training pairs.

For each training size, fit a mixture of linear rules that is EF on the
training pairs, then estimate its envy rate on a large holdout.  The gap
between test and train envy shrinks as the sample grows.
"""
import argparse

from envyfree import harness


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sizes", type=int, nargs="+", default=[100, 200, 400, 800])
    ap.add_argument("--trials", type=int, default=5)
    ap.add_argument("--gamma", type=float, default=0.01)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()
    cfg = harness.ExperimentConfig(experiment="mixture-gen", gamma=args.gamma, sizes=args.sizes,
                                   workers=args.workers, params={"trials": args.trials})
    print(f"{'n':>6} {'train':>8} {'test':>8} {'gap':>8}")
    for n, train, test, gap in harness.sweep_means(harness.generalization_sweep(cfg)):
        print(f"{n:6d} {train:8.5f} {test:8.5f} {gap:8.5f}")
    print("\nsuggested sizes (mixture, single rule) for d=3, m=2, k=3, gamma=0.1, delta=0.05:",
          harness.sample_size_helper(3, 2, 3, 0.1, 0.05))


if __name__ == "__main__":
    main()
