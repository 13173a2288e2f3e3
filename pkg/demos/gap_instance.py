"""Randomization can be arbitrarily cheaper than determinism under envy-freeness.

Two individuals, three outcomes.  Individual 0 values outcome 2 at 1/gamma
of what outcome 1 is worth to it; any deterministic EF assignment has to
pay loss 1, while a lottery pays only 1/gamma.
"""
import argparse

from envyfree import erm


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--gammas", type=float, nargs="+", default=[2, 4, 8, 16])
    args = ap.parse_args()
    print(f"{'gamma':>6} {'randomized':>11} {'deterministic':>13} {'ratio':>7}")
    for gamma in args.gammas:
        inst = erm.gap_instance(gamma)
        rnd = erm.solve_randomized_ef_erm(*inst)
        det = erm.solve_deterministic_ef_erm(*inst)
        print(f"{gamma:6g} {rnd.total_loss:11.6f} {det.total_loss:13g} {det.total_loss / rnd.total_loss:7.3f}")
    print("\nrandomized assignment at the last gamma:")
    print(rnd.assignment.rows.round(4))


if __name__ == "__main__":
    main()
