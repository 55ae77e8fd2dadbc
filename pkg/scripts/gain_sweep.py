"""Rounds-to-half-reduction after a capacity step, swept over the EWMA gain.

    python scripts/gain_sweep.py [--scenario capacity_halving] [--seeds 3]

Every variant in a row runs with the same G. Prints CSV to stdout.
"""

import argparse
import statistics

from peracklab.cc import CC_VARIANTS
from peracklab.ewma import GAINS
from peracklab.harness import shipped, with_variant
from peracklab.netsim import run


def sweep(name, seeds, variants=CC_VARIANTS, gains=GAINS):
    base = shipped(name)
    for G in gains:
        for v in variants:
            s = with_variant(base, v)
            for f in s.flows:
                f.G = G
            half, first, total = [], [], []
            for seed in range(seeds):
                fs = run(s, seed)[1].flows[0]
                if fs.rounds_to_half_reduction is not None:
                    half.append(fs.rounds_to_half_reduction)
                    first.append(fs.rounds_to_first_reduction)
                    total.append(fs.total_reduction)
            yield G, v, half, first, total


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--scenario", default="capacity_halving")
    ap.add_argument("--seeds", type=int, default=3)
    args = ap.parse_args()
    print("G,variant,runs,rounds_to_half,rounds_to_first,total_reduction")
    for G, v, half, first, total in sweep(args.scenario, args.seeds):
        if not half:
            print(f"{G},{v},0,,,")
            continue
        print(f"{G},{v},{len(half)},{statistics.mean(half):.2f},"
              f"{statistics.mean(first):.2f},{statistics.mean(total):.1f}")


if __name__ == "__main__":
    main()
