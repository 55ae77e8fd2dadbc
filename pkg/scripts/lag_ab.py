"""A/B lag comparison on the step scenarios.

    python scripts/lag_ab.py [--out results/lag] [--seed 0]

Runs dctcp_baseline vs proposed_aimd and the prague_baseline / stage_a /
proposed_aimd ladder on each step scenario and prints one line per run.
"""

import argparse

from peracklab.harness import run_ab, shipped

SCENARIOS = ("capacity_halving", "flow_arrival")
LADDERS = (
    ("dctcp_baseline", "proposed_aimd"),
    ("prague_baseline", "stage_a", "proposed_aimd"),
)


def fmt(x):
    return "-" if x is None else f"{x:.2f}"


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default=None)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    for name in SCENARIOS:
        for variants in LADDERS:
            r = run_ab(shipped(name), list(variants), args.seed, out_dir=args.out)
            print(f"{name}: {' -> '.join(variants)}")
            for v, st in r.stats.items():
                fs = st.flows[0]
                print(f"  {v:16s} first={fmt(fs.rounds_to_first_reduction)} "
                      f"half={fmt(fs.rounds_to_half_reduction)} total={fs.total_reduction} "
                      f"marks/round={fs.marks_per_round:.2f}")
            print(f"  lag_delta_rounds={fmt(r.lag_delta_rounds)} round_us={st.round_us:.0f}")
            print("  " + " ".join(f"{k}={v}" for k, v in r.checks.items()))


if __name__ == "__main__":
    main()
