"""Run every bundled scenario with its own variant; write CSVs and a summary.

    python scripts/run_all.py [--out results/all] [--seed 0]
"""

import argparse
import dataclasses
import json
import time
from pathlib import Path

from peracklab.harness import emit_csv, shipped, shipped_scenarios
from peracklab.netsim import run


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results/all")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    summary = {}
    print(f"{'scenario':18s} {'secs':>5s} {'util':>6s} {'meanq':>6s} {'maxq':>5s} {'drops':>5s} {'marks/rnd':>9s}")
    for name in sorted(shipped_scenarios()):
        s = shipped(name)
        t = time.perf_counter()
        rows, st = run(s, args.seed)
        dt = time.perf_counter() - t
        variant = s.flows[0].variant if s.flows else "empty"
        emit_csv(rows, out / f"{name}.{variant}.csv")
        summary[name] = dataclasses.asdict(st)
        mpr = st.marks_per_round or 0.0
        print(f"{name:18s} {dt:5.2f} {st.utilization:6.3f} {st.mean_queue:6.1f} {st.max_queue:5d} "
              f"{st.drops:5d} {mpr:9.2f}")
    (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")


if __name__ == "__main__":
    main()
