"""Command line front end.

    peracklab run SCENARIO [--variant V] [--seed N] [--out DIR]
    peracklab ab SCENARIO --variants a,b[,c] [--seed N] [--out DIR]
    peracklab fig3 [--out DIR]
    peracklab fig4 [--out FILE]

SCENARIO is a path or the name of a bundled scenario. Exit status is 0 on
success, 1 for invalid input, 2 if a run fails.
"""

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from . import __version__
from .cc import VARIANTS
from .config import ScenarioError, load_scenario
from .harness import emit_csv, fig3, fig4, run_ab, shipped, shipped_scenarios, with_variant
from .netsim import run


def _scenario(arg: str):
    if Path(arg).exists() or arg not in shipped_scenarios():
        return load_scenario(arg)
    return shipped(arg)


def _variants(text: str):
    out = [v.strip() for v in text.split(",") if v.strip()]
    for v in out:
        if v not in VARIANTS:
            raise ScenarioError(f"unknown variant {v!r}")
    if len(out) < 2:
        raise ScenarioError("--variants needs at least two names")
    return out


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="peracklab", description="Per-ACK EWMA congestion control laboratory")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="cmd", required=True)

    r = sub.add_parser("run", help="run one scenario, write its CSV")
    r.add_argument("scenario")
    r.add_argument("--variant", choices=VARIANTS)
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--out", default=".")

    ab = sub.add_parser("ab", help="run a scenario once per variant and compare lag")
    ab.add_argument("scenario")
    ab.add_argument("--variants", required=True)
    ab.add_argument("--seed", type=int, default=0)
    ab.add_argument("--out", default=".")
    ab.add_argument("--jobs", type=int, default=1)

    f3 = sub.add_parser("fig3", help="per-ACK vs per-RTT EWMA on scripted mark bursts")
    f3.add_argument("--out", default=".")

    f4 = sub.add_parser("fig4", help="effective gain grid as CSV")
    f4.add_argument("--out", help="file to write (default stdout)")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.cmd in ("run", "ab"):
            scenario = _scenario(args.scenario)
        if args.cmd == "ab":
            variants = _variants(args.variants)
    except (ScenarioError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1

    try:
        if args.cmd == "run":
            s = with_variant(scenario, args.variant)
            rows, stats = run(s, args.seed)
            label = args.variant or (s.flows[0].variant if s.flows else "empty")
            out = Path(args.out)
            out.mkdir(parents=True, exist_ok=True)
            emit_csv(rows, out / f"{s.name}.{label}.csv")
            print(json.dumps(dataclasses.asdict(stats), indent=2, sort_keys=True))
        elif args.cmd == "ab":
            report = run_ab(scenario, variants, args.seed, out_dir=args.out, jobs=args.jobs)
            for name, st in report.stats.items():
                print(f"{name:16s} rounds_to_half={st.rounds_to_half_reduction} "
                      f"rounds_to_first={st.rounds_to_first_reduction} marks_per_round={st.marks_per_round:.3f}")
            print(f"lag_delta_rounds={report.lag_delta_rounds}")
            for k, v in report.checks.items():
                print(f"{k}: {v}")
        elif args.cmd == "fig3":
            fig3(args.out)
            print(f"wrote fig3.*.csv to {args.out}")
        elif args.cmd == "fig4":
            text = fig4()
            if args.out:
                Path(args.out).write_text(text, encoding="utf-8")
            else:
                sys.stdout.write(text)
    except Exception as e:  # noqa: BLE001
        print(f"run failed: {type(e).__name__}: {e}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
