"""A/B runs over one scenario, CSV output and lag summaries."""

import copy
import dataclasses
import hashlib
import io
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Dict, Iterable, List, Optional

from .approx import LARGE_N, fig4_csv, fig4_table
from .config import parse_scenario
from .netsim import CSV_COLUMNS, MetricsRow, Scenario, SummaryStats, run

CSV_SCHEMA_VERSION = 1
CSV_HEADER = ",".join(CSV_COLUMNS)

FIG4_G = (2, 3, 4, 6, 8, 12, 16, 24, 32, 48, 64)
FIG4_N = (1, 2, 4, 10, 100, 1000, LARGE_N)


def _cell(v) -> str:
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, int):
        return str(v)
    return format(v, ".6g")


def rows_to_csv(rows: Iterable[MetricsRow]) -> str:
    buf = io.StringIO()
    buf.write(CSV_HEADER + "\n")
    for r in rows:
        buf.write(",".join(_cell(getattr(r, c)) for c in CSV_COLUMNS) + "\n")
    return buf.getvalue()


def emit_csv(rows: Iterable[MetricsRow], path) -> Path:
    path = Path(path)
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(rows_to_csv(rows))
    except OSError as e:
        raise OSError(f"{path}: {e.strerror or e}") from e
    return path


def with_variant(s: Scenario, variant: Optional[str]) -> Scenario:
    """Copy of ``s`` with every flow switched to ``variant``."""
    s = copy.deepcopy(s)
    if variant is not None:
        for f in s.flows:
            f.variant = variant
        s.validate()
    return s


def run_variant(s: Scenario, variant: Optional[str], seed: int):
    rows, stats = run(with_variant(s, variant), seed)
    return rows_to_csv(rows), stats


@dataclass
class AbReport:
    scenario: str
    seed: int
    variants: List[str]
    stats: Dict[str, SummaryStats]
    csv_sha256: Dict[str, str]
    lag_delta_rounds: Optional[float]
    checks: Dict[str, Optional[bool]] = field(default_factory=dict)

    def to_json(self) -> str:
        d = dataclasses.asdict(self)
        return json.dumps(d, indent=2, sort_keys=True) + "\n"


def _half(stats: SummaryStats) -> Optional[float]:
    return stats.rounds_to_half_reduction


def run_ab(s: Scenario, variants: List[str], seed: int = 0, out_dir=None, jobs: int = 1) -> AbReport:
    """Run ``s`` once per variant; the first variant is the baseline and the
    last the candidate for ``lag_delta_rounds``."""
    if len(variants) < 2:
        raise ValueError("run_ab needs at least two variants")
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(run_variant, [s] * len(variants), variants, [seed] * len(variants)))
    else:
        results = [run_variant(s, v, seed) for v in variants]

    stats, digests = {}, {}
    for i, (v, (text, st)) in enumerate(zip(variants, results)):
        key = v if v not in stats else f"{v}#{i}"
        stats[key] = st
        digests[key] = hashlib.sha256(text.encode()).hexdigest()
        if out_dir is not None:
            out = Path(out_dir)
            out.mkdir(parents=True, exist_ok=True)
            path = out / f"{s.name}.{v}.csv"
            try:
                path.write_text(text, encoding="utf-8", newline="\n")
            except OSError as e:
                raise OSError(f"{path}: {e.strerror or e}") from e

    keys = list(stats)
    base, cand = _half(stats[keys[0]]), _half(stats[keys[-1]])
    delta = base - cand if base is not None and cand is not None else None
    checks = {
        "baseline_rounds_ge_2": None if base is None else base >= 2.0,
        "candidate_rounds_le_1": None if cand is None else cand <= 1.0,
        "lag_delta_ge_1": None if delta is None else delta >= 1.0,
    }
    halves = [_half(stats[k]) for k in keys]
    if len(keys) >= 3 and None not in halves:
        checks["half_rounds_non_increasing"] = all(a >= b for a, b in zip(halves, halves[1:]))
    report = AbReport(
        scenario=s.name,
        seed=seed,
        variants=list(variants),
        stats=stats,
        csv_sha256=digests,
        lag_delta_rounds=delta,
        checks=checks,
    )
    if out_dir is not None:
        (Path(out_dir) / f"{s.name}.ab.json").write_text(report.to_json(), encoding="utf-8")
    return report


def shipped_scenarios() -> Dict[str, str]:
    """Name -> text of the scenario files bundled with the package."""
    pkg = resources.files("peracklab") / "scenarios"
    return {p.name[:-4]: p.read_text(encoding="utf-8") for p in sorted(pkg.iterdir(), key=lambda p: p.name) if p.name.endswith(".ini")}


def shipped(name: str) -> Scenario:
    return parse_scenario(shipped_scenarios()[name], name=name)


def fig3(out_dir=None, seed: int = 0):
    """Both EWMAs on one fixed-window ACK stream with scripted mark bursts.

    Returns ``{variant: rows}``. The overlay CSV puts the per-ACK average,
    converted to a marking fraction (``av_up / (G * cwnd)``), next to alpha.
    """
    s = shipped("fig3")
    per_ack = run(with_variant(s, "fixed_perack"), seed)[0]
    per_rtt = run(with_variant(s, "fixed_perrtt"), seed)[0]
    G = s.flows[0].G
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        emit_csv(per_ack, out / "fig3.fixed_perack.csv")
        emit_csv(per_rtt, out / "fig3.fixed_perrtt.csv")
        lines = ["time_us,flow,perack_fraction,perrtt_alpha"]
        for a, b in zip(per_ack, per_rtt):
            lines.append(f"{a.time_us},{a.flow},{_cell(a.ewma_raw / (G * a.cwnd))},{_cell(b.ewma_downscaled)}")
        (out / "fig3.overlay.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    return {"fixed_perack": per_ack, "fixed_perrtt": per_rtt}


def fig4(G_values=FIG4_G, n_values=FIG4_N) -> str:
    return fig4_csv(fig4_table(G_values, n_values))
