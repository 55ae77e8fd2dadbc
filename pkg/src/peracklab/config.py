"""Scenario files: ``key = value`` lines with repeatable sections.

Top-level keys describe the bottleneck and the run. ``[flow]`` sections add
flows in order, ``[event]`` sections add capacity changes and
``[mark_window]`` sections force CE marking over a time span. ``#`` starts a
comment. Unknown keys are errors.

Defaults (applied when a key is absent):

=================  =========================================
mark_threshold     max(4, ceil(0.17 * BDP)) packets
buffer_cap         max(100, ceil(4 * BDP)) packets
ack_ratio          1
ack_on_ce          false
delack_timeout     1000 us
mark_prob          0
duration           2000000 us
sample_interval    base_rtt
trace_acks         false
=================  =========================================

Flow defaults: start 0, variant proposed_aimd, init_cwnd 10, G 16,
min_cwnd 2, init_policy cwnd_G, tracker alt1, G2 32, alpha_init 1.0,
app_fraction 1.0, hold_cwnd false. ``alpha_mode`` defaults per variant.
"""

import math
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple

from .ack_tracker import TRACKERS
from .cc import VARIANTS
from .ewma import INIT_POLICIES, PERRTT_MODES, check_gain
from .netsim import CapacityEvent, FlowSpec, MarkWindow, Scenario


class ScenarioError(ValueError):
    def __init__(self, msg: str, line: Optional[int] = None):
        self.line = line
        super().__init__(f"line {line}: {msg}" if line else msg)


def _int(v: str) -> int:
    try:
        return int(v.replace("_", ""))
    except ValueError:
        f = float(v)
        if not f.is_integer():
            raise ValueError(f"expected an integer, got {v!r}")
        return int(f)


def _float(v: str) -> float:
    f = float(v)
    if not math.isfinite(f):
        raise ValueError(f"expected a finite number, got {v!r}")
    return f


def _bool(v: str) -> bool:
    low = v.lower()
    if low in ("true", "yes", "on", "1"):
        return True
    if low in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"expected a boolean, got {v!r}")


def _choice(options) -> Callable[[str], str]:
    def conv(v: str) -> str:
        if v not in options:
            raise ValueError(f"unknown value {v!r}; expected one of {', '.join(options)}")
        return v

    return conv


def _gain(v: str) -> int:
    return check_gain(_int(v))


def _no_md_scaling(v: str) -> bool:
    if _bool(v):
        raise ValueError("md_scale_cwnd_flight is not implemented")
    return False


TOP_KEYS: Dict[str, Callable] = {
    "name": str,
    "link_rate": _float,
    "base_rtt": _int,
    "mark_threshold": _int,
    "buffer_cap": _int,
    "ack_ratio": _int,
    "ack_on_ce": _bool,
    "delack_timeout": _int,
    "mark_prob": _float,
    "duration": _int,
    "sample_interval": _int,
    "trace_acks": _bool,
}
FLOW_KEYS: Dict[str, Callable] = {
    "start": _int,
    "stop": _int,
    "variant": _choice(VARIANTS),
    "init_cwnd": _int,
    "G": _gain,
    "min_cwnd": _int,
    "init_policy": _choice(INIT_POLICIES),
    "tracker": _choice(TRACKERS),
    "G2": _int,
    "alpha_mode": _choice(PERRTT_MODES),
    "alpha_init": _float,
    "app_fraction": _float,
    "hold_cwnd": _bool,
    "md_scale_cwnd_flight": _no_md_scaling,
}
EVENT_KEYS = {"time": _int, "link_rate": _float}
WINDOW_KEYS = {"start": _int, "end": _int}

SECTIONS = {"flow": FLOW_KEYS, "event": EVENT_KEYS, "mark_window": WINDOW_KEYS}
REQUIRED = {"top": ("link_rate", "base_rtt"), "event": ("time", "link_rate"), "mark_window": ("start", "end")}


def _build(kind: str, values: dict, line: int):
    for key in REQUIRED.get(kind, ()):
        if key not in values:
            raise ScenarioError(f"missing {key}" + (f" in [{kind}]" if kind != "top" else ""), line or None)
    try:
        if kind == "flow":
            values.pop("md_scale_cwnd_flight", None)
            spec = FlowSpec(**values)
            spec.validate()
            return spec
        if kind == "event":
            return CapacityEvent(**values)
        return MarkWindow(**values)
    except (TypeError, ValueError) as e:
        raise ScenarioError(str(e), line) from None


def parse_scenario(text: str, name: Optional[str] = None) -> Scenario:
    top: dict = {}
    sections: List[Tuple[str, dict, int]] = []
    current = top
    keys = TOP_KEYS
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ScenarioError(f"malformed section header {raw.strip()!r}", lineno)
            kind = line[1:-1].strip()
            if kind not in SECTIONS:
                raise ScenarioError(f"unknown section [{kind}]", lineno)
            current = {}
            keys = SECTIONS[kind]
            sections.append((kind, current, lineno))
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise ScenarioError(f"expected 'key = value', got {raw.strip()!r}", lineno)
        if key not in keys:
            raise ScenarioError(f"unknown key {key!r}", lineno)
        if key in current:
            raise ScenarioError(f"duplicate key {key!r}", lineno)
        try:
            current[key] = keys[key](value)
        except ValueError as e:
            raise ScenarioError(f"{key}: {e}", lineno) from None

    for key in REQUIRED["top"]:
        if key not in top:
            raise ScenarioError(f"missing {key}")
    flows, events, windows = [], [], []
    for kind, values, lineno in sections:
        obj = _build(kind, values, lineno)
        {"flow": flows, "event": events, "mark_window": windows}[kind].append(obj)
    if name is not None and "name" not in top:
        top["name"] = name
    try:
        return Scenario(flows=flows, events=events, mark_windows=windows, **top)
    except ValueError as e:
        raise ScenarioError(str(e)) from None


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ScenarioError(f"cannot read {path}: {e}") from None
    return parse_scenario(text, name=path.stem)


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def format_scenario(s: Scenario) -> str:
    """Render a scenario so that ``parse_scenario`` reproduces it exactly."""
    out = []
    for key in TOP_KEYS:
        out.append(f"{key} = {_fmt(getattr(s, key))}")
    for f in s.flows:
        out += ["", "[flow]"]
        for key in FLOW_KEYS:
            if key == "md_scale_cwnd_flight":
                continue
            v = getattr(f, key)
            if v is None:
                continue
            out.append(f"{key} = {_fmt(v)}")
    for e in s.events:
        out += ["", "[event]", f"time = {e.time}", f"link_rate = {_fmt(e.link_rate)}"]
    for w in s.mark_windows:
        out += ["", "[mark_window]", f"start = {w.start}", f"end = {w.end}"]
    return "\n".join(out) + "\n"
