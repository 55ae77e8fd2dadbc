"""Deterministic packet-level simulation of flows sharing one bottleneck.

Topology: senders -> FIFO bottleneck (step ECN marking at dequeue) ->
propagation (base_rtt / 2) -> receivers -> ACK path (base_rtt / 2) -> senders.

Time is integer microseconds. Events are ordered by ``(time, rank, flow,
seq, insertion counter)`` so a run is a pure function of (scenario, seed).
There is no retransmission; a packet dropped at a full buffer is written off
by the sender immediately and counted.
"""

import heapq
import math
import random
from bisect import bisect_left, bisect_right
from collections import deque
from dataclasses import dataclass, field, fields
from typing import List, Optional, Tuple

from .cc import AckEvent, CcConfig, make_controller

# event ranks, lower runs first on equal timestamps
CAPACITY, STOP, START, DEPART, DELIVER, ACK, DELACK, SAMPLE = range(8)

LAG_SETTLE_ROUNDS = 10


def step_mark(queue_depth: int, K: int) -> bool:
    return queue_depth > K


@dataclass
class FlowSpec:
    start: int = 0
    stop: Optional[int] = None
    variant: str = "proposed_aimd"
    init_cwnd: int = 10
    G: int = 16
    min_cwnd: int = 2
    init_policy: str = "cwnd_G"
    tracker: str = "alt1"
    G2: int = 32
    alpha_mode: Optional[str] = None
    alpha_init: float = 1.0
    # application keeps at most floor(cwnd * app_fraction) packets in flight
    app_fraction: float = 1.0
    # restore cwnd to init_cwnd after every ACK; MD is still counted
    hold_cwnd: bool = False

    def cc_config(self, ack_ratio: int) -> CcConfig:
        return CcConfig(
            variant=self.variant,
            init_cwnd=self.init_cwnd,
            G=self.G,
            min_cwnd=self.min_cwnd,
            init_policy=self.init_policy,
            tracker=self.tracker,
            G2=self.G2,
            alpha_mode=self.alpha_mode,
            alpha_init=self.alpha_init,
            ack_ratio=ack_ratio,
        )

    def validate(self) -> None:
        if self.start < 0:
            raise ValueError("flow start must be >= 0")
        if self.stop is not None and self.stop <= self.start:
            raise ValueError("flow stop must be after start")
        if not 0.0 < self.app_fraction <= 1.0:
            raise ValueError(f"app_fraction must be in (0, 1], got {self.app_fraction}")
        self.cc_config(1).validate()


@dataclass
class CapacityEvent:
    time: int
    link_rate: float


@dataclass
class MarkWindow:
    """Every packet dequeued in [start, end) is CE-marked."""

    start: int
    end: int


@dataclass
class Scenario:
    link_rate: float
    base_rtt: int
    mark_threshold: Optional[int] = None
    buffer_cap: Optional[int] = None
    ack_ratio: int = 1
    ack_on_ce: bool = False
    delack_timeout: int = 1000
    mark_prob: float = 0.0
    duration: int = 2_000_000
    sample_interval: Optional[int] = None
    trace_acks: bool = False
    name: str = "scenario"
    flows: List[FlowSpec] = field(default_factory=list)
    events: List[CapacityEvent] = field(default_factory=list)
    mark_windows: List[MarkWindow] = field(default_factory=list)

    def __post_init__(self):
        if not self.link_rate > 0:
            raise ValueError("link_rate must be > 0")
        if not self.base_rtt > 0:
            raise ValueError("base_rtt must be > 0")
        if self.mark_threshold is None:
            self.mark_threshold = max(4, math.ceil(0.17 * self.bdp))
        if self.buffer_cap is None:
            self.buffer_cap = max(100, math.ceil(4 * self.bdp), self.mark_threshold)
        if self.sample_interval is None:
            self.sample_interval = self.base_rtt
        self.validate()

    @property
    def bdp(self) -> float:
        return self.link_rate * self.base_rtt / 1e6

    def validate(self) -> None:
        if not 1 <= self.mark_threshold <= self.buffer_cap:
            raise ValueError(
                f"need 1 <= mark_threshold <= buffer_cap, got {self.mark_threshold}, {self.buffer_cap}"
            )
        if self.ack_ratio < 1:
            raise ValueError("ack_ratio must be >= 1")
        if self.delack_timeout < 1:
            raise ValueError("delack_timeout must be >= 1")
        if not 0.0 <= self.mark_prob <= 1.0:
            raise ValueError("mark_prob must be in [0, 1]")
        if self.duration <= 0 or self.sample_interval <= 0:
            raise ValueError("duration and sample_interval must be > 0")
        for f in self.flows:
            f.validate()
        for e in self.events:
            if e.time < 0 or not e.link_rate > 0:
                raise ValueError(f"bad capacity event {e}")
        for w in self.mark_windows:
            if w.end <= w.start:
                raise ValueError(f"bad mark window {w}")

    def step_time(self) -> Optional[int]:
        """Time of the congestion step the lag metrics are measured against."""
        if self.events:
            return min(e.time for e in self.events)
        starts = [f.start for f in self.flows]
        if len(starts) > 1 and max(starts) > 0:
            return max(starts)
        return None


@dataclass
class MetricsRow:
    time_us: int
    flow: int
    cwnd: int
    flight: int
    ewma_raw: object
    ewma_downscaled: float
    acks_: int
    queue_pkts: int
    cum_marks: int
    cum_acks: int
    cwr: int


CSV_COLUMNS = tuple(f.name for f in fields(MetricsRow))


@dataclass
class FlowSummary:
    flow: int
    variant: str
    marks_per_round: float
    md_per_round: float
    mean_cwnd: float
    first_feedback_us: Optional[int] = None
    total_reduction: Optional[int] = None
    rounds_to_first_reduction: Optional[float] = None
    rounds_to_half_reduction: Optional[float] = None


@dataclass
class SummaryStats:
    scenario: str
    seed: int
    round_us: float
    step_time: Optional[int]
    steady_window: Tuple[int, int]
    mean_queue: float
    max_queue: int
    utilization: float
    sent: int
    delivered: int
    drops: int
    events: int
    flows: List[FlowSummary] = field(default_factory=list)

    @property
    def rounds_to_half_reduction(self):
        return self.flows[0].rounds_to_half_reduction if self.flows else None

    @property
    def rounds_to_first_reduction(self):
        return self.flows[0].rounds_to_first_reduction if self.flows else None

    @property
    def marks_per_round(self):
        return self.flows[0].marks_per_round if self.flows else None


class _Packet:
    __slots__ = ("flow", "seq", "send_time", "ce", "stamp")

    def __init__(self, flow, seq, send_time, stamp):
        self.flow = flow
        self.seq = seq
        self.send_time = send_time
        self.ce = False
        self.stamp = stamp


class _Flow:
    def __init__(self, fid: int, spec: FlowSpec, scenario: Scenario):
        self.fid = fid
        self.spec = spec
        self.ctrl = make_controller(spec.cc_config(scenario.ack_ratio))
        self.outstanding = {}
        self.next_seq = 0
        self.una = 0
        self.active = False
        self.cum_marks = 0
        self.cum_acks = 0
        self.cwnd_trace: List[Tuple[int, int]] = []
        self.mark_times: List[int] = []
        # receiver side
        self.pending: List[int] = []
        self.pending_ce = 0
        self.timer_gen = 0
        # dropped packets, written off (never resent) when the next ACK arrives
        self.lost: List[int] = []

    def allowed(self) -> int:
        cwnd = self.ctrl.cwnd
        f = self.spec.app_fraction
        if f < 1.0:
            return max(1, int(cwnd * f))
        return cwnd

    def advance_una(self) -> None:
        out = self.outstanding
        while self.una < self.next_seq and self.una not in out:
            self.una += 1


class Simulator:
    def __init__(self, scenario: Scenario, seed: int = 0, check: bool = False):
        scenario.validate()
        self.s = scenario
        self.seed = seed
        self.check = check
        self.rate = float(scenario.link_rate)
        self.fwd = scenario.base_rtt // 2
        self.rev = scenario.base_rtt - self.fwd
        self.K = scenario.mark_threshold
        self.flows = [_Flow(i, f, scenario) for i, f in enumerate(scenario.flows)]
        self.jitter_rng = random.Random(f"jitter:{seed}")
        self.mark_rng = random.Random(f"mark:{seed}")
        self.heap = []
        self.counter = 0
        self.queue = deque()
        self.busy = False
        self.wire = 0
        self.sent = self.delivered = self.dropped = 0
        self.busy_us = 0
        self.q_area = 0
        self.q_last = 0
        self.max_queue = 0
        self.now = 0
        self.n_events = 0
        self.rows: List[MetricsRow] = []
        # (time, queue area, per-flow (md_requested, cum_marks, cwnd))
        self.snapshots = []

    def ser_time(self) -> int:
        return max(1, round(1e6 / self.rate))

    def push(self, t, rank, flow, seq, kind, payload=None):
        self.counter += 1
        heapq.heappush(self.heap, (t, rank, flow, seq, self.counter, kind, payload))

    # queue ---------------------------------------------------------------

    def _q_tick(self, now):
        self.q_area += len(self.queue) * (now - self.q_last)
        self.q_last = now

    def enqueue(self, pkt: _Packet, now: int) -> None:
        if len(self.queue) >= self.s.buffer_cap:
            # the sender only learns of the loss from its next ACK
            self.dropped += 1
            self.flows[pkt.flow].lost.append(pkt.seq)
            return
        self._q_tick(now)
        self.queue.append(pkt)
        if len(self.queue) > self.max_queue:
            self.max_queue = len(self.queue)
        if not self.busy:
            self._start_service(now)

    def _start_service(self, now):
        head = self.queue[0]
        ser = self.ser_time()
        self.busy = True
        self.busy_us += ser
        self.push(now + ser, DEPART, head.flow, head.seq, DEPART)

    def _marked(self, now: int, depth: int) -> bool:
        if step_mark(depth, self.K):
            return True
        for w in self.s.mark_windows:
            if w.start <= now < w.end:
                return True
        return self.s.mark_prob > 0 and self.mark_rng.random() < self.s.mark_prob

    def _depart(self, now):
        depth = len(self.queue)
        self._q_tick(now)
        pkt = self.queue.popleft()
        if self._marked(now, depth):
            pkt.ce = True
        self.wire += 1
        self.push(now + self.fwd, DELIVER, pkt.flow, pkt.seq, DELIVER, pkt)
        if self.queue:
            self._start_service(now)
        else:
            self.busy = False

    # receiver ------------------------------------------------------------

    def _deliver(self, now, pkt: _Packet):
        self.wire -= 1
        self.delivered += 1
        fl = self.flows[pkt.flow]
        fl.pending.append(pkt.seq)
        if pkt.ce:
            fl.pending_ce += 1
        s = self.s
        if len(fl.pending) >= s.ack_ratio or (pkt.ce and s.ack_on_ce):
            self._flush(now, fl)
        elif len(fl.pending) == 1:
            self.push(now + s.delack_timeout, DELACK, fl.fid, pkt.seq, DELACK, fl.timer_gen)

    def _flush(self, now, fl: _Flow):
        ack = (tuple(fl.pending), fl.pending_ce)
        fl.pending = []
        fl.pending_ce = 0
        fl.timer_gen += 1
        self.push(now + self.rev, ACK, fl.fid, ack[0][-1], ACK, ack)

    # sender --------------------------------------------------------------

    def _send_more(self, now, fl: _Flow):
        if not fl.active:
            return
        limit = fl.allowed()
        stamp = fl.ctrl.tracker.stamp()
        while len(fl.outstanding) < limit:
            pkt = _Packet(fl.fid, fl.next_seq, now, stamp)
            fl.outstanding[fl.next_seq] = pkt
            fl.next_seq += 1
            self.sent += 1
            self.enqueue(pkt, now)

    def _on_ack(self, now, fl: _Flow, ack):
        seqs, ce = ack
        out = fl.outstanding
        flight = len(out)
        covered = [q for q in seqs if q in out]
        stamp = out[covered[-1]].stamp if covered else None
        for q in covered:
            del out[q]
        for q in fl.lost:
            out.pop(q, None)
        fl.lost.clear()
        fl.advance_una()
        fl.cum_acks += 1
        if ce:
            fl.cum_marks += ce
            fl.mark_times.append(now)
        ev = AckEvent(
            covered_pkts=len(covered),
            ce_fb=ce,
            snd_una=fl.una,
            latest_covered_seq=covered[-1] if covered else -1,
            arrival_time=now,
            latest_stamp=stamp,
            flight=flight,
        )
        ctrl = fl.ctrl
        before = ctrl.cwnd
        ctrl.on_ack(ev, fl.next_seq)
        if fl.spec.hold_cwnd:
            ctrl.cwnd = fl.spec.init_cwnd
        changed = ctrl.cwnd != before
        if changed:
            fl.cwnd_trace.append((now, ctrl.cwnd))
        self._send_more(now, fl)
        if changed or self.s.trace_acks:
            self.rows.append(self._row(now, fl))

    def _row(self, now, fl: _Flow) -> MetricsRow:
        c = fl.ctrl
        return MetricsRow(
            time_us=now,
            flow=fl.fid,
            cwnd=c.cwnd,
            flight=len(fl.outstanding),
            ewma_raw=c.ewma_raw(),
            ewma_downscaled=c.ewma_down(),
            acks_=c.acks_,
            queue_pkts=len(self.queue),
            cum_marks=fl.cum_marks,
            cum_acks=fl.cum_acks,
            cwr=int(c.cwr),
        )

    def _sample(self, now):
        self._q_tick(now)
        self.snapshots.append(
            (now, self.q_area, tuple((f.ctrl.md_requested, f.cum_marks, f.ctrl.cwnd) for f in self.flows))
        )
        for fl in self.flows:
            if fl.active or fl.outstanding:
                self.rows.append(self._row(now, fl))

    def _check(self):
        if self.sent != self.delivered + len(self.queue) + self.wire + self.dropped:
            raise AssertionError(f"packet conservation violated at t={self.now}")

    # main loop -----------------------------------------------------------

    def run(self) -> Tuple[List[MetricsRow], SummaryStats]:
        s = self.s
        ser = self.ser_time()
        for fl in self.flows:
            start = fl.spec.start + self.jitter_rng.randrange(ser + 1)
            self.push(start, START, fl.fid, 0, START)
            if fl.spec.stop is not None:
                self.push(fl.spec.stop, STOP, fl.fid, 0, STOP)
        for e in s.events:
            self.push(e.time, CAPACITY, -1, 0, CAPACITY, e.link_rate)
        if self.flows:
            t = 0
            while t <= s.duration:
                self.push(t, SAMPLE, -1, 0, SAMPLE)
                t += s.sample_interval

        heap = self.heap
        while heap and heap[0][0] <= s.duration:
            t, _, fid, _, _, kind, payload = heapq.heappop(heap)
            self.now = t
            self.n_events += 1
            if kind == DEPART:
                self._depart(t)
            elif kind == DELIVER:
                self._deliver(t, payload)
            elif kind == ACK:
                self._on_ack(t, self.flows[fid], payload)
            elif kind == DELACK:
                fl = self.flows[fid]
                if payload == fl.timer_gen and fl.pending:
                    self._flush(t, fl)
            elif kind == SAMPLE:
                self._sample(t)
            elif kind == START:
                fl = self.flows[fid]
                fl.active = True
                fl.cwnd_trace.append((t, fl.ctrl.cwnd))
                self._send_more(t, fl)
            elif kind == STOP:
                self.flows[fid].active = False
            elif kind == CAPACITY:
                self.rate = float(payload)
            if self.check:
                self._check()
        if self.flows:
            self._q_tick(s.duration)
        return self.rows, self._summary()

    # statistics ----------------------------------------------------------

    def _snap_at(self, t):
        i = bisect_right([x[0] for x in self.snapshots], t) - 1
        return self.snapshots[max(i, 0)]

    def _rate_at(self, t):
        rate = self.s.link_rate
        for e in sorted(self.s.events, key=lambda e: e.time):
            if e.time < t:
                rate = e.link_rate
        return rate

    def _summary(self) -> SummaryStats:
        s = self.s
        t0 = s.step_time()
        if t0 is not None:
            win = (t0 // 2, t0)
        else:
            win = (s.duration // 2, s.duration)
        flows_out = []
        round_us = float(s.base_rtt)
        mean_q = 0.0
        if self.snapshots:
            a, b = self._snap_at(win[0]), self._snap_at(win[1])
            span = b[0] - a[0]
            if span > 0:
                wq = (b[1] - a[1]) / span
                round_us = s.base_rtt + wq * 1e6 / self._rate_at(win[1])
            mean_q = self.q_area / s.duration
            rounds = span / round_us if span > 0 else 0.0
            for fl in self.flows:
                fa, fb = a[2][fl.fid], b[2][fl.fid]
                cw = [x[2][fl.fid][2] for x in self.snapshots if win[0] <= x[0] <= win[1]]
                fs = FlowSummary(
                    flow=fl.fid,
                    variant=fl.spec.variant,
                    marks_per_round=(fb[1] - fa[1]) / rounds if rounds else 0.0,
                    md_per_round=(fb[0] - fa[0]) / rounds if rounds else 0.0,
                    mean_cwnd=sum(cw) / len(cw) if cw else float(fl.ctrl.cwnd),
                )
                if t0 is not None and not fl.spec.hold_cwnd and fl.spec.start < t0:
                    _lag_metrics(fs, fl, t0, round_us)
                flows_out.append(fs)
        return SummaryStats(
            scenario=s.name,
            seed=self.seed,
            round_us=round_us,
            step_time=t0,
            steady_window=win,
            mean_queue=mean_q,
            max_queue=self.max_queue,
            utilization=self.busy_us / s.duration if self.flows else 0.0,
            sent=self.sent,
            delivered=self.delivered,
            drops=self.dropped,
            events=self.n_events,
            flows=flows_out,
        )


def _lag_metrics(fs: FlowSummary, fl: _Flow, t0: int, round_us: float) -> None:
    """Rounds from first CE feedback after ``t0`` to the first cwnd cut and to
    half of the reduction reached ``LAG_SETTLE_ROUNDS`` rounds after ``t0``."""
    i = bisect_left(fl.mark_times, t0)
    if i == len(fl.mark_times):
        return
    t_fb = fl.mark_times[i]
    times = [x[0] for x in fl.cwnd_trace]
    j = bisect_left(times, t_fb) - 1
    if j < 0:
        return
    ref = fl.cwnd_trace[j][1]
    k = bisect_right(times, t0 + LAG_SETTLE_ROUNDS * round_us) - 1
    settled = fl.cwnd_trace[k][1]
    fs.first_feedback_us = t_fb
    fs.total_reduction = ref - settled
    tail = fl.cwnd_trace[j + 1 :]
    for t, c in tail:
        if c < ref:
            fs.rounds_to_first_reduction = (t - t_fb) / round_us
            break
    if fs.total_reduction <= 0:
        return
    half = ref - fs.total_reduction / 2
    for t, c in tail:
        if c <= half:
            fs.rounds_to_half_reduction = (t - t_fb) / round_us
            break


def run(scenario: Scenario, seed: int = 0, check: bool = False):
    """Run ``scenario``; returns ``(rows, SummaryStats)``."""
    return Simulator(scenario, seed, check).run()
