"""Congestion controllers, one class per variant, driven one ACK at a time.

Every controller exposes ``on_ack(ack, snd_next)`` plus ``cwnd``, ``cwr`` and
``acks_``. The sender runs the controller's tracker as the first step of
``on_ack``; packets it sends afterwards are stamped with ``tracker.stamp()``.

Variants:

proposed_aimd
    Per-ACK EWMA; the multiplicative decrease is spread over every ACK of the
    CWR round; additive increase is divided over the ACKs of a round and
    skipped on marked ACKs. AI and MD share one DualCarry.
stage_a
    Per-ACK EWMA, but a single classic reduction of ``av_up / (2G)`` on the
    first mark, then no further reduction for a round.
dctcp_baseline
    Per-round alpha, one-shot ``alpha/2 * cwnd`` reduction, Reno increase over
    cwnd, no increase during CWR.
prague_baseline
    As dctcp_baseline with the integer upscaled alpha and the increase kept
    running during CWR.
fixed_perack / fixed_perrtt
    Constant window; only the named EWMA runs. Diagnostic for comparing the
    two averages on an identical ACK stream.
"""

from dataclasses import dataclass
from typing import Optional

from .ack_tracker import TRACKERS, initial_acks, make_tracker
from .ewma import INIT_POLICIES, PERRTT_MODES, PerAckEwma, PerRttEwma, check_gain
from .intdiv import DEC, INC, DualCarry, divu

VARIANTS = (
    "proposed_aimd",
    "stage_a",
    "dctcp_baseline",
    "prague_baseline",
    "fixed_perack",
    "fixed_perrtt",
)
CC_VARIANTS = VARIANTS[:4]


@dataclass
class AckEvent:
    covered_pkts: int
    ce_fb: int = 0
    snd_una: int = 0
    latest_covered_seq: int = -1
    arrival_time: int = 0
    # send-time stamp of the latest covered packet (Alt1); None if unstamped
    latest_stamp: Optional[int] = None
    # packets outstanding when the ACK arrived, before removing covered ones
    flight: int = 0


@dataclass
class CcConfig:
    variant: str = "proposed_aimd"
    init_cwnd: int = 10
    G: int = 16
    min_cwnd: int = 2
    init_policy: str = "cwnd_G"
    tracker: str = "alt1"
    G2: int = 32
    alpha_mode: Optional[str] = None
    alpha_init: float = 1.0
    ack_ratio: int = 1

    def validate(self) -> "CcConfig":
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        check_gain(self.G)
        if self.min_cwnd < 1:
            raise ValueError("min_cwnd must be >= 1")
        if self.init_cwnd < self.min_cwnd:
            raise ValueError(f"init_cwnd {self.init_cwnd} below min_cwnd {self.min_cwnd}")
        if self.init_policy not in INIT_POLICIES:
            raise ValueError(f"unknown init policy {self.init_policy!r}")
        if self.tracker not in TRACKERS:
            raise ValueError(f"unknown tracker {self.tracker!r}")
        if self.alpha_mode is not None and self.alpha_mode not in PERRTT_MODES:
            raise ValueError(f"unknown alpha mode {self.alpha_mode!r}")
        return self


def ai_step(carry: DualCarry, acks: int, G: int) -> DualCarry:
    """One ACK's share of a +1 packet per round increase."""
    return divu(carry.rem[INC] + 2 * G, acks * G * 2, INC)


def md_step(carry: DualCarry, av_up: int, acks: int, G: int) -> DualCarry:
    """One ACK's share of an ``av_up / (2G)`` per round decrease."""
    return divu(carry.rem[DEC] + av_up, acks * G * 2, DEC)


class Controller:
    variant = ""

    def __init__(self, cfg: CcConfig, tracker=None):
        cfg.validate()
        self.cfg = cfg
        self.G = cfg.G
        self.min_cwnd = cfg.min_cwnd
        self.cwnd = cfg.init_cwnd
        self.cwr = False
        self.next_seq = 0
        if tracker is None:
            tracker = make_tracker(cfg.tracker, initial_acks(cfg.init_cwnd, cfg.ack_ratio), cfg.G2)
        self.tracker = tracker
        self.acks_ = tracker.acks_
        # cumulative packets removed / added by MD / AI, before clamping
        self.md_total = 0
        self.ai_total = 0
        # decrease asked for, before rounding. With a shared carry the AI and
        # MD quotients trade whole units, so md_total alone understates MD.
        self.md_requested = 0.0
        self.clamps = 0

    def _decrease(self, n: int, requested: Optional[float] = None) -> None:
        self.md_requested += n if requested is None else requested
        if n <= 0:
            return
        self.md_total += n
        c = self.cwnd - n
        if c < self.min_cwnd:
            self.clamps += 1
            c = self.min_cwnd
        self.cwnd = c

    def _increase(self, n: int) -> None:
        if n > 0:
            self.ai_total += n
            self.cwnd += n

    def on_ack(self, ack: AckEvent, snd_next: int) -> None:
        raise NotImplementedError

    # ewma_raw / ewma_down feed the metrics rows
    def ewma_raw(self):
        raise NotImplementedError

    def ewma_down(self) -> float:
        raise NotImplementedError


class _PerAckBase(Controller):
    def __init__(self, cfg, tracker=None):
        super().__init__(cfg, tracker)
        self.ewma = PerAckEwma(G=cfg.G)
        if cfg.init_policy == "none":
            self.ewma.initialize(0, 0, "none")
        self.carry = DualCarry()

    def _update_ewma(self, ack: AckEvent) -> int:
        self.acks_ = self.tracker.update(ack)
        if ack.ce_fb and not self.ewma.initialized:
            self.ewma.initialize(self.cwnd, ack.flight, self.cfg.init_policy)
        return self.ewma.update(ack.ce_fb, self.acks_)

    def _ai(self) -> None:
        self.carry = ai_step(self.carry, self.acks_, self.G)
        self._increase(self.carry.quot)

    def ewma_raw(self):
        return self.ewma.av_up

    def ewma_down(self) -> float:
        return self.ewma.marks_per_round


class ProposedAimd(_PerAckBase):
    variant = "proposed_aimd"

    def on_ack(self, ack: AckEvent, snd_next: int) -> None:
        av_up = self._update_ewma(ack)
        if not ack.ce_fb:
            self._ai()
        elif not self.cwr:
            self.next_seq = snd_next
            self.cwr = True
        if self.cwr:
            if ack.snd_una < self.next_seq:
                self.carry = md_step(self.carry, av_up, self.acks_, self.G)
                self._decrease(self.carry.quot, av_up / (self.acks_ * 2 * self.G))
            else:
                # no MD on the ACK that ends CWR
                self.cwr = False


class StageA(_PerAckBase):
    variant = "stage_a"

    def on_ack(self, ack: AckEvent, snd_next: int) -> None:
        av_up = self._update_ewma(ack)
        if self.cwr and ack.snd_una >= self.next_seq:
            self.cwr = False
        if not ack.ce_fb:
            self._ai()
        elif not self.cwr:
            self._decrease(av_up // (2 * self.G))
            self.next_seq = snd_next
            self.cwr = True


class _PerRttBase(Controller):
    default_alpha_mode = "dctcp_float"
    ai_in_cwr = False

    def __init__(self, cfg, tracker=None):
        super().__init__(cfg, tracker)
        self.ewma = PerRttEwma(
            G=cfg.G, mode=cfg.alpha_mode or self.default_alpha_mode, alpha_init=cfg.alpha_init
        )
        self.ai_cnt = 0

    def on_ack(self, ack: AckEvent, snd_next: int) -> None:
        self.acks_ = self.tracker.update(ack)
        self.ewma.on_ack(ack.covered_pkts, ack.ce_fb, ack.snd_una, snd_next)
        if self.cwr and ack.snd_una >= self.next_seq:
            self.cwr = False
        if ack.ce_fb and not self.cwr:
            self._decrease(self.ewma.reduction(self.cwnd))
            self.next_seq = snd_next
            self.cwr = True
            return
        if self.cwr and not self.ai_in_cwr:
            return
        # Reno increase: +1 per cwnd packets acknowledged
        self.ai_cnt += ack.covered_pkts
        if self.ai_cnt >= self.cwnd:
            n = self.ai_cnt // self.cwnd
            self.ai_cnt -= n * self.cwnd
            self._increase(n)

    def ewma_raw(self):
        return self.ewma.raw

    def ewma_down(self) -> float:
        return self.ewma.value


class DctcpBaseline(_PerRttBase):
    variant = "dctcp_baseline"


class PragueBaseline(_PerRttBase):
    variant = "prague_baseline"
    default_alpha_mode = "prague_upscaled"
    ai_in_cwr = True


class FixedPerAck(_PerAckBase):
    variant = "fixed_perack"

    def on_ack(self, ack: AckEvent, snd_next: int) -> None:
        self._update_ewma(ack)


class FixedPerRtt(_PerRttBase):
    variant = "fixed_perrtt"

    def on_ack(self, ack: AckEvent, snd_next: int) -> None:
        self.acks_ = self.tracker.update(ack)
        self.ewma.on_ack(ack.covered_pkts, ack.ce_fb, ack.snd_una, snd_next)


_CLASSES = {
    cls.variant: cls
    for cls in (ProposedAimd, StageA, DctcpBaseline, PragueBaseline, FixedPerAck, FixedPerRtt)
}


def make_controller(cfg: CcConfig, tracker=None) -> Controller:
    cfg.validate()
    return _CLASSES[cfg.variant](cfg, tracker)
