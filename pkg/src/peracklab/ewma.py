"""Moving averages of congestion feedback.

PerAckEwma is clocked by every ACK. It holds the average number of marks per
round upscaled by ``G``; the decay step divides by ``acks_ * G`` so that the
smoothing time stays close to ``G`` round trips whatever the ACK rate.

PerRttEwma is the conventional once-per-round average of the marking fraction,
in the flavours the baselines need:

``dctcp_float``
    ``alpha += (F - alpha) / G`` in floating point.
``prague_upscaled``
    ``alpha_up += F - alpha_up / G`` in integers. ``F`` is pre-scaled by
    2**10 (``F10 = (marked << 10) // total``), so ``alpha_up`` carries
    ``G * 1024`` units per unit of alpha. The decay term is rounded to
    nearest.
``dctcp_floor_15_1024``
    ``dctcp_float`` with alpha never allowed below 15/1024 (the old Linux
    integer behaviour that guaranteed a minimum reduction).
``linux_2015``
    10-bit integer alpha as patched in Linux in 2015: the decay step zeroes
    alpha whenever the shifted decrement would be 0, i.e. below 16/1024.
"""

from dataclasses import dataclass, field
from typing import Optional

from .intdiv import CarryDiv, div

GAINS = (2, 4, 8, 16, 32, 64)
ALPHA_SHIFT = 10
ALPHA_ONE = 1 << ALPHA_SHIFT
ALPHA_FLOOR = 15 / 1024

PERRTT_MODES = ("dctcp_float", "prague_upscaled", "dctcp_floor_15_1024", "linux_2015")
INIT_POLICIES = ("cwnd_G", "flight_G", "none")


def check_gain(G: int) -> int:
    if G not in GAINS:
        raise ValueError(f"G must be a power of two in {GAINS}, got {G!r}")
    return G


@dataclass
class PerAckEwma:
    G: int = 16
    av_up: int = 0
    carry: CarryDiv = CarryDiv()
    initialized: bool = False

    def __post_init__(self):
        check_gain(self.G)

    def initialize(self, cwnd: int, flight: int = 0, policy: str = "cwnd_G") -> None:
        """Seed the average on the first CE feedback of the connection."""
        if self.initialized:
            raise RuntimeError("per-ACK EWMA already initialized")
        if policy == "cwnd_G":
            self.av_up = cwnd * self.G
        elif policy == "flight_G":
            self.av_up = flight * self.G
        elif policy != "none":
            raise ValueError(f"unknown init policy {policy!r}")
        self.initialized = True

    def update(self, ce_fb: int, acks_: int) -> int:
        if acks_ < 1:
            raise ValueError(f"acks_ must be >= 1, got {acks_}")
        if ce_fb and not self.initialized:
            raise RuntimeError("marks fed into an uninitialized EWMA")
        self.carry = div(self.carry.rem + self.av_up, acks_ * self.G)
        av = self.av_up + ce_fb - self.carry.quot
        # a stale remainder from a larger denominator can overshoot
        self.av_up = av if av > 0 else 0
        return self.av_up

    @property
    def marks_per_round(self) -> float:
        return self.av_up / self.G


@dataclass
class PerRttEwma:
    G: int = 16
    mode: str = "dctcp_float"
    alpha_init: float = 1.0
    alpha: float = field(init=False)
    alpha_up: int = field(init=False)
    round_end_seq: Optional[int] = None
    marked: int = 0
    total: int = 0
    updates: int = 0

    def __post_init__(self):
        check_gain(self.G)
        if self.mode not in PERRTT_MODES:
            raise ValueError(f"unknown per-RTT EWMA mode {self.mode!r}")
        if not 0.0 <= self.alpha_init <= 1.0:
            raise ValueError(f"alpha_init out of [0, 1]: {self.alpha_init}")
        self.alpha = float(self.alpha_init)
        if self.mode == "prague_upscaled":
            self.alpha_up = round(self.alpha_init * self.G * ALPHA_ONE)
        elif self.mode == "linux_2015":
            self.alpha_up = round(self.alpha_init * ALPHA_ONE)
        else:
            self.alpha_up = 0

    @property
    def value(self) -> float:
        """Current alpha as a fraction in [0, 1]."""
        if self.mode == "prague_upscaled":
            return self.alpha_up / (self.G * ALPHA_ONE)
        if self.mode == "linux_2015":
            return self.alpha_up / ALPHA_ONE
        if self.mode == "dctcp_floor_15_1024":
            return max(self.alpha, ALPHA_FLOOR)
        return self.alpha

    @property
    def raw(self):
        if self.mode in ("prague_upscaled", "linux_2015"):
            return self.alpha_up
        return self.value

    def update(self, marked: int, total: int) -> bool:
        """Fold one round's marked/total counts into alpha.

        Returns False (and leaves alpha alone) when nothing was acknowledged.
        """
        if total <= 0:
            return False
        if not 0 <= marked <= total:
            raise ValueError(f"marked {marked} outside [0, {total}]")
        G = self.G
        if self.mode == "prague_upscaled":
            f10 = (marked << ALPHA_SHIFT) // total
            self.alpha_up += f10 - (self.alpha_up + G // 2) // G
        elif self.mode == "linux_2015":
            shift = G.bit_length() - 1
            a = self.alpha_up
            dec = a >> shift
            a -= dec if dec else a
            if marked:
                ce = (marked << (ALPHA_SHIFT - shift)) // total
                a = min(a + ce, ALPHA_ONE)
            self.alpha_up = a
        else:
            self.alpha += (marked / total - self.alpha) / G
            if self.mode == "dctcp_floor_15_1024" and self.alpha < ALPHA_FLOOR:
                self.alpha = ALPHA_FLOOR
        self.updates += 1
        return True

    def on_ack(self, covered: int, ce_fb: int, snd_una: int, snd_next: int) -> bool:
        """Accumulate one ACK; update alpha if it completes the round."""
        self.marked += min(ce_fb, covered)
        self.total += covered
        if self.round_end_seq is None:
            self.round_end_seq = snd_next
            return False
        if snd_una < self.round_end_seq:
            return False
        changed = self.update(self.marked, self.total)
        self.marked = self.total = 0
        self.round_end_seq = snd_next
        return changed

    def reduction(self, cwnd: int) -> int:
        """Packets to take off ``cwnd`` for ``cwnd -= alpha/2 * cwnd``, rounded down."""
        if self.mode == "prague_upscaled":
            return (cwnd * self.alpha_up) // (2 * self.G * ALPHA_ONE)
        if self.mode == "linux_2015":
            return (cwnd * self.alpha_up) >> (ALPHA_SHIFT + 1)
        return int(self.value * cwnd / 2)
