"""Estimators of ``acks_``, the number of ACKs per round.

Alt1Tracker counts ACKs exactly. Each packet is stamped with the connection's
cumulative ACK counter when it is sent, so the ACK that covers it can tell
how many ACKs arrived in between.

Alt2Tracker avoids per-packet state. It keeps an EWMA of the packets covered
per ACK and divides it into the current flight.
"""

from dataclasses import dataclass
from typing import Iterable, List, Optional

COV_SHIFT = 10
COV_ONE = 1 << COV_SHIFT

TRACKERS = ("alt1", "alt2")


def initial_acks(init_cwnd: int, ack_ratio: int = 1) -> int:
    return max(1, init_cwnd // max(1, ack_ratio))


class Alt1Tracker:
    def __init__(self, acks_: int = 1):
        self.cumacks = 0
        self.acks_ = max(1, acks_)

    def stamp(self) -> Optional[int]:
        """Stamp for packets released now; None before the first ACK."""
        return self.cumacks if self.cumacks else None

    def update(self, ack) -> int:
        self.cumacks += 1
        stamp = ack.latest_stamp
        if ack.covered_pkts > 0 and stamp is not None:
            self.acks_ = max(1, self.cumacks - stamp)
        return self.acks_


@dataclass
class Alt2Tracker:
    G2: int = 32
    acks_: int = 1
    # EWMA of packets covered per ACK, in units of 1/1024 packet
    cov_fp: int = COV_ONE

    def __post_init__(self):
        if self.G2 < 1:
            raise ValueError(f"G2 must be >= 1, got {self.G2}")
        self.acks_ = max(1, self.acks_)

    def stamp(self) -> Optional[int]:
        return None

    @property
    def cov_avg(self) -> float:
        return self.cov_fp / COV_ONE

    def update(self, ack) -> int:
        return self.observe(ack.covered_pkts, ack.flight)

    def observe(self, covered_pkts: int, flight: int) -> int:
        delta = covered_pkts * COV_ONE - self.cov_fp
        # C-style truncation toward zero
        step = delta // self.G2 if delta >= 0 else -(-delta // self.G2)
        self.cov_fp = max(1, self.cov_fp + step)
        if flight <= 0:
            self.acks_ = 1
        else:
            self.acks_ = max(1, (flight * COV_ONE + self.cov_fp // 2) // self.cov_fp)
        return self.acks_


class FixedAcks:
    """Constant ``acks_``; for driving controllers off the network."""

    def __init__(self, acks_: int):
        if acks_ < 1:
            raise ValueError("acks_ must be >= 1")
        self.acks_ = acks_

    def stamp(self):
        return None

    def update(self, ack) -> int:
        return self.acks_


def make_tracker(kind: str, acks_: int, G2: int = 32):
    if kind == "alt1":
        return Alt1Tracker(acks_)
    if kind == "alt2":
        return Alt2Tracker(G2=G2, acks_=acks_)
    raise ValueError(f"unknown tracker {kind!r}")


@dataclass
class _StampAck:
    covered_pkts: int
    latest_stamp: Optional[int]


def replay_alt1(window: int, order: Iterable[int], acks_: Optional[int] = None) -> List[int]:
    """Replay a SACK-style trace through Alt1Tracker.

    ``window`` packets (seq 0..window-1) are in flight at the start, unstamped.
    ``order`` lists the seq covered by each successive ACK; every ACK
    releases one new packet stamped at that ACK. Returns ``acks_`` after each
    ACK.
    """
    tracker = Alt1Tracker(window if acks_ is None else acks_)
    stamps = {seq: None for seq in range(window)}
    next_seq = window
    out = []
    for seq in order:
        out.append(tracker.update(_StampAck(1, stamps.pop(seq))))
        stamps[next_seq] = tracker.stamp()
        next_seq += 1
    return out


def in_order(window: int, rounds: int) -> List[int]:
    return list(range(window * rounds))


def delayed(window: int, rounds: int, seq: int, hold: int) -> List[int]:
    """In-order ACKs except ``seq``, whose ACK arrives ``hold`` ACKs late."""
    order = [s for s in range(window * rounds) if s != seq]
    order.insert(order.index(seq + hold) + 1, seq)
    return order
