from types import SimpleNamespace

import pytest
from hypothesis import given, strategies as st

from peracklab.ack_tracker import (
    Alt1Tracker,
    Alt2Tracker,
    FixedAcks,
    delayed,
    in_order,
    initial_acks,
    make_tracker,
    replay_alt1,
)
from peracklab.ewma import PerAckEwma


def test_initial_acks():
    assert initial_acks(10) == 10
    assert initial_acks(10, 2) == 5
    assert initial_acks(1, 4) == 1


def test_alt1_first_ack_keeps_default():
    t = Alt1Tracker(10)
    assert t.stamp() is None
    assert t.update(SimpleNamespace(covered_pkts=1, latest_stamp=None)) == 10
    assert t.stamp() == 1


def test_alt1_steady_pipe():
    seq = replay_alt1(25, in_order(25, 4))
    assert seq[25:] == [25] * 75


def test_alt1_duplicate_ack_leaves_value():
    t = Alt1Tracker(7)
    t.update(SimpleNamespace(covered_pkts=1, latest_stamp=None))
    assert t.update(SimpleNamespace(covered_pkts=0, latest_stamp=0)) == 7
    assert t.cumacks == 2


def test_alt1_reordered_packet():
    seq = replay_alt1(25, delayed(25, 4, seq=50, hold=4))
    i = 50
    assert seq[i : i + 6] == [24, 24, 24, 24, 29, 25]
    assert all(v == 25 for v in seq[25:i])
    assert all(v == 25 for v in seq[i + 6 :])
    assert sum(v - 25 for v in seq[25:]) == 0


@pytest.mark.parametrize("W", [3, 10, 40])
def test_alt1_equilibrium_after_one_round(W):
    assert set(replay_alt1(W, in_order(W, 3), acks_=1)[W:]) == {W}


def test_alt2_examples():
    t = Alt2Tracker(G2=32)
    assert t.cov_avg == 1.0
    t.cov_fp = 2048
    assert t.observe(2, 40) == 20
    assert t.cov_avg == 2.0
    assert t.observe(2, 0) == 1


def test_alt2_follows_flight_immediately():
    t = Alt2Tracker(G2=32, cov_fp=2048)
    a = t.observe(2, 30)
    b = t.observe(2, 60)
    assert b == 2 * a


@given(st.integers(1, 64), st.lists(st.tuples(st.integers(0, 8), st.integers(0, 500)), max_size=200))
def test_alt2_bounds(G2, steps):
    t = Alt2Tracker(G2=G2)
    for covered, flight in steps:
        assert t.observe(covered, flight) >= 1
        assert t.cov_fp >= 1


def test_alt2_converges_to_coverage():
    t = Alt2Tracker(G2=32)
    for _ in range(1000):
        t.observe(3, 60)
    assert t.cov_avg == pytest.approx(3.0, abs=0.05)
    assert t.acks_ == 20


def test_make_tracker_and_fixed():
    assert isinstance(make_tracker("alt1", 5), Alt1Tracker)
    assert make_tracker("alt2", 5, 16).G2 == 16
    with pytest.raises(ValueError):
        make_tracker("alt3", 5)
    with pytest.raises(ValueError):
        FixedAcks(0)
    assert FixedAcks(9).update(None) == 9


def test_reorder_barely_moves_ewma():
    W, rounds = 25, 12

    def drive(acks_seq):
        e = PerAckEwma(G=16)
        e.initialize(W)
        for i, acks_ in enumerate(acks_seq):
            e.update(1 if i % 12 == 0 else 0, acks_)
        return e.av_up

    base = drive(replay_alt1(W, in_order(W, rounds)))
    reord = drive(replay_alt1(W, delayed(W, rounds, seq=60, hold=4)))
    assert abs(reord - base) <= 0.01 * base
