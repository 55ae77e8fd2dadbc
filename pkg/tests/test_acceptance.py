"""Acceptance criteria, one test each.

Every test prints a single ``ACnn PASS|FAIL`` line with the measured value,
then asserts. The lines appear inline and again as a table at the end of the
run: ``pytest tests/test_acceptance.py`` or ``python tests/test_acceptance.py``.
"""

import random
import sys
import time
from fractions import Fraction

import pytest

from peracklab.ack_tracker import FixedAcks, delayed, in_order, replay_alt1
from peracklab.approx import LARGE_N, effective_gain_numeric
from peracklab.cc import AckEvent, CcConfig, ProposedAimd, ai_step, md_step
from peracklab.ewma import PerAckEwma
from peracklab.harness import fig3, rows_to_csv, run_ab, shipped, shipped_scenarios, with_variant
from peracklab.intdiv import DEC, INC, DualCarry, divu
from peracklab.netsim import run


# 1 -------------------------------------------------------------------------


@pytest.fixture(scope="module")
def halving_ab():
    return run_ab(shipped("capacity_halving"), ["dctcp_baseline", "proposed_aimd"])


def test_ac01_machinery_lag(halving_ab, report):
    r = halving_ab
    base = r.stats["dctcp_baseline"].rounds_to_half_reduction
    cand = r.stats["proposed_aimd"].rounds_to_half_reduction
    delta = r.lag_delta_rounds
    ok = base is not None and cand is not None and base >= 2.0 and cand <= 1.0 and delta >= 1.0
    report(1, ok, "rounds to 50% of settled reduction after capacity halving",
           f"dctcp_baseline={base:.2f} (>=2.0) proposed_aimd={cand:.2f} (<=1.0) "
           f"lag_delta={delta:.2f} (>=1.0)")
    assert base >= 2.0
    assert cand <= 1.0
    assert delta >= 1.0


# 2, 3 ----------------------------------------------------------------------


def test_ac02_worst_case_gain(report):
    g = effective_gain_numeric(2, LARGE_N)
    ok = abs(g - 2.541) <= 0.01 and abs((g - 2) - 0.54) <= 0.01
    report(2, ok, "G'(2, 1e6)", f"{g:.4f} (2.541 +/- 0.01), error {g - 2:.4f} (0.54 +/- 0.01)")
    assert g == pytest.approx(2.541, abs=0.01)
    assert g - 2 == pytest.approx(0.54, abs=0.01)


def test_ac03_half_step_rule(report):
    diffs = {
        (G, n): effective_gain_numeric(G, n) - G
        for G in (8, 16, 32)
        for n in (100, 1000, 10**4, LARGE_N)
    }
    lo, hi = min(diffs.values()), max(diffs.values())
    ok = 0.45 <= lo and hi <= 0.55
    report(3, ok, "G' - G for G in {8,16,32}, n >= 100", f"range [{lo:.4f}, {hi:.4f}] within [0.45, 0.55]")
    assert ok


# 4 -------------------------------------------------------------------------


def test_ac04_smoothing_time_invariance(report):
    G, av0 = 16, 2**16
    factors = {}
    ok = True
    for n in (1, 4, 16, 64, 256):
        e = PerAckEwma(G=G, av_up=av0, initialized=True)
        for _ in range(n):
            e.update(0, n)
        factors[n] = e.av_up / av0
        ok &= av0 * 0.9375 - 1 <= e.av_up <= av0 * 0.9400 + 1
    report(4, ok, "per-round markless decay factor, G=16",
           " ".join(f"n={n}:{f:.5f}" for n, f in factors.items()) + " within [0.9375, 0.9400] +/- 1 unit")
    assert ok


# 5 -------------------------------------------------------------------------


@pytest.mark.slow
def test_ac05_md_round_total(report):
    bad = 0
    checked = 0
    for G in (2, 16, 64):
        for acks in range(1, 65):
            D = acks * 2 * G
            carry = divu(0, D, DEC)
            deposited = released = 0
            for av_up in range(0, 4097):
                total = 0
                for _ in range(acks):
                    carry = md_step(carry, av_up, acks, G)
                    total += carry.quot
                deposited += acks * av_up
                released += total
                floor = av_up // (2 * G)
                checked += 1
                if total not in (floor, floor + 1):
                    bad += 1
            # residue carried, never lost
            if released * D + carry.rem[DEC] != deposited:
                bad += 1
    ok = bad == 0
    report(5, ok, "MD total over a CWR round in {floor(av_up/2G), +1}",
           f"{checked} (av_up, acks, G) rounds with carried residue, {bad} violations")
    assert ok


# 6 -------------------------------------------------------------------------


def test_ac06_ai_round_total(report):
    bad = []
    for G in (2, 16, 64):
        for acks in (1, 7, 20, 64):
            c = ProposedAimd(CcConfig(init_cwnd=10, G=G), FixedAcks(acks))
            seq = 0
            for rnd in range(1, 101):
                for _ in range(acks):
                    seq += 1
                    c.on_ack(AckEvent(covered_pkts=1, snd_una=seq), seq + acks)
                if c.cwnd != 10 + rnd:
                    bad.append((G, acks, rnd, c.cwnd))
                    break
    ok = not bad
    report(6, ok, "AI: +1 per markless round, 100 rounds", f"net +100 for all (G, acks); failures {bad[:3]}")
    assert ok


# 7 -------------------------------------------------------------------------


@pytest.mark.slow
def test_ac07_dual_remainder_invariants(report):
    rng = random.Random(7)
    G, acks = 16, 20
    D = acks * 2 * G
    carry = DualCarry()
    up = down = net = 0
    complement_bad = underflow = 0
    max_err = Fraction(0)
    at_one = ties = 0
    for _ in range(10**6):
        if rng.random() < 0.5:
            carry = ai_step(carry, acks, G)
            up += carry.quot
            net += 2 * G
            dec = False
        else:
            av_up = rng.randrange(0, 8 * D)
            carry = md_step(carry, av_up, acks, G)
            down += carry.quot
            net -= av_up
            dec = True
        if carry.rem[INC] + carry.rem[DEC] != D:
            complement_bad += 1
        if min(carry.rem) < 0 or carry.quot < 0:
            underflow += 1
        err = abs(Fraction(up - down) - Fraction(net, D))
        max_err = max(max_err, err)
        if err == 1:
            at_one += 1
            # a decrease whose numerator was an exact multiple of D
            ties += dec and carry.rem[DEC] == 0
    ok = complement_bad == 0 and underflow == 0 and max_err < 1
    report(7, ok, "dual remainders over 1e6 interleaved AI/MD deposits",
           f"complement violations {complement_bad}, underflows {underflow}, "
           f"max |net quot - rational| = {float(max_err):.6f} (< 1 required); "
           f"{at_one} calls at exactly 1, of which {ties} are decreases ending on rem[1] = 0")
    assert complement_bad == 0
    assert underflow == 0
    assert max_err < 1


# 8 -------------------------------------------------------------------------


def test_ac08_fig3_immediacy(report):
    out = fig3()
    pa, pr = out["fixed_perack"], out["fixed_perrtt"]
    acks_a = [r for r in pa if r.cum_acks > 0]
    acks_r = [r for r in pr if r.cum_acks > 0]
    mark_a = next(r for r in acks_a if r.cum_marks > 0)
    rise = next(r for r in acks_a if r.ewma_raw > 0)
    mark_r = next(r for r in acks_r if r.cum_marks > 0)
    # once alpha is nonzero every markless boundary decays it, which exposes
    # the round lattice; the first change must sit on that lattice
    changes = []
    for prev, r in zip(acks_r, acks_r[1:]):
        if r.ewma_downscaled != prev.ewma_downscaled and r.cum_acks != prev.cum_acks:
            changes.append(r)
    first, nxt, third = changes[:3]
    spacing = nxt.cum_acks - first.cum_acks
    on_lattice = third.cum_acks - nxt.cum_acks == spacing
    ok = (rise.time_us == mark_a.time_us and rise.cum_acks == mark_a.cum_acks
          and on_lattice and 0 < first.cum_acks - mark_r.cum_acks < spacing
          and first.time_us > mark_r.time_us)
    report(8, ok, "per-ACK EWMA moves on first marked ACK, per-RTT alpha at next boundary",
           f"first mark ACK #{mark_a.cum_acks} t={mark_a.time_us}us, av_up rises on ACK #{rise.cum_acks}; "
           f"alpha first changes ACK #{first.cum_acks} t={first.time_us}us "
           f"(round = {spacing} ACKs, next boundaries #{nxt.cum_acks}, #{third.cum_acks})")
    assert rise.time_us == mark_a.time_us
    assert on_lattice
    assert 0 < first.cum_acks - mark_r.cum_acks < spacing
    assert first.time_us > mark_r.time_us


# 9 -------------------------------------------------------------------------


def test_ac09_reorder_robustness(report):
    W, rounds, seq = 25, 20, 100
    trace = replay_alt1(W, delayed(W, rounds, seq=seq, hold=4))
    window = trace[seq : seq + 6]
    ref = replay_alt1(W, in_order(W, rounds))

    def drive(acks_seq):
        e = PerAckEwma(G=16)
        e.initialize(W)
        for i, a in enumerate(acks_seq):
            e.update(1 if i % 10 == 3 else 0, a)
        return e.av_up

    a, b = drive(ref), drive(trace)
    rel = abs(a - b) / a
    ok = window == [24, 24, 24, 24, 29, 25] and rel <= 0.01
    report(9, ok, "Alt1 under one packet delayed by 4 ACKs",
           f"acks_ {window}; final av_up {b} vs in-order {a} ({rel:.3%} <= 1%)")
    assert window == [24, 24, 24, 24, 29, 25]
    assert rel <= 0.01


# 10 ------------------------------------------------------------------------


def test_ac10_app_limited_scaling(report):
    s = shipped("app_limited")
    md = {v: run(with_variant(s, v))[1].flows[0].md_per_round for v in ("proposed_aimd", "dctcp_baseline")}
    ratio = md["proposed_aimd"] / md["dctcp_baseline"]
    ok = 0.15 <= ratio <= 0.35
    report(10, ok, "app-limited (flight = cwnd/4) reduction ratio proposed/dctcp",
           f"{md['proposed_aimd']:.3f} / {md['dctcp_baseline']:.3f} = {ratio:.3f} in [0.15, 0.35]")
    assert ok


# 11 ------------------------------------------------------------------------


def test_ac11_determinism_all_scenarios(report):
    mismatched, slowest = [], (0.0, "")
    names = sorted(shipped_scenarios())
    for name in names:
        t = time.perf_counter()
        a = rows_to_csv(run(shipped(name), seed=5)[0])
        slowest = max(slowest, (time.perf_counter() - t, name))
        b = rows_to_csv(run(shipped(name), seed=5)[0])
        if a != b:
            mismatched.append(name)
    ok = not mismatched and slowest[0] < 10.0
    report(11, ok, "byte-identical CSV on rerun",
           f"{len(names) - len(mismatched)}/{len(names)} scenarios identical; "
           f"slowest {slowest[1]} {slowest[0]:.2f}s (< 10 s)")
    assert not mismatched
    assert slowest[0] < 10.0


# 12 ------------------------------------------------------------------------


def test_ac12_steady_state_marks(report):
    _, st = run(shipped("steady_state"))
    m = st.flows[0].marks_per_round
    ok = 0.5 <= m <= 8.0
    report(12, ok, "steady-state marks per round, single proposed_aimd flow",
           f"{m:.2f} in [0.5, 8.0] (queue mean {st.mean_queue:.1f} pkts, K={shipped('steady_state').mark_threshold})")
    assert ok


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
