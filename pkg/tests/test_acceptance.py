"""Acceptance criteria, one test per criterion.

Each test prints a single ``[PASS]``/``[FAIL]`` line (visible with
``pytest -s`` or by running this file directly) and then asserts.
"""

import contextlib
import io
import math
import time

import numpy as np

from noswitch.attacks import AttackKind, optimize_attack
from noswitch.bb84 import bsc_information_rate, compare_protocols
from noswitch.cli import main
from noswitch.keyrate import (
    Target,
    Variant,
    alice_conditional_variance,
    eve_conditional_variance_bound,
    secret_key_rate,
    security_threshold,
)
from noswitch.protocol import ChannelParams, SourceParams
from noswitch.verify import MAX_SE, run_oracle_suite

SRC = SourceParams.coherent(100.0)


def report(n, ok, detail, elapsed=None, limit=None):
    if limit is not None:
        ok = ok and elapsed < limit
        detail += f"; {elapsed:.2f} s (limit {limit:g} s)"
    print(f"[{'PASS' if ok else 'FAIL'}] criterion {n}: {detail}")
    assert ok, detail


def test_criterion_1_unit_transmission_rate_and_sweep():
    t0 = time.perf_counter()
    r = secret_key_rate(SRC, ChannelParams(1.0, 1.0)).delta_i
    err = abs(r - math.log2(50.5))
    etas = np.linspace(0.01, 1.0, 100)
    sweep = [secret_key_rate(SRC, ChannelParams(e, 1.0)).delta_i for e in etas]
    positive = all(v > 0 for v in sweep)
    monotone = all(b > a for a, b in zip(sweep, sweep[1:]))
    elapsed = time.perf_counter() - t0
    report(1, err <= 1e-9 and positive and monotone,
           f"rate(eta=1)={r:.9f}, |err|={err:.1e}, sweep positive={positive}, increasing={monotone}", elapsed, 1.0)


def test_criterion_2_no_switching_dominates():
    t0 = time.perf_counter()
    worst = math.inf
    ok = True
    for k in range(101):
        eta = k / 100
        c = ChannelParams(eta, 1.0)
        ns = secret_key_rate(SRC, c, Variant.NO_SWITCHING).delta_i
        sw = secret_key_rate(SRC, c, Variant.SWITCHING).delta_i
        ok &= ns >= sw and (eta == 0 or ns > sw)
        if eta > 0:
            worst = min(worst, ns - sw)
    elapsed = time.perf_counter() - t0
    report(2, ok, f"101 points, smallest margin for eta>0 = {worst:.3e} bits", elapsed, 1.0)


def test_criterion_3_security_frontier():
    t0 = time.perf_counter()
    vacuum_ok = all(secret_key_rate(SRC, ChannelParams(k / 100, 1.0)).delta_i >= 0 for k in range(101))
    vacuum_ok &= security_threshold(1.0, 100.0) is None
    crossings = [security_threshold(v, 100.0, tol=1e-6) for v in (1.2, 1.5, 2.0)]
    exist = all(c is not None for c in crossings)
    increasing = exist and crossings[0] < crossings[1] < crossings[2]
    elapsed = time.perf_counter() - t0
    shown = ", ".join("none" if c is None else f"{c:.6f}" for c in crossings)
    report(3, vacuum_ok and increasing,
           f"V_N=1 nonnegative={vacuum_ok}; eta* at V_N=1.2,1.5,2.0 = {shown}", elapsed, 1.0)


def test_criterion_4_heisenberg_saturation():
    worst = 0.0
    for eta in np.linspace(0.0, 1.0, 10):
        for v_n in np.linspace(1.0, 3.0, 10):
            for v_a in (10.0, 100.0, 1000.0):
                src = SourceParams.coherent(v_a)
                c = ChannelParams(eta, v_n)
                for q, cq in (("+", "-"), ("-", "+")):
                    eve = eve_conditional_variance_bound(src, c, q, Target.DIRECT).value
                    alice = alice_conditional_variance(src, c, Target.DIRECT, cq, minimize_squeezing=True).value
                    # Alice's minimum also against its independent closed form
                    closed = eta / v_a + (1 - eta) * v_n
                    worst = max(worst, abs(eve * alice - 1), abs(alice - closed) / closed)
    report(4, worst <= 1e-12, f"max |V_E|B' * V_A|B'min - 1| on 10x10x3 grid = {worst:.1e}")


def test_criterion_5_attack_ordering_and_equivalence():
    t0 = time.perf_counter()
    min_gap, max_diff = math.inf, 0.0
    for eta in np.round(np.arange(0.1, 1.0, 0.1), 10):
        for v_n in (1.0, 1.5, 2.0):
            c = ChannelParams(float(eta), v_n)
            coh = optimize_attack(SRC, c, AttackKind.COHERENT_FF)
            ent = optimize_attack(SRC, c, AttackKind.ENTANGLEMENT_FF)
            min_gap = min(min_gap, coh.gap, ent.gap)
            max_diff = max(max_diff, abs(ent.delta_i_attack - coh.delta_i_attack))
    elapsed = time.perf_counter() - t0
    report(5, min_gap >= -1e-9 and max_diff < 1e-3,
           f"27 points, min gap = {min_gap:.3e}, max |entFF - cohFF| = {max_diff:.1e} bits", elapsed, 30.0)


def test_criterion_6_monte_carlo_oracle():
    t0 = time.perf_counter()
    results = run_oracle_suite(n=1_000_000, seed=42)
    elapsed = time.perf_counter() - t0
    worst = max(r.se_multiple for r in results)
    failed = [r.name for r in results if not r.passed]
    report(6, len(results) >= 20 and not failed,
           f"{len(results)} checks at N=1e6, worst {worst:.2f} SE (limit {MAX_SE:g}), failed={failed}", elapsed, 60.0)


def test_criterion_7_bb84_comparison():
    t0 = time.perf_counter()
    analytic = bsc_information_rate(1 / 6)
    rep = compare_protocols(1_000_000)
    ns, sw = rep.no_switching.bits_per_signal, rep.switching.bits_per_signal
    elapsed = time.perf_counter() - t0
    ok = abs(analytic - 0.35002) <= 5e-5 and abs(ns - 0.35) <= 0.005 and abs(sw - 0.5) <= 0.005
    ok &= rep.verdict == "switching wins"
    report(7, ok, f"bsc(1/6)={analytic:.5f}, no-switching={ns:.4f}, switching={sw:.4f}, verdict={rep.verdict!r}",
           elapsed, 10.0)


def _capture(argv):
    buf = io.StringIO()
    with contextlib.redirect_stdout(buf):
        code = main(argv)
    return code, buf.getvalue().encode()


def test_criterion_8_determinism():
    kr = ["keyrate", "--eta-min", "0", "--eta-max", "1", "--eta-steps", "21", "--vn-min", "1", "--vn-max", "2",
          "--vn-steps", "5"]
    vf = ["verify", "--n", "100000", "--seed", "42"]
    same_kr = _capture(kr) == _capture(kr)
    same_vf = _capture(vf) == _capture(vf)
    report(8, same_kr and same_vf, f"keyrate byte-identical={same_kr}, verify byte-identical={same_vf}")


if __name__ == "__main__":
    import sys

    failures = 0
    for name, fn in sorted(globals().items()):
        if name.startswith("test_criterion_"):
            try:
                fn()
            except AssertionError:
                failures += 1
    sys.exit(1 if failures else 0)
