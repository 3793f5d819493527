"""Acceptance criteria, one test each, at the stated tolerances.

Each test records a single PASS/FAIL line (shown in the terminal summary of
the pytest run, and printed immediately when run with ``-s``) and then
asserts, so a failing criterion is also a failing test.
"""

import math
import time

import numpy as np
import pytest
from hypothesis import given, settings

from conftest import ACCEPTANCE_LINES
from test_netlist import circuits, run_fuzz

from rtrx import analysis, mna
from rtrx.analysis import FrequencyGrid, ac_sweep, complementarity_report, find_resonance, refine_peak
from rtrx.comparison import compare
from rtrx.montecarlo import ToleranceSpec, mc_run
from rtrx.netlist import emit_netlist, parse_netlist
from rtrx.report import write_mc_csv
from rtrx.timedomain import (
    Tone,
    branch_response_time,
    delayed_error,
    fir_filter,
    reconstruct_error,
    synth_multitone,
)
from rtrx.topologies import (
    FirDesign,
    Lc2Design,
    RtrDesign,
    build_lc2,
    build_rtr,
    design_fir,
    lc2_closed_form,
    rtr_closed_form,
)
from rtrx.transformer import TransformerParams, epsilon_closed_form

GRID = FrequencyGrid(20.0, 20000.0, 500)
EPS_1E12_DB = 20 * math.log10(1e-12)


def record(num, name, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] C{num} {name}: {detail}"
    ACCEPTANCE_LINES.append((num, line))
    print(line)
    return ok


def rtr_sweep(design, grid=GRID):
    return ac_sweep(build_rtr(design), "lf", "hf", grid, topology="rtr", f0=design.f0)


def test_c1_complementarity():
    t0 = time.perf_counter()
    worst_ref = float(np.abs(rtr_sweep(RtrDesign.from_crossover()).eps).max())
    rng = np.random.default_rng(20240101)
    worst_rand = 0.0
    for _ in range(100):
        L1 = 10 ** rng.uniform(-5, 0)
        C3 = 10 ** rng.uniform(-9, -3)
        d = RtrDesign(C3, TransformerParams.one_to_one(L1), 0.1)
        worst_rand = max(worst_rand, float(np.abs(rtr_sweep(d).eps).max()))
    dt = time.perf_counter() - t0
    ok = worst_ref <= 1e-12 and worst_rand <= 1e-12 and dt < 5
    record(1, "complementarity", ok,
           f"ref max|eps|={worst_ref:.3g}, 100 random designs max|eps|={worst_rand:.3g} (<=1e-12), "
           f"runtime {dt:.2f}s (<5s)")
    assert ok


def test_c2_nonideal_error():
    d = RtrDesign.nonideal()
    sw = rtr_sweep(d)
    rep = complementarity_report(sw)
    oracle = np.array([epsilon_closed_form(d.transformer, d.C3, d.R_s, w) for w in GRID.omegas])
    diff = float(np.abs(sw.eps - oracle).max())
    ok_bound = rep.max_eps_db_flat <= -50
    ok = ok_bound and diff <= 1e-9
    record(2, "non-ideal error", ok,
           f"flat-band max|eps|={rep.max_eps_db_flat:.2f} dB (<=-50 dB: {'yes' if ok_bound else 'NO'}; "
           f"<-40 dB: {'yes' if rep.max_eps_db_flat < -40 else 'no'}), "
           f"MNA vs closed form max diff={diff:.3g} (<=1e-9)")
    assert ok


def test_c3_oracle_equivalence():
    worst = 0.0
    cases = [(d, build_rtr(d), "lf", "hf", rtr_closed_form)
             for d in (RtrDesign.from_crossover(), RtrDesign.nonideal())]
    cases.append((Lc2Design(), build_lc2(Lc2Design()), "lp", "hp", lc2_closed_form))
    for design, circuit, lf, hf, oracle in cases:
        sw = ac_sweep(circuit, lf, hf, GRID)
        ref = np.array([oracle(design, w) for w in GRID.omegas])
        for got, want in ((sw.h_lf, ref[:, 0]), (sw.h_hf, ref[:, 1])):
            worst = max(worst, float((np.abs(got - want) / np.abs(want)).max()))
    ok = worst <= 1e-9
    record(3, "oracle equivalence", ok, f"max relative diff over RTR ideal/non-ideal and LC2 = {worst:.3g} (<=1e-9)")
    assert ok


def test_c4_power_balance():
    worst = 0.0
    n = 0
    for c in (build_rtr(RtrDesign.from_crossover()), build_rtr(RtrDesign.nonideal()), build_lc2(Lc2Design())):
        for sol in mna.solve_many(c, GRID.omegas):
            s = abs(mna.source_power(sol, c))
            worst = max(worst, abs(mna.power_balance(sol, c)) / s)
            n += 1
    ok = worst <= 1e-9
    record(4, "power balance", ok, f"max |sum V conj(I)|/|S_source| = {worst:.3g} over {n} solves (<=1e-9)")
    assert ok


def test_c5_resonance():
    step = 1000 * (GRID.ratio - 1)
    # grid detection on the non-ideal reference design
    res = find_resonance(rtr_sweep(RtrDesign.nonideal()), "lf")
    ok_f = res is not None and abs(res.f_peak - 1000) <= step
    # magnitude: R_w only (input-referred) and R_w + R_s (source-referred)
    errs = []
    for design, ref in ((RtrDesign.from_crossover(R_w=0.1, R_s=0.0), "in"), (RtrDesign.nonideal(), None)):
        z_c3 = 1 / (design.omega0 * design.C3)
        expected = z_c3 / (design.transformer.R_w + (design.R_s if ref is None else 0.0))
        _, mag = refine_peak(build_rtr(design), "lf", 900, 1100, ref)
        errs.append(abs(mag - expected) / expected)
    ok = ok_f and max(errs) <= 0.01
    f_txt = f"{res.f_peak:.2f} Hz" if res else "no peak"
    record(5, "resonance", ok,
           f"peak at {f_txt} (|f-1000|<={step:.2f} Hz), |H_LF| peak vs |Z_C3|/(R_w+R_s) "
           f"rel err {errs[0]:.2e} (R_w only), {errs[1]:.2e} (R_w+R_s) (<=1%)")
    assert ok


def test_c6_monte_carlo(tmp_path):
    t0 = time.perf_counter()
    spec = ToleranceSpec(0.05, 200, 42)
    nonideal = mc_run(RtrDesign.nonideal(), spec, GRID)
    ideal = mc_run(RtrDesign.from_crossover(), spec, GRID)
    lc = mc_run(Lc2Design(), spec, GRID)
    again = mc_run(RtrDesign.nonideal(), spec, GRID)
    dt = time.perf_counter() - t0
    write_mc_csv(tmp_path / "a.csv", nonideal)
    write_mc_csv(tmp_path / "b.csv", again)
    identical = (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()

    rtr_dev = nonideal.agg("branch_dev_flat_deg")
    ideal_eps = float(np.nanmax(ideal.column("max_eps_db_full")))
    lc_dev = lc.agg("interbranch_dev_xover_deg")
    sep = max(nonideal.agg("interbranch_dev_xover_deg"), ideal.agg("interbranch_dev_xover_deg")) < lc_dev
    ok = rtr_dev < 1 and ideal_eps <= EPS_1E12_DB and lc_dev >= 5 and sep and identical and dt < 60
    record(6, "monte carlo", ok,
           f"RTR branch phase dev max={rtr_dev:.4f} deg (<1), ideal max|eps|={ideal_eps:.1f} dB (<=-240), "
           f"LC2 phase dev near f0 max={lc_dev:.2f} deg (>=5), RTR<LC {sep}, identical {identical}, "
           f"runtime {dt:.1f}s (<60s)")
    assert ok


def test_c7_table():
    res = compare(GRID, ToleranceSpec(0.05, 200, 42))
    t = res.table
    fir = FirDesign()
    want_fir = (fir.n_taps - 1) / (2 * fir.f_s) * 1e3
    fir_err = abs(t["latency_ms"]["fir"] - want_fir) / want_fir
    ok = (
        t["insertion_loss_db"]["rtr"] <= 1e-10
        and t["latency_ms"]["rtr"] == 0
        and 0.25 <= t["insertion_loss_db"]["lc2"] <= 0.65
        and fir_err <= 1e-12
    )
    record(7, "comparison table", ok,
           f"RTR IL={t['insertion_loss_db']['rtr']:.3g} dB (<=1e-10), latency={t['latency_ms']['rtr']:g} ms (0); "
           f"LC2 IL={t['insertion_loss_db']['lc2']:.3f} dB ([0.25,0.65]); "
           f"FIR latency={t['latency_ms']['fir']:.9f} ms vs {want_fir:.9f} (rel err {fir_err:.1e})")
    assert ok


def test_c8_time_domain():
    tones = [Tone(100.0), Tone(3000.0, 0.5, 0.7)]
    fs, dur = 48000.0, 0.1
    c = build_rtr(RtrDesign.from_crossover())
    freqs = [t.freq for t in tones]
    g_lf = analysis.transfer(c, "lf", freqs, "in")
    g_hf = analysis.transfer(c, "hf", freqs, "in")
    x = synth_multitone(tones, fs, dur)
    rtr_err = reconstruct_error(x, branch_response_time(tones, list(g_lf), fs, dur),
                                branch_response_time(tones, list(g_hf), fs, dur))
    d = FirDesign()
    h_lp, h_hp = design_fir(d)
    y = fir_filter(h_lp, x) + fir_filter(h_hp, x)
    fir_err = delayed_error(x, y, d.delay_samples, d.n_taps)
    ok = rtr_err <= 1e-12 and fir_err <= 1e-12
    record(8, "time-domain reconstruction", ok,
           f"ideal RTR rel RMS err={rtr_err:.3g}, FIR delay-compensated interior err={fir_err:.3g} (<=1e-12)")
    assert ok


def test_c9_parser():
    failures = []

    @given(circuits())
    @settings(max_examples=500, database=None)
    def round_trip(c):
        if parse_netlist(emit_netlist(c)) != c:
            failures.append(c)
            raise AssertionError("round trip changed the circuit")

    try:
        round_trip()
        rt_ok = True
    except AssertionError:
        rt_ok = False
    try:
        accepted, rejected = run_fuzz(100_000)
        crash = None
    except Exception as exc:  # anything but NetlistError is a crash
        accepted = rejected = 0
        crash = repr(exc)
    ok = rt_ok and crash is None and accepted + rejected == 100_000
    record(9, "parser", ok,
           f"round trip over 500 generated circuits {'ok' if rt_ok else 'FAILED'}; fuzz 100000 inputs: "
           f"{accepted} accepted, {rejected} positioned errors, crashes: {crash or 0}")
    assert ok
