import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rtrx.analysis import transfer
from rtrx.topologies import FirDesign, RtrDesign, build_rtr, design_fir, rtr_closed_form
from rtrx.timedomain import (
    Signal,
    Tone,
    branch_response_time,
    delay_by_xcorr,
    delayed_error,
    fir_filter,
    measure_filter_delay,
    read_signal,
    reconstruct_error,
    synth_multitone,
    write_signal,
)

FS = 48000.0
DUR = 0.1


def test_single_tone():
    x = synth_multitone([Tone(1000.0)], FS, DUR)
    assert len(x) == 4800
    assert np.abs(x.samples).max() <= 1
    assert x.samples[0] == 1.0


def test_empty_spec():
    x = synth_multitone([], FS, DUR)
    assert len(x) == 4800 and not x.samples.any()


@pytest.mark.parametrize("tones, fragment", [
    ([Tone(30000.0)], "aliases"),
    ([Tone(1005.0)], "off-bin"),
    ([Tone(100.0), Tone(100.0)], "distinct"),
])
def test_bad_tones(tones, fragment):
    with pytest.raises(ValueError, match=fragment):
        synth_multitone(tones, FS, DUR)


def test_bad_duration():
    with pytest.raises(ValueError, match="whole number"):
        synth_multitone([Tone(100.0)], FS, 0.10001)


def test_signal_invariants():
    with pytest.raises(ValueError):
        Signal(np.zeros(3), 0)
    with pytest.raises(ValueError):
        Signal(np.array([1.0, np.nan]), 1.0)


def test_identity_and_zero_gain():
    tones = [Tone(100.0, 1.0, 0.3), Tone(3000.0, 0.5)]
    x = synth_multitone(tones, FS, DUR)
    assert np.array_equal(branch_response_time(tones, [1, 1], FS, DUR).samples, x.samples)
    assert not branch_response_time(tones, [0, 0], FS, DUR).samples.any()
    with pytest.raises(ValueError):
        branch_response_time(tones, [1], FS, DUR)


def test_rtr_branches_differ_but_sum():
    d = RtrDesign.from_crossover()
    tones = [Tone(100.0), Tone(3000.0)]
    g = [rtr_closed_form(d, 2 * math.pi * t.freq) for t in tones]
    x = synth_multitone(tones, FS, DUR)
    lf = branch_response_time(tones, [a for a, _ in g], FS, DUR)
    hf = branch_response_time(tones, [b for _, b in g], FS, DUR)
    assert reconstruct_error(x, lf, x) > 0.1 and reconstruct_error(x, x, hf) > 0.1
    assert reconstruct_error(x, lf, hf) <= 1e-12


def test_reconstruct_error_cases():
    x = synth_multitone([Tone(100.0)], FS, DUR)
    zero = Signal(np.zeros(len(x)), FS)
    assert reconstruct_error(x, x, zero) == 0
    with pytest.raises(ValueError):
        reconstruct_error(zero, zero, zero)
    with pytest.raises(ValueError):
        reconstruct_error(x, Signal(np.zeros(10), FS), zero)


@given(st.lists(st.integers(1, 239).filter(lambda b: b != 10), min_size=1, max_size=6, unique=True),
       st.lists(st.floats(0.01, 10), min_size=6, max_size=6),
       st.lists(st.floats(-math.pi, math.pi), min_size=6, max_size=6))
@settings(max_examples=40)
def test_ideal_rtr_any_tone_set(bins, amps, phases):
    # bin 10 is 1 kHz, the lossless resonance itself, where the transfer is undefined
    c = build_rtr(RtrDesign.from_crossover())
    tones = [Tone(b * 100.0, a, p) for b, a, p in zip(bins, amps, phases)]
    freqs = [t.freq for t in tones]
    g_lf = transfer(c, "lf", freqs, "in")
    g_hf = transfer(c, "hf", freqs, "in")
    x = synth_multitone(tones, FS, 0.01)
    lf = branch_response_time(tones, list(g_lf), FS, 0.01)
    hf = branch_response_time(tones, list(g_hf), FS, 0.01)
    assert reconstruct_error(x, lf, hf) <= 1e-12


def test_linearity_relative_error():
    d = RtrDesign.nonideal()
    c = build_rtr(d)
    freqs = [100.0, 8000.0]
    g_lf, g_hf = transfer(c, "lf", freqs, "in"), transfer(c, "hf", freqs, "in")
    errs = []
    for scale in (1.0, 8.0):
        tones = [Tone(f, scale) for f in freqs]
        x = synth_multitone(tones, FS, DUR)
        errs.append(reconstruct_error(x, branch_response_time(tones, list(g_lf), FS, DUR),
                                      branch_response_time(tones, list(g_hf), FS, DUR)))
    assert math.isclose(errs[0], errs[1], rel_tol=1e-12)


def test_nonideal_error_bound():
    d = RtrDesign.nonideal()
    c = build_rtr(d)
    tones = [Tone(100.0), Tone(8000.0)]
    freqs = [t.freq for t in tones]
    g_lf, g_hf = transfer(c, "lf", freqs, "in"), transfer(c, "hf", freqs, "in")
    x = synth_multitone(tones, FS, DUR)
    err = reconstruct_error(x, branch_response_time(tones, list(g_lf), FS, DUR),
                            branch_response_time(tones, list(g_hf), FS, DUR))
    eps = np.abs(g_lf + g_hf - 1)
    assert err <= 1e-2
    assert err <= eps.max() * (1 + 1e-12)
    assert eps.max() / 2 <= err


def test_fir_filter_basics():
    x = Signal(np.arange(1.0, 6.0), FS)
    assert np.array_equal(fir_filter([1.0], x).samples, x.samples)
    assert np.array_equal(fir_filter([0.0, 1.0], x).samples, [0, 1, 2, 3, 4])
    with pytest.raises(ValueError):
        fir_filter([], x)


def test_fir_pair_reconstruction():
    d = FirDesign()
    h_lp, h_hp = design_fir(d)
    x = synth_multitone([Tone(100.0), Tone(3000.0, 0.7, 1.0)], d.f_s, DUR)
    y = fir_filter(h_lp, x) + fir_filter(h_hp, x)
    assert delayed_error(x, y, d.delay_samples, d.n_taps) <= 1e-12
    assert measure_filter_delay(h_lp + h_hp) == d.delay_samples
    # a tone record is periodic, so its correlation peak is only defined modulo the period
    assert (delay_by_xcorr(x, y) - d.delay_samples) % 480 == 0
    with pytest.raises(ValueError):
        delayed_error(x, y, 10, 5)


def test_signal_file_round_trip(tmp_path):
    x = synth_multitone([Tone(100.0), Tone(3000.0)], FS, 0.01)
    p = tmp_path / "x.csv"
    write_signal(p, x)
    assert p.read_text().startswith("# fs=48000.0\n0,")
    y = read_signal(p)
    assert y.f_s == FS and np.allclose(y.samples, x.samples, rtol=1e-12, atol=1e-15)
    p.write_text("nope\n")
    with pytest.raises(ValueError):
        read_signal(p)


def test_tone_at_lossless_resonance_is_rejected():
    from rtrx.mna import SingularCircuitError

    c = build_rtr(RtrDesign.from_crossover())
    with pytest.raises(SingularCircuitError, match="vanishes"):
        transfer(c, "lf", [1000.0], "in")
