"""Steady-state multi-tone reconstruction and FIR filtering.

Tones are restricted to whole numbers of cycles over the record, so applying
a branch's complex gain per tone gives the exact steady-state output of the
LTI branch with no windowing or discretization error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np


@dataclass(frozen=True)
class Signal:
    samples: np.ndarray
    f_s: float

    def __post_init__(self):
        if not self.f_s > 0:
            raise ValueError("sample rate must be positive")
        arr = np.asarray(self.samples, dtype=float)
        if not np.all(np.isfinite(arr)):
            raise ValueError("signal contains non-finite samples")
        object.__setattr__(self, "samples", arr)

    def __len__(self) -> int:
        return len(self.samples)

    def __add__(self, other: "Signal") -> "Signal":
        _check_compatible(self, other)
        return Signal(self.samples + other.samples, self.f_s)

    def rms(self) -> float:
        return float(np.sqrt(np.mean(self.samples**2))) if len(self) else 0.0


@dataclass(frozen=True)
class Tone:
    freq: float
    amplitude: float = 1.0
    phase: float = 0.0  # radians


ToneSpec = Sequence[Tone]


def _check_tones(spec: ToneSpec, f_s: float, duration: float) -> int:
    n = round(duration * f_s)
    if n < 1 or not math.isclose(n, duration * f_s, rel_tol=0, abs_tol=1e-9):
        raise ValueError(f"duration {duration} s is not a whole number of samples at {f_s} Hz")
    freqs = [t.freq for t in spec]
    if len(set(freqs)) != len(freqs):
        raise ValueError("tone frequencies must be distinct")
    for t in spec:
        if not 0 < t.freq < f_s / 2:
            raise ValueError(f"tone at {t.freq} Hz aliases at f_s = {f_s} Hz")
        cycles = t.freq * duration
        if not math.isclose(cycles, round(cycles), rel_tol=0, abs_tol=1e-9):
            raise ValueError(
                f"tone at {t.freq} Hz is off-bin: {cycles:g} cycles in {duration} s"
            )
    return n


def _render(spec: ToneSpec, gains: Sequence[complex], f_s: float, n: int) -> np.ndarray:
    t = np.arange(n) / f_s
    out = np.zeros(n)
    for tone, g in zip(spec, gains):  # fixed tone order keeps the sum bit-stable
        out += tone.amplitude * abs(g) * np.cos(2 * np.pi * tone.freq * t + tone.phase + np.angle(g))
    return out


def synth_multitone(spec: ToneSpec, f_s: float, duration: float) -> Signal:
    n = _check_tones(spec, f_s, duration)
    return Signal(_render(spec, [1.0] * len(spec), f_s, n), f_s)


def branch_response_time(spec: ToneSpec, gains: Sequence[complex], f_s: float, duration: float) -> Signal:
    """Steady-state output when each tone passes through complex gain ``gains[i]``."""
    if len(gains) != len(spec):
        raise ValueError(f"need one gain per tone: {len(gains)} gains for {len(spec)} tones")
    n = _check_tones(spec, f_s, duration)
    return Signal(_render(spec, gains, f_s, n), f_s)


def _check_compatible(a: Signal, b: Signal) -> None:
    if len(a) != len(b) or a.f_s != b.f_s:
        raise ValueError("signals differ in length or sample rate")


def reconstruct_error(x: Signal, lf: Signal, hf: Signal) -> float:
    """rms(x - (lf + hf)) / rms(x) over the whole record."""
    _check_compatible(x, lf)
    _check_compatible(x, hf)
    ref = x.rms()
    if ref == 0:
        raise ValueError("input signal is identically zero")
    return float(np.sqrt(np.mean((x.samples - (lf.samples + hf.samples)) ** 2)) / ref)


def delayed_error(x: Signal, y: Signal, delay: int, start: int) -> float:
    """Relative RMS of x[n - delay] - y[n] over n >= start (the settled interior)."""
    _check_compatible(x, y)
    if not 0 <= delay <= start < len(x):
        raise ValueError(f"need 0 <= delay <= start < {len(x)}, got delay={delay}, start={start}")
    ref = x.samples[start - delay : len(x) - delay]
    rms_ref = float(np.sqrt(np.mean(ref**2)))
    if rms_ref == 0:
        raise ValueError("input signal is identically zero over the interior")
    return float(np.sqrt(np.mean((ref - y.samples[start:]) ** 2)) / rms_ref)


def fir_filter(h, x: Signal) -> Signal:
    """Direct-form convolution from zero state, truncated to the input length."""
    h = np.asarray(h, dtype=float)
    if h.size == 0:
        raise ValueError("empty filter")
    return Signal(np.convolve(x.samples, h)[: len(x)], x.f_s)


def delay_by_xcorr(x: Signal, y: Signal) -> int:
    """Lag (in samples) at which y best matches x, from the cross-correlation peak."""
    _check_compatible(x, y)
    c = np.correlate(y.samples, x.samples, mode="full")
    return int(np.argmax(c)) - (len(x) - 1)


def measure_filter_delay(h, n: int = 8192, f_s: float = 1.0, seed: int = 0) -> int:
    """Delay of filter ``h`` in samples, by cross-correlating white noise.

    Periodic probes (e.g. multi-tone records) make the correlation peak
    ambiguous modulo the period, so a fixed-seed noise record is used.
    """
    x = Signal(np.random.default_rng(seed).standard_normal(n), f_s)
    return delay_by_xcorr(x, fir_filter(h, x))


def write_signal(path: Path, x: Signal) -> None:
    """Two-column CSV (index, value) under a one-line ``# fs=<Hz>`` header."""
    with open(path, "w") as fh:
        fh.write(f"# fs={x.f_s!r}\n")
        for i, v in enumerate(x.samples):
            fh.write(f"{i},{v:.12e}\n")


def read_signal(path: Path) -> Signal:
    with open(path) as fh:
        header = fh.readline().strip()
        if not header.startswith("# fs="):
            raise ValueError(f"{path}: missing '# fs=' header")
        f_s = float(header[5:])
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    if data.size and not np.array_equal(data[:, 0], np.arange(len(data))):
        raise ValueError(f"{path}: index column is not 0..n-1")
    return Signal(data[:, 1] if data.size else np.zeros(0), f_s)
