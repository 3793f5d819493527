"""AC sweeps and crossover metrics.

Transfers are measured relative to the input terminal (the node behind any
source resistance), so ``H_LF + H_HF`` is the reconstruction of the voltage
actually applied to the crossover.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, Optional

import numpy as np
from scipy.optimize import minimize_scalar

from . import mna
from .netlist import GROUND, Circuit
from .topologies import REF_NODE

DB_FLOOR = -300.0
IL_CEIL = 300.0
# Condition estimates above this are flagged in the sweep warnings.
COND_WARN = 1e8
# |V(reference node)| / |source EMF| at or below this makes a transfer undefined.
REF_VANISH = 1e-12


@dataclass(frozen=True)
class FrequencyGrid:
    f_min: float = 20.0
    f_max: float = 20000.0
    n_points: int = 500

    def __post_init__(self):
        if not 0 < self.f_min < self.f_max:
            raise ValueError(f"need 0 < f_min < f_max, got {self.f_min}, {self.f_max}")
        if self.n_points < 2:
            raise ValueError("n_points must be >= 2")

    @property
    def freqs(self) -> np.ndarray:
        return np.geomspace(self.f_min, self.f_max, self.n_points)

    @property
    def omegas(self) -> np.ndarray:
        return 2 * np.pi * self.freqs

    @property
    def ratio(self) -> float:
        """Frequency ratio between neighbouring points."""
        return (self.f_max / self.f_min) ** (1 / (self.n_points - 1))


@dataclass(frozen=True)
class TransferPair:
    f: float
    H_LF: complex
    H_HF: complex
    sum: complex
    eps: complex
    phase_lf_deg: float
    phase_hf_deg: float


@dataclass
class SweepResult:
    topology: str
    grid: FrequencyGrid
    h_lf: np.ndarray
    h_hf: np.ndarray
    f0: Optional[float] = None
    h_in: Optional[np.ndarray] = None  # V(input terminal) / source EMF
    cond: Optional[np.ndarray] = None
    warnings: list[str] = field(default_factory=list)
    # H_LF + H_HF when it was formed at higher precision than the stored branches
    h_sum: Optional[np.ndarray] = None

    @property
    def f(self) -> np.ndarray:
        return self.grid.freqs

    @property
    def sum(self) -> np.ndarray:
        return self.h_lf + self.h_hf if self.h_sum is None else self.h_sum

    @property
    def eps(self) -> np.ndarray:
        return self.sum - 1

    def branch(self, name: str) -> np.ndarray:
        try:
            return {"lf": self.h_lf, "hf": self.h_hf, "sum": self.sum}[name]
        except KeyError:
            raise ValueError(f"branch must be lf, hf or sum, not {name!r}") from None

    def __len__(self) -> int:
        return len(self.h_lf)

    def __iter__(self) -> Iterator[TransferPair]:
        s = self.sum
        plf = wrap_deg(np.angle(self.h_lf, deg=True))
        phf = wrap_deg(np.angle(self.h_hf, deg=True))
        for i, f in enumerate(self.f):
            yield TransferPair(
                float(f), complex(self.h_lf[i]), complex(self.h_hf[i]),
                complex(s[i]), complex(s[i] - 1), float(plf[i]), float(phf[i]),
            )

    @property
    def pairs(self) -> list[TransferPair]:
        return list(self)


def wrap_deg(x):
    """Map angles in degrees onto (-180, 180]."""
    return -np.mod(180.0 - np.asarray(x, dtype=float), 360.0) + 180.0


def phase_distance(a, b):
    """Circular distance between angles in degrees, in [0, 180]."""
    return np.abs(wrap_deg(np.asarray(a) - np.asarray(b)))


def db(x) -> np.ndarray:
    mag = np.abs(np.asarray(x))
    with np.errstate(divide="ignore"):
        out = 20 * np.log10(mag)
    return np.maximum(out, DB_FLOOR)


def default_ref_node(circuit: Circuit) -> str:
    if REF_NODE in circuit.nodes():
        return REF_NODE
    return circuit.by_kind("ac_source")[0].nodes[0]


def _source_emf(circuit: Circuit) -> complex:
    src = circuit.by_kind("ac_source")[0]
    return src.value * np.exp(1j * math.radians(src.phase_deg))


def _check_reference(circuit: Circuit, ref: str, v_ref, omegas) -> None:
    # A lossless series resonance shorts the input terminal; what remains of
    # V(ref) is rounding noise and any ratio taken against it is meaningless.
    floor = REF_VANISH * abs(_source_emf(circuit))
    bad = np.flatnonzero(np.abs(v_ref) <= floor)
    if bad.size:
        raise mna.SingularCircuitError(
            float(np.atleast_1d(omegas)[bad[0]]), 0.0, math.inf,
            detail=f"reference node {ref!r} voltage vanishes (lossless resonance?)",
        )


def node_voltages(circuit: Circuit, nodes, omegas) -> tuple[list[np.ndarray], np.ndarray]:
    """Solve at every omega and pull out the requested node voltages."""
    sys = mna.stamp(circuit)
    x, cond = mna.solve_batch(sys, omegas)
    cols = []
    for n in nodes:
        if n == GROUND:
            cols.append(np.zeros(len(x), dtype=complex))
        elif n not in sys.node_index:
            raise ValueError(f"node {n!r} not in circuit")
        else:
            cols.append(x[:, sys.node_index[n]])
    return cols, cond


def ac_sweep(
    circuit: Circuit,
    lf_probe: str,
    hf_probe: str,
    grid: FrequencyGrid,
    ref_node: Optional[str] = None,
    topology: str = "netlist",
    f0: Optional[float] = None,
) -> SweepResult:
    ref = ref_node or default_ref_node(circuit)
    (v_lf, v_hf, v_in), cond = node_voltages(circuit, (lf_probe, hf_probe, ref), grid.omegas)
    _check_reference(circuit, ref, v_in, grid.omegas)
    # Extended-precision ratios: near a resonance |H| is large and the sum
    # cancels down to ~1.
    h_lf = v_lf / v_in
    h_hf = v_hf / v_in
    warnings = [
        f"f={f:.6g} Hz: condition estimate {c:.3e}"
        for f, c in zip(grid.freqs, cond) if c > COND_WARN
    ]
    return SweepResult(
        topology, grid, h_lf.astype(complex), h_hf.astype(complex), f0,
        (v_in / _source_emf(circuit)).astype(complex), cond, warnings,
        h_sum=(h_lf + h_hf).astype(complex),
    )


def fir_response(h, f, f_s: float):
    """Sum of h[n] * exp(-j*2*pi*f*n/f_s), for scalar or array f in [0, f_s/2)."""
    f_arr = np.asarray(f, dtype=float)
    if np.any(f_arr < 0) or np.any(f_arr >= f_s / 2):
        raise ValueError(f"frequency must lie in [0, {f_s / 2}) Hz")
    h = np.asarray(h, dtype=float)
    n = np.arange(len(h))
    resp = np.exp(-2j * np.pi * np.multiply.outer(f_arr / f_s, n)) @ h
    return complex(resp) if np.ndim(f) == 0 else resp


def fir_group_delay(h, f, f_s: float) -> np.ndarray:
    """Exact group delay in seconds: Re(sum n*h[n]*z^-n / sum h[n]*z^-n) / f_s.

    Unlike differencing the phase on a grid this cannot alias, which matters
    for long filters whose phase turns by many cycles between grid points.
    """
    h = np.asarray(h, dtype=float)
    n = np.arange(len(h))
    num = fir_response(n * h, f, f_s)
    den = fir_response(h, f, f_s)
    return np.real(np.asarray(num) / np.asarray(den)) / f_s


def fir_sweep(h_lp, h_hp, f_s: float, grid: FrequencyGrid, f0: Optional[float] = None) -> SweepResult:
    f = grid.freqs
    return SweepResult("fir", grid, fir_response(h_lp, f, f_s), fir_response(h_hp, f, f_s), f0)


# -- bands ------------------------------------------------------------------

def flat_band(f, f0: Optional[float]) -> np.ndarray:
    """Outside one octave either side of f0; the whole grid when f0 is unknown."""
    f = np.asarray(f)
    if f0 is None:
        return np.ones(f.shape, dtype=bool)
    return (f <= f0 / 2) | (f >= 2 * f0)


def crossover_band(f, f0: Optional[float]) -> np.ndarray:
    """Within one octave of f0."""
    f = np.asarray(f)
    if f0 is None:
        return np.ones(f.shape, dtype=bool)
    return (f >= f0 / 2) & (f <= 2 * f0)


def passband(f, f0: Optional[float]) -> np.ndarray:
    """At least one decade away from f0, where both branches are settled."""
    f = np.asarray(f)
    if f0 is None:
        return np.ones(f.shape, dtype=bool)
    return (f <= f0 / 10) | (f >= 10 * f0)


# -- metrics ------------------------------------------------------------------

@dataclass(frozen=True)
class ComplementarityReport:
    max_eps_db_full: float
    max_eps_db_flat: float
    n_flat: int


def complementarity_report(sweep: SweepResult, f0: Optional[float] = None) -> ComplementarityReport:
    if len(sweep) == 0:
        raise ValueError("empty sweep")
    f0 = sweep.f0 if f0 is None else f0
    mask = flat_band(sweep.f, f0)
    e = db(sweep.eps)
    flat = float(e[mask].max()) if mask.any() else DB_FLOOR
    return ComplementarityReport(float(e.max()), flat, int(mask.sum()))


@dataclass
class PhaseReport:
    sum_phase_deg: np.ndarray
    max_abs_sum_phase_deg: float
    interbranch_deg: np.ndarray  # phase(H_LF) - phase(H_HF)
    lf_dev_deg: Optional[float] = None
    hf_dev_deg: Optional[float] = None
    sum_dev_deg: Optional[float] = None
    interbranch_dev_deg: Optional[float] = None

    @property
    def branch_dev_deg(self) -> Optional[float]:
        if self.lf_dev_deg is None:
            return None
        return max(self.lf_dev_deg, self.hf_dev_deg)


def phase_metrics(
    sweep: SweepResult,
    reference: Optional[SweepResult] = None,
    band: Optional[np.ndarray] = None,
) -> PhaseReport:
    """Reconstruction phase and, given a reference sweep, the largest circular
    phase deviation per branch over ``band`` (default: whole grid)."""
    mask = np.ones(len(sweep), dtype=bool) if band is None else np.asarray(band, dtype=bool)
    ph_sum = wrap_deg(np.angle(sweep.sum, deg=True))
    ph_lf = np.angle(sweep.h_lf, deg=True)
    ph_hf = np.angle(sweep.h_hf, deg=True)
    inter = wrap_deg(ph_lf - ph_hf)
    rep = PhaseReport(ph_sum, float(np.abs(ph_sum[mask]).max(initial=0.0)), inter)
    if reference is None:
        return rep
    if len(reference) != len(sweep) or not np.array_equal(reference.f, sweep.f):
        raise ValueError("phase_metrics: sweeps are on different grids")

    def dev(a, b) -> float:
        return float(phase_distance(np.angle(a, deg=True), np.angle(b, deg=True))[mask].max(initial=0.0))

    rep.lf_dev_deg = dev(sweep.h_lf, reference.h_lf)
    rep.hf_dev_deg = dev(sweep.h_hf, reference.h_hf)
    rep.sum_dev_deg = dev(sweep.sum, reference.sum)
    ref_inter = wrap_deg(np.angle(reference.h_lf, deg=True) - np.angle(reference.h_hf, deg=True))
    rep.interbranch_dev_deg = float(phase_distance(inter, ref_inter)[mask].max(initial=0.0))
    return rep


def insertion_loss(sweep: SweepResult) -> np.ndarray:
    """-20*log10|H_LF + H_HF| per grid point (capped at 300 dB for nulls)."""
    return np.minimum(-db(sweep.sum), IL_CEIL) + 0.0  # +0.0 turns -0.0 into 0.0


def passband_insertion_loss(sweep: SweepResult, f0: Optional[float] = None) -> float:
    f0 = sweep.f0 if f0 is None else f0
    return float(insertion_loss(sweep)[passband(sweep.f, f0)].max())


def group_delay(sweep: SweepResult, branch: str = "sum") -> np.ndarray:
    """-d(phase)/d(omega) in seconds from the unwrapped phase."""
    if len(sweep) < 3:
        raise ValueError("group delay needs at least 3 grid points")
    phase = np.unwrap(np.angle(sweep.branch(branch)))
    return -np.gradient(phase, sweep.grid.omegas)


@dataclass(frozen=True)
class Resonance:
    branch: str
    index: int
    f_grid: float
    f_peak: float
    magnitude: float  # interpolated vertex, linear units


def find_resonance(sweep: SweepResult, branch: str = "lf") -> Optional[Resonance]:
    """Largest interior magnitude peak, refined by a parabola in (log f, dB).

    Returns None when the response has no interior maximum.
    """
    mag = db(sweep.branch(branch))
    i = int(np.argmax(mag))
    if i == 0 or i == len(mag) - 1:
        return None
    x = np.log(sweep.f[i - 1 : i + 2])
    y = mag[i - 1 : i + 2]
    a, b, c = np.polyfit(x - x[1], y, 2)
    if a < 0:
        xv = -b / (2 * a)
        yv = c - b * b / (4 * a)
    else:
        xv, yv = 0.0, y[1]
    xv = float(np.clip(xv, x[0] - x[1], x[2] - x[1]))
    return Resonance(branch, i, float(sweep.f[i]), float(math.exp(x[1] + xv)), float(10 ** (yv / 20)))


def transfer(circuit: Circuit, probe: str, freqs, ref_node: Optional[str] = None) -> np.ndarray:
    """V(probe) over V(ref_node), or over the source EMF when ref_node is None."""
    omegas = 2 * np.pi * np.atleast_1d(np.asarray(freqs, dtype=float))
    if ref_node is None:
        (v,), _ = node_voltages(circuit, (probe,), omegas)
        return (v / _source_emf(circuit)).astype(complex)
    (v, v_ref), _ = node_voltages(circuit, (probe, ref_node), omegas)
    _check_reference(circuit, ref_node, v_ref, omegas)
    return (v / v_ref).astype(complex)


def refine_peak(
    circuit: Circuit,
    probe: str,
    f_lo: float,
    f_hi: float,
    ref_node: Optional[str] = None,
) -> tuple[float, float]:
    """Continuous maximum of |transfer| on [f_lo, f_hi]: (frequency, magnitude)."""

    def neg(logf):
        return -abs(transfer(circuit, probe, math.exp(logf), ref_node)[0])

    res = minimize_scalar(
        neg, bounds=(math.log(f_lo), math.log(f_hi)), method="bounded",
        options={"xatol": 1e-12},
    )
    return math.exp(res.x), -float(res.fun)
