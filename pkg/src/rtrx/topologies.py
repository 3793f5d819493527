"""Reference crossover systems: the transformer router (RTR), a second-order
LC crossover, and a windowed-sinc FIR pair, with closed-form transfer
functions for the two analog networks."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .netlist import Circuit, Element, make_circuit
from .transformer import TransformerParams

REF_NODE = "in"  # input terminal behind any source resistance


class DesignError(ValueError):
    pass


@dataclass(frozen=True)
class RtrDesign:
    """Series C3 + transformer primary; LF across C3, HF on the open secondary."""

    C3: float
    transformer: TransformerParams
    R_s: float = 0.1

    def __post_init__(self):
        if not self.C3 > 0:
            raise DesignError(f"C3 must be positive, got {self.C3!r}")
        if self.R_s < 0:
            raise DesignError("R_s must be non-negative")

    @property
    def f0(self) -> float:
        return 1.0 / (2 * math.pi * math.sqrt(self.transformer.L1 * self.C3))

    @property
    def omega0(self) -> float:
        return 2 * math.pi * self.f0

    @classmethod
    def from_crossover(
        cls,
        f0: float = 1000.0,
        C3: float = 10e-6,
        k: float = 1.0,
        R_w: float = 0.0,
        R_s: float = 0.1,
        C_par: float = 0.0,
        turns_ratio: float = 1.0,
    ) -> "RtrDesign":
        """Pick L1 so the primary resonates with C3 at ``f0``."""
        if not (f0 > 0 and C3 > 0):
            raise DesignError("f0 and C3 must be positive")
        L1 = 1.0 / ((2 * math.pi * f0) ** 2 * C3)
        return cls(C3, TransformerParams(L1, L1 * turns_ratio**2, k, R_w, C_par), R_s)

    @classmethod
    def nonideal(cls, **overrides) -> "RtrDesign":
        params = dict(k=0.999, R_w=0.1, R_s=0.1)
        params.update(overrides)
        return cls.from_crossover(**params)


@dataclass(frozen=True)
class Lc2Parts:
    """Concrete element values of the LC crossover (what tolerances act on)."""

    L_lp: float
    C_lp: float
    R_lp: float
    C_hp: float
    L_hp: float
    R_hp: float
    esr_L: float = 0.0
    esr_C: float = 0.0

    def __post_init__(self):
        vals = (self.L_lp, self.C_lp, self.R_lp, self.C_hp, self.L_hp, self.R_hp)
        if not all(v > 0 for v in vals):
            raise DesignError("LC crossover components must be positive")
        if self.esr_L < 0 or self.esr_C < 0:
            raise DesignError("ESR must be non-negative")


@dataclass(frozen=True)
class Lc2Design:
    f0: float = 1000.0
    R_load: float = 8.0
    Q: float = 1 / math.sqrt(2)
    esr_L: float = 0.3
    esr_C: float = 0.05

    def __post_init__(self):
        if not (self.f0 > 0 and self.R_load > 0 and self.Q > 0):
            raise DesignError("f0, R_load and Q must be positive")
        if self.esr_L < 0 or self.esr_C < 0:
            raise DesignError("ESR must be non-negative")

    def parts(self) -> Lc2Parts:
        w0 = 2 * math.pi * self.f0
        L = self.R_load / (self.Q * w0)
        C = self.Q / (self.R_load * w0)
        return Lc2Parts(L, C, self.R_load, C, L, self.R_load, self.esr_L, self.esr_C)


@dataclass(frozen=True)
class FirDesign:
    n_taps: int = 1023
    f_cut: float = 1000.0
    f_s: float = 48000.0

    def __post_init__(self):
        if self.n_taps < 3 or self.n_taps % 2 == 0:
            raise DesignError(f"n_taps must be odd and >= 3, got {self.n_taps}")
        if not 0 < self.f_cut < self.f_s / 2:
            raise DesignError(f"f_cut must lie in (0, f_s/2), got {self.f_cut}")

    @property
    def delay_samples(self) -> int:
        return (self.n_taps - 1) // 2

    @property
    def latency_s(self) -> float:
        return self.delay_samples / self.f_s


def build_rtr(design: RtrDesign) -> Circuit:
    t = design.transformer
    els = []
    if design.R_s > 0:
        els += [
            Element("ac_source", "V1", ("src", "0"), 1.0),
            Element("resistor", "Rs", ("src", REF_NODE), design.R_s),
        ]
    else:
        els.append(Element("ac_source", "V1", (REF_NODE, "0"), 1.0))
    if t.R_w > 0:
        els += [
            Element("resistor", "Rw", (REF_NODE, "p"), t.R_w),
            Element("inductor", "L1", ("p", "lf"), t.L1),
        ]
    else:
        els.append(Element("inductor", "L1", (REF_NODE, "lf"), t.L1))
    if t.C_par > 0:
        els.append(Element("capacitor", "Cpar", (REF_NODE, "lf"), t.C_par))
    els += [
        Element("capacitor", "C3", ("lf", "0"), design.C3),
        Element("inductor", "L2", ("hf", "0"), t.L2),
        Element("coupling", "K1", ("L1", "L2"), t.k),
    ]
    notes = (
        f"RTR crossover, f0 = {design.f0:.6g} Hz",
        "dots on the first node of L1 and L2: V(hf) = +jwM I(L1)",
    )
    return make_circuit(els, ("lf", "hf"), notes)


def rtr_closed_form(design: RtrDesign, omega: float) -> tuple[complex, complex]:
    if not omega > 0:
        raise ValueError(f"omega must be positive, got {omega!r}")
    t = design.transformer
    jw = 1j * omega
    z_c3 = 1 / (jw * design.C3)
    z_wind = t.R_w + jw * t.L1
    z_prim = z_wind / (1 + jw * t.C_par * z_wind) if t.C_par > 0 else z_wind
    den = z_prim + z_c3
    if den == 0:
        raise ZeroDivisionError(f"lossless RTR is singular at omega = {omega!r}")
    h_lf = z_c3 / den
    h_hf = jw * t.M * (z_prim / z_wind) / den
    return complex(h_lf), complex(h_hf)


def _as_parts(design: Lc2Design | Lc2Parts) -> Lc2Parts:
    return design.parts() if isinstance(design, Lc2Design) else design


def build_lc2(design: Lc2Design | Lc2Parts) -> Circuit:
    p = _as_parts(design)
    els = [Element("ac_source", "V1", (REF_NODE, "0"), 1.0)]
    lp_in = REF_NODE
    if p.esr_L > 0:
        els.append(Element("resistor", "RLesr", (REF_NODE, "lpx"), p.esr_L))
        lp_in = "lpx"
    els += [
        Element("inductor", "Llp", (lp_in, "lp"), p.L_lp),
        Element("capacitor", "Clp", ("lp", "0"), p.C_lp),
        Element("resistor", "Rlp", ("lp", "0"), p.R_lp),
    ]
    hp_in = REF_NODE
    if p.esr_C > 0:
        els.append(Element("resistor", "RCesr", (REF_NODE, "hpx"), p.esr_C))
        hp_in = "hpx"
    els += [
        Element("capacitor", "Chp", (hp_in, "hp"), p.C_hp),
        Element("inductor", "Lhp", ("hp", "0"), p.L_hp),
        Element("resistor", "Rhp", ("hp", "0"), p.R_hp),
    ]
    return make_circuit(els, ("lp", "hp"), ("second-order LC crossover",))


def lc2_closed_form(design: Lc2Design | Lc2Parts, omega: float) -> tuple[complex, complex]:
    if not omega > 0:
        raise ValueError(f"omega must be positive, got {omega!r}")
    p = _as_parts(design)
    s = 1j * omega
    z_lp = p.R_lp / (1 + s * p.R_lp * p.C_lp)
    h_lp = z_lp / (p.esr_L + s * p.L_lp + z_lp)
    z_hp = s * p.L_hp * p.R_hp / (p.R_hp + s * p.L_hp)
    h_hp = z_hp / (p.esr_C + 1 / (s * p.C_hp) + z_hp)
    return complex(h_lp), complex(h_hp)


def design_fir(design: FirDesign) -> tuple[np.ndarray, np.ndarray]:
    """Hamming-windowed sinc low-pass and its spectral inverse."""
    n = design.n_taps
    mid = design.delay_samples
    fc = design.f_cut / design.f_s
    t = np.arange(n) - mid
    h_lp = 2 * fc * np.sinc(2 * fc * t) * np.hamming(n)
    h_lp /= h_lp.sum()
    h_hp = -h_lp
    h_hp[mid] += 1.0
    return h_lp, h_hp


def with_overrides(design, **kw):
    """dataclasses.replace that ignores None values."""
    kw = {k: v for k, v in kw.items() if v is not None}
    return replace(design, **kw) if kw else design
