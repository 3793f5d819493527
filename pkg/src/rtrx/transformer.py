"""Transformer parameter sets and the closed-form complementarity error."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .mna import mutual_inductance


@dataclass(frozen=True)
class TransformerParams:
    """Two-winding transformer: primary L1, secondary L2, coupling k.

    ``R_w`` is the primary winding resistance and ``C_par`` a parasitic
    capacitance placed across the primary winding terminals.
    """

    L1: float
    L2: float
    k: float = 1.0
    R_w: float = 0.0
    C_par: float = 0.0

    def __post_init__(self):
        if not (self.L1 > 0 and self.L2 > 0):
            raise ValueError("winding inductances must be positive")
        if not 0 < self.k <= 1:
            raise ValueError(f"coupling k must lie in (0, 1], got {self.k!r}")
        if self.R_w < 0 or self.C_par < 0:
            raise ValueError("R_w and C_par must be non-negative")

    @property
    def M(self) -> float:
        return mutual_inductance(self.k, self.L1, self.L2)

    @property
    def L_sigma(self) -> float:
        """Primary-referred leakage inductance (1 - k^2) * L1."""
        return (1 - self.k**2) * self.L1

    @property
    def turns_ratio(self) -> float:
        return math.sqrt(self.L2 / self.L1)

    def ideal(self) -> bool:
        return self.k == 1 and self.R_w == 0 and self.C_par == 0

    @classmethod
    def one_to_one(cls, L: float, k: float = 1.0, R_w: float = 0.0, C_par: float = 0.0):
        return cls(L, L, k, R_w, C_par)


def epsilon_closed_form(params: TransformerParams, C3: float, R_s: float, omega: float) -> complex:
    """Deviation from exact complementarity, H_LF + H_HF - 1, for the RTR loop.

    The loop current is driven by a unit EMF through R_s, the primary (R_w and
    L1, optionally shunted by C_par) and C3. The secondary is open, so it
    carries jwM times the current in the primary inductance. Transfers are
    taken relative to the input terminal behind R_s.
    """
    if not omega > 0:
        raise ValueError(f"omega must be positive, got {omega!r}")
    jw = 1j * omega
    z_c3 = 1 / (jw * C3)
    z_wind = params.R_w + jw * params.L1
    if params.C_par > 0:
        y_par = jw * params.C_par
        z_prim = z_wind / (1 + y_par * z_wind)
    else:
        z_prim = z_wind
    # With v_in = i_loop * (z_prim + z_c3) and i_loop * z_prim = i_wind * z_wind,
    # (v_lf + v_hf - v_in) / v_in collapses to the form below. R_s drops out,
    # and a 1:1 ideal winding (M == L1, R_w == 0) gives exactly zero.
    i_ratio = z_prim / z_wind  # i_wind / i_loop
    num = i_ratio * (jw * (params.M - params.L1) - params.R_w)
    if num == 0:
        return 0j  # holds even at the lossless resonance, where the loop is singular
    den = z_prim + z_c3
    if den == 0:
        raise ZeroDivisionError(f"RTR loop is singular at omega = {omega!r}")
    return complex(num / den)
