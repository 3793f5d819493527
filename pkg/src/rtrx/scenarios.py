"""Named reference systems and a single entry point to sweep any design."""

from __future__ import annotations

import math
from functools import singledispatch
from typing import Optional

from .analysis import FrequencyGrid, SweepResult, ac_sweep, fir_sweep
from .netlist import Circuit
from .topologies import (
    FirDesign,
    Lc2Design,
    Lc2Parts,
    RtrDesign,
    build_lc2,
    build_rtr,
    design_fir,
)

SCENARIOS = ("rtr", "rtr-nonideal", "lc2", "fir")


def default_design(name: str, **overrides):
    """Reference design for a scenario name; ``None`` overrides are ignored."""
    kw = {k: v for k, v in overrides.items() if v is not None}
    if name == "rtr":
        return RtrDesign.from_crossover(**_pick(kw, "f0", "C3", "k", "R_w", "R_s"))
    if name == "rtr-nonideal":
        return RtrDesign.nonideal(**_pick(kw, "f0", "C3", "k", "R_w", "R_s"))
    if name == "lc2":
        return Lc2Design(**_pick(kw, "f0", "R_load", "esr_L", "esr_C"))
    if name == "fir":
        picked = _pick(kw, "n_taps", "f_s")
        if "f0" in kw:
            picked["f_cut"] = kw["f0"]
        return FirDesign(**picked)
    raise ValueError(f"unknown scenario {name!r}; expected one of {', '.join(SCENARIOS)}")


def _pick(kw: dict, *names: str) -> dict:
    return {n: kw[n] for n in names if n in kw}


@singledispatch
def crossover_frequency(design) -> Optional[float]:
    raise TypeError(f"no crossover frequency for {type(design).__name__}")


@crossover_frequency.register
def _(design: RtrDesign):
    return design.f0


@crossover_frequency.register
def _(design: Lc2Design):
    return design.f0


@crossover_frequency.register
def _(design: Lc2Parts):
    return 1 / (2 * math.pi * math.sqrt(design.L_lp * design.C_lp))


@crossover_frequency.register
def _(design: FirDesign):
    return design.f_cut


@crossover_frequency.register
def _(circuit: Circuit):
    return None


@singledispatch
def sweep_design(design, grid: FrequencyGrid, f0: Optional[float] = None) -> SweepResult:
    raise TypeError(f"cannot sweep {type(design).__name__}")


@sweep_design.register
def _(design: RtrDesign, grid, f0=None):
    return ac_sweep(build_rtr(design), "lf", "hf", grid, topology="rtr", f0=f0 or design.f0)


@sweep_design.register(Lc2Design)
@sweep_design.register(Lc2Parts)
def _(design, grid, f0=None):
    return ac_sweep(
        build_lc2(design), "lp", "hp", grid, topology="lc2",
        f0=f0 or crossover_frequency(design),
    )


@sweep_design.register
def _(circuit: Circuit, grid, f0=None):
    if len(circuit.probes) < 2:
        raise ValueError("netlist needs two .probe lines: LF output first, HF output second")
    return ac_sweep(circuit, circuit.probes[0], circuit.probes[1], grid, topology="netlist", f0=f0)


@sweep_design.register
def _(design: FirDesign, grid, f0=None):
    h_lp, h_hp = design_fir(design)
    return fir_sweep(h_lp, h_hp, design.f_s, grid, f0=f0 or design.f_cut)
