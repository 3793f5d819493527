"""The three-way crossover comparison (LC, FIR, transformer router).

Every entry is measured from a sweep or a Monte Carlo run:

insertion_loss_db
    worst -20*log10|H_LF + H_HF| over the passband (a decade away from f0)
latency_ms
    median group delay of the summed output over the passband
sum_phase_err_deg_max
    worst |arg(H_LF + H_HF) + omega*latency| over the full grid, i.e. the
    reconstruction's departure from a pure delay
mc_phase_dev_deg_max
    Monte Carlo aggregate max of the inter-branch phase deviation
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import analysis
from .analysis import FrequencyGrid, SweepResult
from .montecarlo import McReport, ToleranceSpec, mc_run
from .scenarios import sweep_design
from .topologies import FirDesign, Lc2Design, RtrDesign, design_fir

ROWS = ("insertion_loss_db", "sum_phase_err_deg_max", "latency_ms", "mc_phase_dev_deg_max")
COLUMNS = ("lc2", "fir", "rtr")


@dataclass
class Comparison:
    table: dict[str, dict[str, float]]
    sweeps: dict[str, SweepResult]
    mc: dict[str, McReport]


def latency_s(design, sweep: SweepResult) -> float:
    band = analysis.passband(sweep.f, sweep.f0)
    if isinstance(design, FirDesign):
        h_lp, h_hp = design_fir(design)
        tau = analysis.fir_group_delay(h_lp + h_hp, sweep.f[band], design.f_s)
    else:
        tau = analysis.group_delay(sweep)[band]
    return float(np.median(tau)) + 0.0  # no negative zero in the report


def sum_phase_error_deg(sweep: SweepResult, latency: float) -> float:
    ph = np.angle(sweep.sum) + sweep.grid.omegas * latency
    return float(np.abs(analysis.wrap_deg(np.degrees(ph))).max())


def default_designs(f0: float = 1000.0) -> dict[str, object]:
    return {
        "lc2": Lc2Design(f0=f0),
        "fir": FirDesign(f_cut=f0),
        "rtr": RtrDesign.from_crossover(f0=f0),
    }


def compare(
    grid: FrequencyGrid,
    spec: ToleranceSpec,
    designs: Optional[dict[str, object]] = None,
    workers: int = 1,
) -> Comparison:
    designs = designs or default_designs()
    table: dict[str, dict[str, float]] = {r: {} for r in ROWS}
    sweeps, reports = {}, {}
    for col in COLUMNS:
        d = designs[col]
        sw = sweep_design(d, grid)
        rep = mc_run(d, spec, grid, workers=workers)
        lat = latency_s(d, sw)
        table["insertion_loss_db"][col] = analysis.passband_insertion_loss(sw)
        table["latency_ms"][col] = lat * 1e3
        table["sum_phase_err_deg_max"][col] = sum_phase_error_deg(sw, lat)
        table["mc_phase_dev_deg_max"][col] = rep.agg("interbranch_dev_deg")
        sweeps[col], reports[col] = sw, rep
    return Comparison(table, sweeps, reports)
