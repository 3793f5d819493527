"""Component-tolerance Monte Carlo.

Sample ``i`` draws from its own generator, ``PCG64(SeedSequence(master_seed,
spawn_key=(i,)))``, so a sample's values depend only on (master_seed, i) and
never on execution order or worker count. Each perturbable value is multiplied
by an independent factor drawn uniformly from [1 - tol, 1 + tol], in the fixed
field order listed per design type below.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace
from functools import singledispatch
from typing import Optional

import numpy as np

from . import analysis
from .analysis import FrequencyGrid
from .mna import SingularCircuitError
from .netlist import Circuit
from .scenarios import crossover_frequency, sweep_design
from .topologies import FirDesign, Lc2Design, Lc2Parts, RtrDesign


@dataclass(frozen=True)
class ToleranceSpec:
    tol_fraction: float = 0.05
    n_samples: int = 200
    master_seed: int = 42
    perturb_k: bool = False
    k_tol: Optional[float] = None  # defaults to tol_fraction

    def __post_init__(self):
        if not 0 <= self.tol_fraction < 1:
            raise ValueError(f"tol_fraction must lie in [0, 1), got {self.tol_fraction}")
        if self.n_samples < 1:
            raise ValueError("n_samples must be >= 1")
        if not 0 <= self.master_seed < 2**64:
            raise ValueError("master_seed must be a 64-bit unsigned integer")


def sample_rng(master_seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(master_seed, spawn_key=(index,))))


def _factors(rng: np.random.Generator, tol: float, n: int) -> np.ndarray:
    return rng.uniform(1 - tol, 1 + tol, size=n)


@singledispatch
def perturb(design, rng: np.random.Generator, spec: ToleranceSpec):
    raise TypeError(f"cannot perturb {type(design).__name__}")


@perturb.register
def _(design: RtrDesign, rng, spec):
    # Order: core, C3, R_w, R_s, C_par[, k]. Both windings share the core
    # factor, so the turns ratio (set by turn counts) is preserved.
    core, c3, rw, rs, cpar = _factors(rng, spec.tol_fraction, 5)
    t = design.transformer
    k = t.k
    if spec.perturb_k:
        k_tol = spec.tol_fraction if spec.k_tol is None else spec.k_tol
        k = min(1.0, k * _factors(rng, k_tol, 1)[0])
    t = replace(t, L1=t.L1 * core, L2=t.L2 * core, k=k, R_w=t.R_w * rw, C_par=t.C_par * cpar)
    return RtrDesign(design.C3 * c3, t, design.R_s * rs)


@perturb.register
def _(design: Lc2Parts, rng, spec):
    # Order: the dataclass field order of Lc2Parts.
    names = [f.name for f in fields(Lc2Parts)]
    fac = _factors(rng, spec.tol_fraction, len(names))
    return replace(design, **{n: getattr(design, n) * x for n, x in zip(names, fac)})


@perturb.register
def _(design: Lc2Design, rng, spec):
    return perturb(design.parts(), rng, spec)


@perturb.register
def _(circuit: Circuit, rng, spec):
    # Every R, L and C in file order gets its own factor; sources and
    # coupling coefficients are left alone.
    targets = [i for i, el in enumerate(circuit.elements) if el.kind in ("resistor", "inductor", "capacitor")]
    fac = _factors(rng, spec.tol_fraction, len(targets))
    els = list(circuit.elements)
    for i, x in zip(targets, fac):
        els[i] = replace(els[i], value=els[i].value * x)
    return replace(circuit, elements=tuple(els))


@perturb.register
def _(design: FirDesign, rng, spec):
    # Digital coefficients carry no component tolerance.
    return design


def sample_designs(nominal, spec: ToleranceSpec) -> list:
    return [perturb(nominal, sample_rng(spec.master_seed, i), spec) for i in range(spec.n_samples)]


COLUMNS = (
    "sample",
    "branch_dev_flat_deg",
    "branch_dev_xover_deg",
    "interbranch_dev_deg",
    "interbranch_dev_xover_deg",
    "sum_dev_flat_deg",
    "max_eps_db_full",
    "max_eps_db_flat",
    "il_min_db",
    "il_max_db",
)
METRICS = COLUMNS[1:]


@dataclass
class McSample:
    index: int
    values: dict[str, float]
    warning: str = ""


@dataclass
class McReport:
    topology: str
    spec: ToleranceSpec
    samples: list[McSample]
    aggregates: dict[str, dict[str, float]] = field(default_factory=dict)

    def column(self, name: str) -> np.ndarray:
        return np.array([s.values[name] for s in self.samples])

    def agg(self, name: str, stat: str = "max") -> float:
        return self.aggregates[name][stat]

    @property
    def warnings(self) -> list[str]:
        return [f"sample {s.index}: {s.warning}" for s in self.samples if s.warning]


def sample_metrics(sweep, nominal_sweep, f0: float) -> dict[str, float]:
    f = sweep.f
    flat = analysis.flat_band(f, f0)
    xover = analysis.crossover_band(f, f0)
    pflat = analysis.phase_metrics(sweep, nominal_sweep, flat)
    pxover = analysis.phase_metrics(sweep, nominal_sweep, xover)
    pfull = analysis.phase_metrics(sweep, nominal_sweep)
    comp = analysis.complementarity_report(sweep, f0)
    il = analysis.insertion_loss(sweep)[analysis.passband(f, f0)]
    return {
        "branch_dev_flat_deg": pflat.branch_dev_deg,
        "branch_dev_xover_deg": pxover.branch_dev_deg,
        "interbranch_dev_deg": pfull.interbranch_dev_deg,
        "interbranch_dev_xover_deg": pxover.interbranch_dev_deg,
        "sum_dev_flat_deg": pflat.sum_dev_deg,
        "max_eps_db_full": comp.max_eps_db_full,
        "max_eps_db_flat": comp.max_eps_db_flat,
        "il_min_db": float(il.min()),
        "il_max_db": float(il.max()),
    }


def _run_one(args) -> McSample:
    index, design, nominal, nominal_sweep, grid, f0 = args
    if design == nominal:
        return McSample(index, sample_metrics(nominal_sweep, nominal_sweep, f0))
    try:
        sweep = sweep_design(design, grid, f0)
    except SingularCircuitError as exc:
        return McSample(index, {m: math.nan for m in METRICS}, str(exc))
    return McSample(index, sample_metrics(sweep, nominal_sweep, f0))


def aggregate(samples: list[McSample]) -> dict[str, dict[str, float]]:
    out = {}
    for m in METRICS:
        col = np.array([s.values[m] for s in samples], dtype=float)
        col = col[~np.isnan(col)]
        if col.size == 0:
            out[m] = {"max": math.nan, "mean": math.nan, "p95": math.nan}
            continue
        out[m] = {
            "max": float(col.max()),
            "mean": float(col.mean()),
            "p95": float(np.percentile(col, 95)),
        }
    return out


def mc_run(
    nominal,
    spec: ToleranceSpec,
    grid: FrequencyGrid,
    workers: int = 1,
    f0: Optional[float] = None,
) -> McReport:
    """Sweep every sample and compare it against the nominal sweep.

    Bands are anchored on the nominal crossover frequency so every sample is
    measured over the same frequencies.
    """
    f0 = crossover_frequency(nominal) if f0 is None else f0
    nominal_sweep = sweep_design(nominal, grid, f0)
    designs = sample_designs(nominal, spec)
    jobs = [(i, d, nominal, nominal_sweep, grid, f0) for i, d in enumerate(designs)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            samples = list(pool.map(_run_one, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        samples = [_run_one(j) for j in jobs]
    return McReport(nominal_sweep.topology, spec, samples, aggregate(samples))
