"""Delimited output: sweep/MC/comparison CSVs and key=value summaries.

Numbers in CSVs use ``%.12e``; summary values use ``%.12g``. Column order is
fixed so the files can serve as golden references.
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .analysis import SweepResult, db, insertion_loss, wrap_deg
from .montecarlo import COLUMNS, METRICS, McReport

SWEEP_COLUMNS = (
    "f_hz", "hlf_re", "hlf_im", "hhf_re", "hhf_im", "sum_re", "sum_im",
    "eps_db", "phase_lf_deg", "phase_hf_deg", "il_db",
)


def fmt(v: float) -> str:
    return f"{v:.12e}"


def fmt_value(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "nan" if math.isnan(v) else f"{float(v):.12g}"
    return str(v)


def sweep_rows(sweep: SweepResult) -> np.ndarray:
    s = sweep.sum
    return np.column_stack([
        sweep.f,
        sweep.h_lf.real, sweep.h_lf.imag,
        sweep.h_hf.real, sweep.h_hf.imag,
        s.real, s.imag,
        db(sweep.eps),
        wrap_deg(np.angle(sweep.h_lf, deg=True)),
        wrap_deg(np.angle(sweep.h_hf, deg=True)),
        insertion_loss(sweep),
    ])


def write_sweep_csv(path: Path, sweep: SweepResult, reference: str = "input terminal") -> None:
    with open(path, "w") as fh:
        fh.write(f"# topology={sweep.topology}; transfers relative to {reference}\n")
        fh.write(",".join(SWEEP_COLUMNS) + "\n")
        for row in sweep_rows(sweep):
            fh.write(",".join(fmt(v) for v in row) + "\n")


def read_sweep_csv(path: Path) -> dict[str, np.ndarray]:
    with open(path) as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    names = lines[0].strip().split(",")
    data = np.loadtxt(lines[1:], delimiter=",", ndmin=2)
    return {n: data[:, i] for i, n in enumerate(names)}


def write_summary(path: Path, items: Mapping[str, object]) -> None:
    with open(path, "w") as fh:
        for k, v in items.items():
            fh.write(f"{k}={fmt_value(v)}\n")


def read_summary(path: Path) -> dict[str, str]:
    out = {}
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line and not line.startswith("#"):
                k, _, v = line.partition("=")
                out[k] = v
    return out


def write_mc_csv(path: Path, report: McReport) -> None:
    """One row per sample, then ``# <stat>,...`` footer rows in column order."""
    with open(path, "w") as fh:
        fh.write(",".join(COLUMNS + ("warning",)) + "\n")
        for s in report.samples:
            vals = [fmt(s.values[m]) for m in METRICS]
            fh.write(",".join([str(s.index)] + vals + [s.warning.replace(",", ";")]) + "\n")
        for stat in ("max", "mean", "p95"):
            vals = [fmt(report.aggregates[m][stat]) for m in METRICS]
            fh.write(",".join([f"# {stat}"] + vals + [""]) + "\n")


def mc_summary(report: McReport) -> dict[str, object]:
    items: dict[str, object] = {
        "topology": report.topology,
        "tol": report.spec.tol_fraction,
        "n": report.spec.n_samples,
        "seed": report.spec.master_seed,
        "n_warnings": len(report.warnings),
    }
    for m in METRICS:
        for stat in ("max", "mean", "p95"):
            items[f"{m}.{stat}"] = report.aggregates[m][stat]
    return items


def write_table_csv(path: Path, rows: Iterable[str], columns: Iterable[str], table: Mapping) -> None:
    columns = list(columns)
    with open(path, "w") as fh:
        fh.write(",".join(["metric"] + columns) + "\n")
        for r in rows:
            fh.write(",".join([r] + [fmt(table[r][c]) for c in columns]) + "\n")


def format_table(rows: Iterable[str], columns: Iterable[str], table: Mapping) -> str:
    columns = list(columns)
    rows = list(rows)
    width = max(len(r) for r in rows) + 2
    lines = ["metric".ljust(width) + "".join(c.rjust(14) for c in columns)]
    for r in rows:
        lines.append(r.ljust(width) + "".join(f"{table[r][c]:14.6g}" for c in columns))
    return "\n".join(lines) + "\n"
