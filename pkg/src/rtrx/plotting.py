"""Optional figures rendered from the same data the CSV writers use.

Nothing in the numeric core imports this module; the CLI loads it only when
``--plot`` is given. The Agg backend is forced so it works headless.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .analysis import SweepResult, crossover_band, db, wrap_deg
from .montecarlo import McReport

STYLE = {
    "figure.figsize": (7.0, 5.0),
    "figure.dpi": 110,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "font.size": 9,
    "legend.fontsize": 8,
    "savefig.bbox": "tight",
}


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams.update(STYLE)
    return plt


def _save(plt, fig, path: Path) -> Path:
    fig.savefig(path)
    plt.close(fig)
    return path


def plot_sweep(sweep: SweepResult, path: Path) -> Path:
    """Magnitude, phase and reconstruction error over the grid."""
    plt = _pyplot()
    fig, (ax_m, ax_p, ax_e) = plt.subplots(3, 1, sharex=True, figsize=(7.0, 7.5))
    f = sweep.f
    for name, h in (("LF", sweep.h_lf), ("HF", sweep.h_hf), ("sum", sweep.sum)):
        ax_m.semilogx(f, db(h), label=name)
        ax_p.semilogx(f, wrap_deg(np.angle(h, deg=True)), label=name)
    ax_m.set_ylabel("magnitude (dB)")
    ax_m.set_ylim(max(ax_m.get_ylim()[0], -80), None)
    ax_m.legend(loc="lower left")
    ax_p.set_ylabel("phase (deg)")
    ax_p.set_yticks(range(-180, 181, 90))
    ax_e.semilogx(f, db(sweep.eps), color="k")
    ax_e.set_ylabel("|eps| (dB)")
    ax_e.set_xlabel("frequency (Hz)")
    if sweep.f0:
        for ax in (ax_m, ax_p, ax_e):
            ax.axvline(sweep.f0, color="0.5", lw=0.8, ls=":")
    ax_m.set_title(sweep.topology)
    return _save(plt, fig, path)


def plot_mc(report: McReport, nominal: SweepResult, samples: list[SweepResult], path: Path) -> Path:
    """Per-branch phase of every sample over the nominal, plus the metric histogram."""
    plt = _pyplot()
    fig, (ax_p, ax_h) = plt.subplots(2, 1, figsize=(7.0, 6.5))
    f = nominal.f
    for s in samples:
        ax_p.semilogx(f, np.angle(s.h_lf, deg=True), color="C0", alpha=0.15, lw=0.6)
        ax_p.semilogx(f, np.angle(s.h_hf, deg=True), color="C1", alpha=0.15, lw=0.6)
    ax_p.semilogx(f, np.angle(nominal.h_lf, deg=True), color="C0", lw=1.5, label="LF nominal")
    ax_p.semilogx(f, np.angle(nominal.h_hf, deg=True), color="C1", lw=1.5, label="HF nominal")
    if nominal.f0:
        band = crossover_band(f, nominal.f0)
        ax_p.axvspan(f[band][0], f[band][-1], color="0.9", zorder=0)
    ax_p.set_xlabel("frequency (Hz)")
    ax_p.set_ylabel("phase (deg)")
    ax_p.legend(loc="best")
    ax_p.set_title(f"{report.topology}: {len(report.samples)} samples, tol {report.spec.tol_fraction:g}")
    col = report.column("branch_dev_flat_deg")
    ax_h.hist(col[np.isfinite(col)], bins=30, color="C2")
    ax_h.set_xlabel("max branch phase deviation, flat band (deg)")
    ax_h.set_ylabel("samples")
    return _save(plt, fig, path)


def plot_compare(sweeps: dict[str, SweepResult], path: Path) -> Path:
    plt = _pyplot()
    fig, (ax_m, ax_p) = plt.subplots(2, 1, sharex=True)
    for name, sw in sweeps.items():
        ax_m.semilogx(sw.f, db(sw.sum), label=name)
        ax_p.semilogx(sw.f, np.degrees(np.unwrap(np.angle(sw.sum))), label=name)
    ax_m.set_ylabel("|LF + HF| (dB)")
    ax_m.legend(loc="best")
    ax_p.set_ylabel("sum phase, unwrapped (deg)")
    ax_p.set_xlabel("frequency (Hz)")
    return _save(plt, fig, path)


def plot_recon(x, lf, hf, recon, path: Path, n_show: int = 960) -> Path:
    plt = _pyplot()
    fig, (ax_s, ax_e) = plt.subplots(2, 1, sharex=True)
    n = min(n_show, len(x))
    t = np.arange(n) / x.f_s * 1e3
    ax_s.plot(t, x.samples[:n], label="input", lw=1.5)
    ax_s.plot(t, lf.samples[:n], label="LF", lw=0.8)
    ax_s.plot(t, hf.samples[:n], label="HF", lw=0.8)
    ax_s.plot(t, recon.samples[:n], label="LF + HF", ls="--", lw=0.8)
    ax_s.legend(loc="upper right")
    ax_e.plot(t, x.samples[:n] - recon.samples[:n], color="k", lw=0.8)
    ax_e.set_ylabel("input - sum")
    ax_e.set_xlabel("time (ms)")
    return _save(plt, fig, path)
