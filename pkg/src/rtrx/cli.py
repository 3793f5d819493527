"""Command-line front end.

    rtrx sweep   --scenario rtr-nonideal --out out/
    rtrx mc      --scenario lc2 --tol 0.05 --n 200 --seed 42
    rtrx compare
    rtrx recon   --scenario rtr --tones 100,3000

``--scenario`` is one of rtr, rtr-nonideal, lc2, fir or ``netlist:<path>``.
A netlist scenario needs two ``.probe`` lines (LF output first, HF second).

Output files (all under ``--out``):

sweep    sweep.csv, summary.txt, netlist.cir (analog scenarios)
mc       mc.csv, mc_summary.txt
compare  compare.csv, compare.txt
recon    recon_input.csv, recon_lf.csv, recon_hf.csv, recon_sum.csv,
         recon_summary.txt

mc.csv has one row per sample with columns ``sample`` followed by the
metrics in ``montecarlo.METRICS`` and a free-text ``warning`` column. Three
footer rows ``# max``, ``# mean`` and ``# p95`` hold the aggregates.

``--config FILE`` reads flat ``key = value`` lines whose keys are the long
flag names (dashes or underscores); flags on the command line win.
``--plot`` additionally renders PNG figures next to the CSVs.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import analysis, report
from .analysis import FrequencyGrid
from .comparison import COLUMNS as CMP_COLUMNS
from .comparison import ROWS as CMP_ROWS
from .comparison import compare, default_designs
from .mna import SingularCircuitError
from .montecarlo import ToleranceSpec, mc_run, sample_designs
from .netlist import Circuit, NetlistError, emit_netlist, parse_netlist
from .scenarios import SCENARIOS, crossover_frequency, default_design, sweep_design
from .timedomain import (
    Tone,
    branch_response_time,
    delayed_error,
    fir_filter,
    measure_filter_delay,
    reconstruct_error,
    synth_multitone,
    write_signal,
)
from .topologies import FirDesign, Lc2Design, RtrDesign, build_lc2, build_rtr, design_fir

OVERRIDES = ("f0", "C3", "k", "R_w", "R_s", "R_load", "esr_L", "esr_C", "n_taps", "f_s")
APPLICABLE = {
    "rtr": {"f0", "C3", "k", "R_w", "R_s"},
    "rtr-nonideal": {"f0", "C3", "k", "R_w", "R_s"},
    "lc2": {"f0", "R_load", "esr_L", "esr_C"},
    "fir": {"f0", "n_taps", "f_s"},
    "netlist": {"f0"},
}
DEFAULT_TONES = "100,3000"
RECON_FS = 48000.0
MC_PLOT_SAMPLES = 50


class CliError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        # one line, no usage dump
        self.exit(2, f"{self.prog}: error: {message}\n")


def _flag_names(name: str) -> list[str]:
    names = [f"--{name}"]
    if "_" in name:
        names.append(f"--{name.replace('_', '-')}")
    return names


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="flat 'key = value' file; flags override it")
    p.add_argument("--scenario", default="rtr", help="rtr | rtr-nonideal | lc2 | fir | netlist:<path>")
    p.add_argument(*_flag_names("f_min"), dest="f_min", type=float, default=20.0)
    p.add_argument(*_flag_names("f_max"), dest="f_max", type=float, default=20000.0)
    p.add_argument(*_flag_names("n_points"), dest="n_points", type=int, default=500)
    for name in OVERRIDES:
        typ = int if name == "n_taps" else float
        p.add_argument(*_flag_names(name), dest=name, type=typ, default=None)
    p.add_argument("--out", type=Path, default=Path("out"))
    p.add_argument("--plot", action="store_true", help="also write PNG figures")


def _add_mc(p: argparse.ArgumentParser) -> None:
    p.add_argument("--tol", type=float, default=0.05)
    p.add_argument("--n", type=int, default=200)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument(*_flag_names("perturb_k"), dest="perturb_k", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rtrx", description="Crossover sweeps, tolerance analysis and comparison.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, help_ in (
        ("sweep", "AC sweep; writes sweep.csv and summary.txt"),
        ("mc", "Monte Carlo tolerance run; writes mc.csv and mc_summary.txt"),
        ("compare", "LC vs FIR vs transformer router table"),
        ("recon", "multi-tone time-domain reconstruction"),
    ):
        p = sub.add_parser(name, help=help_)
        _add_common(p)
        if name in ("mc", "compare"):
            _add_mc(p)
        if name == "recon":
            p.add_argument("--tones", default=DEFAULT_TONES, help="freq[:amp[:phase_rad]],...")
            p.add_argument("--duration", type=float, default=0.1)
    return parser


# -- config file ----------------------------------------------------------------

def read_config(path: Path) -> dict[str, str]:
    out: dict[str, str] = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep or not key.strip():
                raise CliError(f"{path}:{lineno}: expected 'key = value'")
            out[key.strip().lstrip("-").replace("-", "_")] = value.strip()
    return out


def _truthy(v: str) -> bool:
    s = v.lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise CliError(f"expected a boolean, got {v!r}")


def parse_args(argv: Optional[Sequence[str]] = None) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config is None:
        return args
    cfg = read_config(args.config)
    sub = parser._subparsers._group_actions[0].choices[args.command]
    actions = {a.dest: a for a in sub._actions if a.dest not in ("help", "config")}
    given = _explicit_dests(sub, argv if argv is not None else sys.argv[1:])
    for key, value in cfg.items():
        if key not in actions:
            raise CliError(f"{args.config}: unknown key {key!r} for '{args.command}'")
        if key in given:
            continue
        act = actions[key]
        if isinstance(act, argparse._StoreTrueAction):
            setattr(args, key, _truthy(value))
        else:
            try:
                setattr(args, key, (act.type or str)(value))
            except ValueError:
                raise CliError(f"{args.config}: bad value for {key}: {value!r}") from None
    return args


def _explicit_dests(sub: argparse.ArgumentParser, argv: Sequence[str]) -> set[str]:
    lookup = {opt: a.dest for a in sub._actions for opt in a.option_strings}
    dests = set()
    for tok in argv:
        opt = tok.split("=", 1)[0]
        if opt in lookup:
            dests.add(lookup[opt])
    return dests


# -- scenario plumbing ----------------------------------------------------------

def _overrides(args) -> dict[str, float]:
    return {k: getattr(args, k) for k in OVERRIDES if getattr(args, k, None) is not None}


def resolve_scenario(args, extra_ok: frozenset = frozenset()):
    """Return (kind, design) where design is a topology design or a Circuit."""
    scen = args.scenario
    over = _overrides(args)
    if scen.startswith("netlist:"):
        kind = "netlist"
        path = Path(scen[len("netlist:"):])
        try:
            design: object = parse_netlist(path.read_bytes())
        except NetlistError as exc:
            raise CliError(f"{path}: {exc}") from None
    elif scen in SCENARIOS:
        kind = scen
        design = None
    else:
        raise CliError(f"unknown scenario {scen!r}; expected one of {', '.join(SCENARIOS)} or netlist:<path>")
    bad = sorted(set(over) - APPLICABLE[kind] - extra_ok)
    if bad:
        raise CliError(f"override(s) {', '.join(bad)} do not apply to scenario {scen!r}")
    if design is None:
        design = default_design(kind, **{k: v for k, v in over.items() if k in APPLICABLE[kind]})
    return kind, design


def _f0(design, args) -> Optional[float]:
    if isinstance(design, Circuit):
        return args.f0
    return crossover_frequency(design)


def _circuit_of(design) -> Optional[Circuit]:
    if isinstance(design, Circuit):
        return design
    if isinstance(design, RtrDesign):
        return build_rtr(design)
    if isinstance(design, Lc2Design):
        return build_lc2(design)
    return None


def _grid(args) -> FrequencyGrid:
    return FrequencyGrid(args.f_min, args.f_max, args.n_points)


def _spec(args) -> ToleranceSpec:
    return ToleranceSpec(args.tol, args.n, args.seed, perturb_k=args.perturb_k)


def _reference_note(design) -> str:
    if isinstance(design, FirDesign):
        return "filter input"
    circuit = _circuit_of(design)
    return f"V({analysis.default_ref_node(circuit)})"


def _warn(lines) -> None:
    for w in lines:
        print(f"rtrx: warning: {w}", file=sys.stderr)


# -- commands -----------------------------------------------------------------

def cmd_sweep(args) -> list[Path]:
    kind, design = resolve_scenario(args)
    sweep = sweep_design(design, _grid(args), _f0(design, args))
    _warn(sweep.warnings)
    out = args.out
    written = [out / "sweep.csv", out / "summary.txt"]
    report.write_sweep_csv(written[0], sweep, _reference_note(design))
    comp = analysis.complementarity_report(sweep)
    res = analysis.find_resonance(sweep, "lf")
    il = analysis.insertion_loss(sweep)
    items = {
        "scenario": args.scenario,
        "topology": sweep.topology,
        "f0_hz": sweep.f0 if sweep.f0 is not None else "none",
        "n_points": len(sweep),
        "max_eps_db_full": comp.max_eps_db_full,
        "max_eps_db_flat": comp.max_eps_db_flat,
        "resonance_hz": res.f_peak if res else "none",
        "resonance_mag": res.magnitude if res else "none",
        "max_il_db": float(il.max()),
        "passband_il_db": analysis.passband_insertion_loss(sweep),
        "max_abs_sum_phase_deg": analysis.phase_metrics(sweep).max_abs_sum_phase_deg,
        "n_warnings": len(sweep.warnings),
    }
    report.write_summary(written[1], items)
    circuit = _circuit_of(design)
    if circuit is not None:
        written.append(out / "netlist.cir")
        written[-1].write_text(emit_netlist(circuit))
    if args.plot:
        from . import plotting

        written.append(plotting.plot_sweep(sweep, out / "sweep.png"))
    return written


def cmd_mc(args) -> list[Path]:
    kind, design = resolve_scenario(args)
    spec = _spec(args)
    grid = _grid(args)
    rep = mc_run(design, spec, grid, workers=args.workers, f0=_f0(design, args))
    _warn(rep.warnings)
    out = args.out
    written = [out / "mc.csv", out / "mc_summary.txt"]
    report.write_mc_csv(written[0], rep)
    items = {"scenario": args.scenario, **report.mc_summary(rep)}
    report.write_summary(written[1], items)
    if args.plot:
        from . import plotting

        f0 = _f0(design, args)
        nominal = sweep_design(design, grid, f0)
        shown = []
        for d in sample_designs(design, ToleranceSpec(spec.tol_fraction, min(spec.n_samples, MC_PLOT_SAMPLES),
                                                      spec.master_seed, spec.perturb_k, spec.k_tol)):
            try:
                shown.append(sweep_design(d, grid, f0))
            except SingularCircuitError:
                pass
        written.append(plotting.plot_mc(rep, nominal, shown, out / "mc.png"))
    return written


def cmd_compare(args) -> list[Path]:
    over = _overrides(args)
    if set(over) - {"f0"}:
        raise CliError("compare accepts only --f0 among the design overrides")
    designs = default_designs(over.get("f0", 1000.0))
    result = compare(_grid(args), _spec(args), designs, workers=args.workers)
    for col, rep in result.mc.items():
        _warn(f"{col}: {w}" for w in rep.warnings)
    out = args.out
    written = [out / "compare.csv", out / "compare.txt"]
    report.write_table_csv(written[0], CMP_ROWS, CMP_COLUMNS, result.table)
    items = {f"{c}.{r}": result.table[r][c] for c in CMP_COLUMNS for r in CMP_ROWS}
    report.write_summary(written[1], items)
    print(report.format_table(CMP_ROWS, CMP_COLUMNS, result.table), end="")
    if args.plot:
        from . import plotting

        written.append(plotting.plot_compare(result.sweeps, out / "compare.png"))
    return written


def parse_tones(text: str) -> list[Tone]:
    tones = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        fields = part.split(":")
        if len(fields) > 3:
            raise CliError(f"bad tone {part!r}: expected freq[:amp[:phase]]")
        try:
            vals = [float(x) for x in fields]
        except ValueError:
            raise CliError(f"bad tone {part!r}: not a number") from None
        if not all(math.isfinite(v) for v in vals):
            raise CliError(f"bad tone {part!r}: not finite")
        tones.append(Tone(*vals))
    if not tones:
        raise CliError("no tones given")
    return tones


def cmd_recon(args) -> list[Path]:
    kind, design = resolve_scenario(args, extra_ok=frozenset({"f_s"}))
    tones = parse_tones(args.tones)
    items: dict[str, object] = {"scenario": args.scenario}
    if isinstance(design, FirDesign):
        f_s = design.f_s
        x = synth_multitone(tones, f_s, args.duration)
        h_lp, h_hp = design_fir(design)
        lf, hf = fir_filter(h_lp, x), fir_filter(h_hp, x)
        recon = lf + hf
        delay = design.delay_samples
        start = design.n_taps
        if start >= len(x):
            raise CliError(f"record of {len(x)} samples is shorter than the {design.n_taps}-tap filter")
        items.update(
            delay_samples=delay,
            measured_delay_samples=measure_filter_delay(h_lp + h_hp),
            interior_start=start,
            rel_rms_error=delayed_error(x, recon, delay, start),
        )
    else:
        f_s = args.f_s or RECON_FS
        circuit = _circuit_of(design)
        freqs = np.array([t.freq for t in tones])
        ref = analysis.default_ref_node(circuit)
        lf_probe, hf_probe = circuit.probes[0], circuit.probes[1]
        g_lf = analysis.transfer(circuit, lf_probe, freqs, ref)
        g_hf = analysis.transfer(circuit, hf_probe, freqs, ref)
        x = synth_multitone(tones, f_s, args.duration)
        lf = branch_response_time(tones, list(g_lf), f_s, args.duration)
        hf = branch_response_time(tones, list(g_hf), f_s, args.duration)
        recon = lf + hf
        eps = np.abs(g_lf + g_hf - 1)
        items.update(
            rel_rms_error=reconstruct_error(x, lf, hf),
            max_tone_eps=float(eps.max()),
            max_tone_eps_db=float(analysis.db(eps.max())),
        )
    items.update(f_s=f_s, duration_s=args.duration, n_samples=len(x),
                 tones=" ".join(f"{t.freq:g}" for t in tones))
    out = args.out
    written = [out / f"recon_{n}.csv" for n in ("input", "lf", "hf", "sum")]
    for path, sig in zip(written, (x, lf, hf, recon)):
        write_signal(path, sig)
    written.append(out / "recon_summary.txt")
    report.write_summary(written[-1], items)
    if args.plot:
        from . import plotting

        written.append(plotting.plot_recon(x, lf, hf, recon, out / "recon.png"))
    return written


COMMANDS = {"sweep": cmd_sweep, "mc": cmd_mc, "compare": cmd_compare, "recon": cmd_recon}


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = parse_args(argv)
        if args.command in ("mc", "compare") and args.workers < 1:
            raise CliError("--workers must be >= 1")
        args.out.mkdir(parents=True, exist_ok=True)
        written = COMMANDS[args.command](args)
    except (CliError, SingularCircuitError, ValueError, OSError) as exc:
        msg = " ".join(str(exc).split())
        print(f"rtrx: error: {msg}", file=sys.stderr)
        return 1
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
