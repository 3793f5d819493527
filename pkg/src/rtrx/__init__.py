"""Frequency-domain analysis of crossover networks, centred on a
transformer-based resonant router (RTR) whose two outputs sum exactly to
the input, with LC and FIR baselines for comparison."""

from .analysis import FrequencyGrid, SweepResult, ac_sweep, complementarity_report, phase_metrics
from .mna import SingularCircuitError, solve_ac
from .montecarlo import ToleranceSpec, mc_run
from .netlist import Circuit, Element, NetlistError, emit_netlist, parse_netlist
from .scenarios import default_design, sweep_design
from .topologies import FirDesign, Lc2Design, RtrDesign, build_lc2, build_rtr
from .transformer import TransformerParams

__version__ = "0.1.0"

__all__ = [
    "Circuit", "Element", "FirDesign", "FrequencyGrid", "Lc2Design", "NetlistError",
    "RtrDesign", "SingularCircuitError", "SweepResult", "ToleranceSpec", "TransformerParams",
    "ac_sweep", "build_lc2", "build_rtr", "complementarity_report", "default_design",
    "emit_netlist", "mc_run", "parse_netlist", "phase_metrics", "solve_ac", "sweep_design",
]
