"""Complex modified nodal analysis for linear R/L/C/K circuits with AC sources.

Unknown ordering is fixed: non-ground node voltages in first-appearance order,
then inductor branch currents, then voltage-source branch currents, both in
file order. Branch currents follow the passive sign convention: they flow from
the element's first node through the element to its second node.

The system is affine in frequency, ``A(w) = G + j*w*D``, so a sweep stamps the
circuit once and evaluates every frequency in one batched factorization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .netlist import GROUND, Circuit, NetlistError

# Pivot ratio (after power-of-two equilibration) above which a system is
# treated as singular rather than solved.
SINGULAR_RATIO = 1e13


class SingularCircuitError(ArithmeticError):
    def __init__(self, omega: float, pivot: float, ratio: float, detail: str = ""):
        self.omega = omega
        self.pivot = pivot
        self.ratio = ratio
        where = f"at f = {omega / (2 * math.pi):.9g} Hz (omega = {omega:.9g} rad/s)"
        if detail:
            super().__init__(f"{detail} {where}")
        else:
            super().__init__(
                f"singular MNA system {where}: smallest pivot {pivot:.3e}, pivot ratio {ratio:.3e}"
            )


def mutual_inductance(k: float, l1: float, l2: float) -> float:
    """M = k*sqrt(L1*L2), written so that L1 == L2 gives exactly k*L1."""
    return k * l1 * math.sqrt(l2 / l1)


@dataclass
class MnaSystem:
    circuit: Circuit
    unknowns: list[str]
    node_index: dict[str, int]
    branch_index: dict[str, int]  # element name -> row of its branch current
    g: np.ndarray  # frequency-independent part
    d: np.ndarray  # coefficient of j*omega
    b: np.ndarray

    @property
    def size(self) -> int:
        return len(self.unknowns)

    def matrix(self, omega) -> np.ndarray:
        omega = np.asarray(omega, dtype=float)
        return self.g + 1j * omega[..., None, None] * self.d


def stamp(circuit: Circuit) -> MnaSystem:
    if not circuit.elements:
        raise NetlistError("empty circuit")
    circuit.validate()
    sources = circuit.by_kind("ac_source")
    if not sources:
        raise NetlistError("circuit has no AC source")
    inductors = circuit.by_kind("inductor")

    nodes = circuit.nodes()
    node_index = {n: i for i, n in enumerate(nodes)}
    branch_index: dict[str, int] = {}
    unknowns = [f"V({n})" for n in nodes]
    for el in inductors + sources:
        branch_index[el.name.lower()] = len(unknowns)
        unknowns.append(f"I({el.name})")

    size = len(unknowns)
    g = np.zeros((size, size))
    d = np.zeros((size, size))
    b = np.zeros(size, dtype=complex)

    def idx(node: str) -> int | None:
        return None if node == GROUND else node_index[node]

    def admittance(mat, a, c, y):
        ia, ic = idx(a), idx(c)
        if ia is not None:
            mat[ia, ia] += y
        if ic is not None:
            mat[ic, ic] += y
        if ia is not None and ic is not None:
            mat[ia, ic] -= y
            mat[ic, ia] -= y

    def incidence(a, c, row):
        ia, ic = idx(a), idx(c)
        if ia is not None:
            g[ia, row] += 1.0
            g[row, ia] += 1.0
        if ic is not None:
            g[ic, row] -= 1.0
            g[row, ic] -= 1.0

    for el in circuit.elements:
        a, c = el.nodes
        if el.kind == "resistor":
            admittance(g, a, c, 1.0 / el.value)
        elif el.kind == "capacitor":
            admittance(d, a, c, el.value)
        elif el.kind == "inductor":
            row = branch_index[el.name.lower()]
            incidence(a, c, row)
            d[row, row] -= el.value
        elif el.kind == "ac_source":
            row = branch_index[el.name.lower()]
            incidence(a, c, row)
            b[row] = el.value * np.exp(1j * math.radians(el.phase_deg))

    for el in circuit.by_kind("coupling"):
        l1 = circuit.element(el.nodes[0])
        l2 = circuit.element(el.nodes[1])
        m = mutual_inductance(el.value, l1.value, l2.value)
        r1 = branch_index[l1.name.lower()]
        r2 = branch_index[l2.name.lower()]
        d[r1, r2] -= m
        d[r2, r1] -= m

    return MnaSystem(circuit, unknowns, node_index, branch_index, g, d, b)


def assemble(circuit: Circuit, omega: float):
    """Return (A, b, unknown labels) at one angular frequency."""
    if not omega > 0:
        raise ValueError(f"omega must be positive, got {omega!r}")
    sys = stamp(circuit)
    return sys.matrix(omega), sys.b.copy(), list(sys.unknowns)


@dataclass
class AcSolution:
    omega: float
    node_voltages: dict[str, complex]
    branch_currents: dict[str, complex]
    condition_estimate: float
    x: np.ndarray = field(repr=False)

    def v(self, node: str) -> complex:
        return 0j if node == GROUND else self.node_voltages[node]


def solve_batch(sys: MnaSystem, omegas) -> tuple[np.ndarray, np.ndarray]:
    """Solve at every omega; returns (x of shape (n_freq, size), pivot ratios).

    ``x`` is refined and returned in extended precision (clongdouble).
    """
    omegas = np.atleast_1d(np.asarray(omegas, dtype=float))
    if np.any(~(omegas > 0)):
        raise ValueError("omega must be positive")
    a = sys.matrix(omegas)
    f = linalg.lu_factor(a)
    ratio = f.pivot_ratio()
    bad = np.flatnonzero(~(ratio < SINGULAR_RATIO))
    if bad.size:
        i = bad[0]
        raise SingularCircuitError(float(omegas[i]), float(f.pivots[i].min()), float(ratio[i]))
    x = linalg.lu_solve(f, sys.b)
    return linalg.refine(a, f, sys.b, x), ratio


def _solution(sys: MnaSystem, omega: float, x: np.ndarray, cond: float) -> AcSolution:
    nodes = {n: complex(x[i]) for n, i in sys.node_index.items()}
    currents = {}
    for el in sys.circuit.elements:
        row = sys.branch_index.get(el.name.lower())
        if row is not None:
            currents[el.name] = complex(x[row])
    return AcSolution(float(omega), nodes, currents, float(cond), x)


def solve_ac(circuit: Circuit, omega: float) -> AcSolution:
    if not omega > 0:
        raise ValueError(f"omega must be positive, got {omega!r}")
    sys = stamp(circuit)
    x, ratio = solve_batch(sys, [omega])
    return _solution(sys, omega, x[0], ratio[0])


def solve_many(circuit: Circuit, omegas) -> list[AcSolution]:
    sys = stamp(circuit)
    x, ratio = solve_batch(sys, omegas)
    return [_solution(sys, w, xi, r) for w, xi, r in zip(np.atleast_1d(omegas), x, ratio)]


def element_currents(solution: AcSolution, circuit: Circuit) -> dict[str, tuple[complex, complex]]:
    """Branch (voltage, current) for every two-terminal element, passive convention."""
    w = solution.omega
    out = {}
    for el in circuit.elements:
        if el.kind == "coupling":
            continue
        v = solution.v(el.nodes[0]) - solution.v(el.nodes[1])
        if el.kind == "resistor":
            i = v / el.value
        elif el.kind == "capacitor":
            i = 1j * w * el.value * v
        else:
            try:
                i = solution.branch_currents[el.name]
            except KeyError:
                raise ValueError(f"solution does not match circuit: no current for {el.name}") from None
        out[el.name] = (v, i)
    return out


def kcl_residual(solution: AcSolution, circuit: Circuit) -> dict[str, complex]:
    """Net current leaving each non-ground node."""
    res = {n: 0j for n in circuit.nodes()}
    for v_i in element_currents(solution, circuit).items():
        name, (_, i) = v_i
        a, c = circuit.element(name).nodes
        if a != GROUND:
            res[a] += i
        if c != GROUND:
            res[c] -= i
    return res


def source_power(solution: AcSolution, circuit: Circuit) -> complex:
    """Complex power delivered by the AC sources, sum of -V*conj(I)."""
    pairs = element_currents(solution, circuit)
    return -sum(
        (pairs[el.name][0] * np.conj(pairs[el.name][1]) for el in circuit.by_kind("ac_source")),
        0j,
    )


def power_balance(solution: AcSolution, circuit: Circuit) -> complex:
    """Tellegen residual: sum of V*conj(I) over every element (sources included)."""
    if set(solution.node_voltages) != set(circuit.nodes()):
        raise ValueError("solution does not match circuit: node sets differ")
    pairs = element_currents(solution, circuit)
    return complex(sum((v * np.conj(i) for v, i in pairs.values()), 0j))
