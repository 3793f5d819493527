"""Minimal SPICE-subset netlist reader and writer.

Grammar (one statement per line, blank lines ignored)::

    Rname n1 n2 value
    Lname n1 n2 value
    Cname n1 n2 value
    Vname n+ n- AC mag [phase_deg]
    Kname Lref1 Lref2 k
    .probe v(node)
    .end

Lines starting with ``*`` or ``#`` are comments. Values accept the suffixes
p, n, u, m, k and meg (case-insensitive). Anything else is an error.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from decimal import Decimal
from typing import Iterable

GROUND = "0"

KINDS = {
    "r": "resistor",
    "l": "inductor",
    "c": "capacitor",
    "v": "ac_source",
    "k": "coupling",
}
_LETTER = {kind: letter.upper() for letter, kind in KINDS.items()}

SUFFIXES = {
    "p": 1e-12,
    "n": 1e-9,
    "u": 1e-6,
    "m": 1e-3,
    "k": 1e3,
    "meg": 1e6,
}

_NAME_RE = re.compile(r"[A-Za-z][A-Za-z0-9_]*\Z")
_NODE_RE = re.compile(r"[A-Za-z0-9_]+\Z")
_VALUE_RE = re.compile(
    r"([+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)([A-Za-z]*)\Z", re.ASCII
)
_PROBE_RE = re.compile(r"v\(([A-Za-z0-9_]+)\)\Z", re.IGNORECASE)


class NetlistError(ValueError):
    """Parse or validation failure, positioned at ``line``/``column`` (1-based)."""

    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.line = line
        self.column = column
        where = f"line {line}, column {column}: " if line else ""
        super().__init__(where + message)


@dataclass(frozen=True)
class Element:
    kind: str
    name: str
    nodes: tuple[str, str]
    value: float
    phase_deg: float = 0.0

    @property
    def letter(self) -> str:
        return _LETTER[self.kind]

    def check(self) -> None:
        if self.kind not in _LETTER:
            raise NetlistError(f"unknown element kind {self.kind!r}")
        if not math.isfinite(self.value) or not math.isfinite(self.phase_deg):
            raise NetlistError(f"{self.name}: non-finite value")
        if self.kind == "coupling":
            if not 0.0 < self.value <= 1.0:
                raise NetlistError(
                    f"{self.name}: coupling coefficient {self.value!r} outside (0,1]"
                )
        elif self.kind == "ac_source":
            if self.value < 0.0:
                raise NetlistError(f"{self.name}: negative source magnitude")
        elif self.value <= 0.0:
            raise NetlistError(f"{self.name}: component value must be positive")


@dataclass(frozen=True)
class Circuit:
    """Immutable element list plus probe nodes. Ground is always node "0"."""

    elements: tuple[Element, ...] = ()
    probes: tuple[str, ...] = ()
    notes: tuple[str, ...] = field(default=(), compare=False)
    ground: str = field(default=GROUND, init=False)

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))
        object.__setattr__(self, "probes", tuple(self.probes))
        object.__setattr__(self, "notes", tuple(self.notes))

    def nodes(self) -> list[str]:
        """Non-ground nodes in order of first appearance."""
        seen: dict[str, None] = {}
        for el in self.elements:
            if el.kind == "coupling":
                continue
            for n in el.nodes:
                if n != GROUND:
                    seen.setdefault(n, None)
        return list(seen)

    def by_kind(self, kind: str) -> list[Element]:
        return [el for el in self.elements if el.kind == kind]

    def element(self, name: str) -> Element:
        key = name.lower()
        for el in self.elements:
            if el.name.lower() == key:
                return el
        raise KeyError(name)

    def validate(self) -> None:
        """Check the structural invariants; raises NetlistError."""
        names: set[str] = set()
        inductors = {el.name.lower() for el in self.by_kind("inductor")}
        for el in self.elements:
            el.check()
            key = el.name.lower()
            if key in names:
                raise NetlistError(f"duplicate element name {el.name!r}")
            names.add(key)
            if el.kind == "coupling":
                a, b = (n.lower() for n in el.nodes)
                if a == b:
                    raise NetlistError(f"{el.name}: couples {el.nodes[0]} to itself")
                for ref in (a, b):
                    if ref not in inductors:
                        raise NetlistError(f"{el.name}: no inductor named {ref!r}")
        declared = set(self.nodes()) | {GROUND}
        for p in self.probes:
            if p not in declared:
                raise NetlistError(f"probe on undeclared node {p!r}")
        floating = _floating_nodes(self)
        if floating:
            raise NetlistError(f"nodes not connected to ground: {', '.join(floating)}")


def _floating_nodes(circuit: Circuit) -> list[str]:
    adj: dict[str, set[str]] = {}
    for el in circuit.elements:
        if el.kind == "coupling":
            continue
        a, b = el.nodes
        adj.setdefault(a, set()).add(b)
        adj.setdefault(b, set()).add(a)
    reached = {GROUND}
    stack = [GROUND]
    while stack:
        for nxt in adj.get(stack.pop(), ()):
            if nxt not in reached:
                reached.add(nxt)
                stack.append(nxt)
    return [n for n in circuit.nodes() if n not in reached]


def parse_value(token: str) -> float:
    """Convert ``'10u'`` -> 1e-05 etc. Raises ValueError on bad input."""
    m = _VALUE_RE.match(token)
    if not m:
        raise ValueError(f"malformed number {token!r}")
    number, suffix = m.groups()
    value = float(number)
    if suffix:
        try:
            scale = SUFFIXES[suffix.lower()]
        except KeyError:
            raise ValueError(f"unknown suffix {suffix!r}") from None
        # Decimal keeps '10u' == 1e-5 exact instead of 10 * 1e-6.
        try:
            value = float(Decimal(number) * Decimal(repr(scale)))
        except ArithmeticError:
            raise ValueError(f"value out of range {token!r}") from None
    if not math.isfinite(value):
        raise ValueError(f"value out of range {token!r}")
    return value


def format_value(value: float) -> str:
    """Shortest round-tripping scientific form: 8 -> '8', 1e-05 -> '1e-5'."""
    if value == 0.0:
        return "0"
    sign = "-" if value < 0 else ""
    digits_t = Decimal(repr(abs(value))).as_tuple()
    digits = "".join(map(str, digits_t.digits))
    exponent = digits_t.exponent + len(digits) - 1
    digits = digits.rstrip("0") or "0"
    mantissa = digits[0] + ("." + digits[1:] if len(digits) > 1 else "")
    return sign + mantissa + (f"e{exponent}" if exponent else "")


def _tokens(line: str) -> list[tuple[str, int]]:
    return [(m.group(), m.start() + 1) for m in re.finditer(r"\S+", line)]


def parse_netlist(text: str | bytes) -> Circuit:
    if isinstance(text, (bytes, bytearray)):
        try:
            text = bytes(text).decode("utf-8")
        except UnicodeDecodeError as exc:
            raise NetlistError(f"invalid UTF-8 at byte {exc.start}") from None

    elements: list[Element] = []
    probes: list[tuple[str, int, int]] = []
    names: dict[str, int] = {}
    couplings: list[tuple[Element, int]] = []

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line[0] in "*#":
            continue
        toks = _tokens(raw)
        head, col = toks[0]

        if head.startswith("."):
            directive = head.lower()
            if directive == ".end":
                if len(toks) > 1:
                    raise NetlistError("unexpected text after .end", lineno, toks[1][1])
                break
            if directive == ".probe":
                if len(toks) != 2:
                    raise NetlistError(".probe takes exactly one v(node)", lineno, col)
                m = _PROBE_RE.match(toks[1][0])
                if not m:
                    raise NetlistError("expected v(node)", lineno, toks[1][1])
                probes.append((m.group(1), lineno, toks[1][1]))
                continue
            raise NetlistError(f"unknown directive {head!r}", lineno, col)

        if not _NAME_RE.match(head):
            raise NetlistError(f"bad element name {head!r}", lineno, col)
        kind = KINDS.get(head[0].lower())
        if kind is None:
            raise NetlistError(f"unsupported element type {head[0]!r}", lineno, col)
        key = head.lower()
        if key in names:
            raise NetlistError(
                f"duplicate element name {head!r} (first on line {names[key]})", lineno, col
            )

        if kind == "ac_source":
            if len(toks) not in (5, 6):
                raise NetlistError("expected: Vname n+ n- AC mag [phase]", lineno, col)
            if toks[3][0].lower() != "ac":
                raise NetlistError("expected keyword AC", lineno, toks[3][1])
            nums = toks[4:]
        else:
            if len(toks) != 4:
                raise NetlistError(f"expected 4 fields for {head[0].upper()} element", lineno, col)
            nums = toks[3:]

        for tok, c in toks[1:3]:
            if not _NODE_RE.match(tok):
                raise NetlistError(f"bad node name {tok!r}", lineno, c)

        vals = []
        for tok, c in nums:
            try:
                vals.append(parse_value(tok))
            except ValueError as exc:
                raise NetlistError(str(exc), lineno, c) from None

        el = Element(
            kind=kind,
            name=head,
            nodes=(toks[1][0], toks[2][0]),
            value=vals[0],
            phase_deg=vals[1] if len(vals) > 1 else 0.0,
        )
        try:
            el.check()
        except NetlistError as exc:
            raise NetlistError(str(exc), lineno, nums[0][1]) from None
        if kind == "coupling":
            if el.nodes[0].lower() == el.nodes[1].lower():
                raise NetlistError(f"{head}: couples an inductor to itself", lineno, toks[2][1])
            couplings.append((el, lineno))
        names[key] = lineno
        elements.append(el)

    inductors = {el.name.lower() for el in elements if el.kind == "inductor"}
    for el, lineno in couplings:
        for i, ref in enumerate(el.nodes):
            if ref.lower() not in inductors:
                col = _tokens(text.splitlines()[lineno - 1])[1 + i][1]
                raise NetlistError(f"{el.name}: no inductor named {ref!r}", lineno, col)

    circuit = Circuit(tuple(elements), tuple(p for p, _, _ in probes))
    declared = set(circuit.nodes()) | {GROUND}
    for p, lineno, col in probes:
        if p not in declared:
            raise NetlistError(f"probe on undeclared node {p!r}", lineno, col)
    return circuit


def emit_netlist(circuit: Circuit) -> str:
    lines: list[str] = [f"* {note}" for note in circuit.notes]
    for el in circuit.elements:
        a, b = el.nodes
        if el.kind == "ac_source":
            line = f"{el.name} {a} {b} AC {format_value(el.value)}"
            if el.phase_deg:
                line += f" {format_value(el.phase_deg)}"
        else:
            line = f"{el.name} {a} {b} {format_value(el.value)}"
        lines.append(line)
    lines.extend(f".probe v({p})" for p in circuit.probes)
    return "".join(line + "\n" for line in lines)


def make_circuit(elements: Iterable[Element], probes: Iterable[str] = (), notes=()) -> Circuit:
    """Build and validate a circuit in one step."""
    circuit = Circuit(tuple(elements), tuple(probes), tuple(notes))
    circuit.validate()
    return circuit
