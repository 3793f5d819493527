import random
import string

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rtrx.netlist import (
    Circuit,
    Element,
    NetlistError,
    emit_netlist,
    format_value,
    make_circuit,
    parse_netlist,
    parse_value,
)
from rtrx.topologies import RtrDesign, build_rtr


def test_basic_example():
    c = parse_netlist("V1 in 0 AC 1\nC1 in m 10u\nL1 m 0 2.533m\n.probe v(m)")
    assert len(c.elements) == 3
    assert c.probes == ("m",)
    assert c.element("C1").value == 1e-5
    assert c.element("L1").value == 2.533e-3
    assert c.element("c1").kind == "capacitor"


def test_empty_text():
    assert parse_netlist("").elements == ()


@pytest.mark.parametrize("token, value", [
    ("10u", 1e-5), ("2.533m", 2.533e-3), ("1meg", 1e6), ("1MEG", 1e6), ("4.7k", 4700.0),
    ("100p", 1e-10), ("3n", 3e-9), ("8", 8.0), ("1e-3", 1e-3), (".5", 0.5), ("2.", 2.0),
])
def test_suffixes_exact(token, value):
    assert parse_value(token) == value


@pytest.mark.parametrize("token", ["10x", "", "u", "1e", "--1", "1.2.3", "1e999", "1e400k", "nan", "inf"])
def test_bad_values(token):
    with pytest.raises(ValueError):
        parse_value(token)


@pytest.mark.parametrize("text, fragment", [
    ("L1 a 0 1m\nL2 b 0 1m\nK1 L1 L2 1.5", "outside (0,1]"),
    ("K1 L1 L2 0.5", "no inductor"),
    ("L1 a 0 1m\nK1 L1 L1 0.5", "itself"),
    ("R1 a 0 0", "positive"),
    ("R1 a 0 -5", "positive"),
    ("R1 a 0 1\nr1 a 0 2", "duplicate"),
    ("R1 a 0 1\n.probe v(b)", "undeclared"),
    ("R1 a 0 1q", "suffix"),
    ("X1 a 0 1", "unsupported"),
    ("V1 a 0 DC 1", "AC"),
    (".tran 1 2", "directive"),
    ("R1 a 0", "4 fields"),
    ("R1 a-b 0 1", "node"),
    ("V1 a 0 AC -1", "negative"),
])
def test_errors(text, fragment):
    with pytest.raises(NetlistError, match=None) as info:
        parse_netlist(text)
    assert fragment in str(info.value)
    assert info.value.line >= 1 and info.value.column >= 1


def test_error_position():
    with pytest.raises(NetlistError) as info:
        parse_netlist("* header\nR1 a 0 1\nC2 a 0 12zz")
    assert (info.value.line, info.value.column) == (3, 8)


def test_comments_end_and_case():
    text = "# c\n* c\n\nr1 A 0 8\n.END\nthis is never read"
    c = parse_netlist(text)
    assert [e.name for e in c.elements] == ["r1"]
    assert c.elements[0].nodes == ("A", "0")


def test_source_phase():
    c = parse_netlist("V1 a 0 AC 2 45\nR1 a 0 1")
    assert c.element("V1").value == 2 and c.element("V1").phase_deg == 45


def test_emit_canonical():
    c = Circuit((Element("resistor", "R1", ("a", "0"), 8.0),))
    assert emit_netlist(c) == "R1 a 0 8\n"
    assert format_value(1e-5) == "1e-5"
    assert format_value(2.533e-3) == "2.533e-3"
    assert format_value(1e6) == "1e6"
    assert format_value(0.1) == "1e-1"


def test_rtr_round_trip():
    c = build_rtr(RtrDesign.nonideal())
    assert parse_netlist(emit_netlist(c)) == c


def test_validate_floating():
    with pytest.raises(NetlistError, match="not connected"):
        make_circuit([Element("ac_source", "V1", ("a", "0"), 1.0),
                      Element("resistor", "R1", ("b", "c"), 1.0)])


def test_bytes_input():
    assert len(parse_netlist(b"R1 a 0 1").elements) == 1
    with pytest.raises(NetlistError, match="UTF-8"):
        parse_netlist(b"R1 a 0 \xff")


# -- round-trip property -----------------------------------------------------------

node_names = st.sampled_from(["0", "a", "b", "n1", "n2", "out", "X_3"])
positive = st.floats(min_value=1e-15, max_value=1e12, allow_nan=False, allow_infinity=False)


@st.composite
def circuits(draw):
    n = draw(st.integers(1, 8))
    els = []
    for i in range(n):
        kind = draw(st.sampled_from(["resistor", "inductor", "capacitor", "ac_source"]))
        a = draw(node_names)
        b = draw(node_names.filter(lambda x, a=a: x != a))
        letter = {"resistor": "R", "inductor": "L", "capacitor": "C", "ac_source": "V"}[kind]
        if kind == "ac_source":
            value = draw(st.floats(0, 1e3, allow_nan=False))
            phase = draw(st.floats(-360, 360, allow_nan=False))
            els.append(Element(kind, f"{letter}{i}", (a, b), value, phase))
        else:
            els.append(Element(kind, f"{letter}{i}", (a, b), draw(positive)))
    inductors = [e.name for e in els if e.kind == "inductor"]
    if len(inductors) >= 2:
        k = draw(st.floats(1e-6, 1.0, exclude_min=False))
        els.append(Element("coupling", "K1", (inductors[0], inductors[1]), k))
    nodes = sorted({n for e in els if e.kind != "coupling" for n in e.nodes})
    probes = tuple(draw(st.lists(st.sampled_from(nodes), max_size=3)))
    return Circuit(tuple(els), probes)


@given(circuits())
@settings(max_examples=300)
def test_round_trip_property(c):
    assert parse_netlist(emit_netlist(c)) == c


@given(positive)
def test_format_value_round_trip(v):
    assert parse_value(format_value(v)) == v


# -- fuzz --------------------------------------------------------------------

FUZZ_VOCAB = [
    "R1", "L1", "L2", "C3", "V1", "K1", "r9", "x", "AC", "ac", "0", "in", "lf", "hf", "1", "-1",
    "10u", "2.5m", "1meg", "1e-9", "1e400", "nan", ".probe", "v(in)", "v(zz)", "v(", ".end",
    "*", "#", "\t", "  ", "1.5", "0.999", "()", "µ", "k", "\x00",
]


def _fuzz_case(rng):
    mode = rng.random()
    if mode < 0.4:
        lines = []
        for _ in range(rng.randint(0, 6)):
            lines.append(" ".join(rng.choice(FUZZ_VOCAB) for _ in range(rng.randint(0, 7))))
        return "\n".join(lines)
    if mode < 0.7:
        return "".join(rng.choice(string.printable) for _ in range(rng.randint(0, 60)))
    return bytes(rng.getrandbits(8) for _ in range(rng.randint(0, 40)))


def run_fuzz(n, seed=1234):
    """Feed n random inputs; return (accepted, rejected). Any other exception propagates."""
    rng = random.Random(seed)
    ok = bad = 0
    for _ in range(n):
        try:
            parse_netlist(_fuzz_case(rng))
            ok += 1
        except NetlistError:
            bad += 1
    return ok, bad


def test_fuzz_no_crashes():
    ok, bad = run_fuzz(100_000)
    assert ok + bad == 100_000
    assert ok > 0 and bad > 0
