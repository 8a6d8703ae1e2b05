"""Generators for GDI/PTL primitive cells, the two proposed 10T adders and a
28T static CMOS reference, plus golden Boolean reference functions.

A GDI cell is an inverter-shaped transistor pair with three independent
inputs: G drives both gates, P feeds the PMOS source and N the NMOS source,
and both bulks tie to the respective source input.  Its output is the
two-way multiplexer ``G ? N : P``.

The adder generators emit flat circuits wired so that every cell reaches a
defensible logic level at its output under worst-case threshold drops:

* ``ptl_xor2`` is the classic 4T network: two PMOS pass transistors cross
  steered by the inputs plus a 2-NMOS pull-down for the 11 row.
* ``proposed_ptl_gdi_adder`` chains two such XOR stages (8T for SUM) and a
  2T GDI CARRY with H on the gate, A on the PMOS source and Cin on the
  NMOS source.
* ``proposed_gdi_adder`` builds both XOR stages in GDI style: a mux pair
  plus one inverter supplying the complemented data input (4T each, 8T for
  SUM).  Its CARRY is the same 2T GDI mux expressed on the restored
  complement of H, which computes the identical function H'A + H*Cin while
  keeping the carry gate at full swing.

Default sizing is 4 um PMOS / 2 um NMOS at L = 0.18 um; these are generic
configuration defaults, not calibrated data.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Callable, NamedTuple

from .netlist import GROUND, Circuit, Mosfet, Ports

DEFAULT_WP = 4e-6
DEFAULT_WN = 2e-6
DEFAULT_L = 0.18e-6

VDD_NET = "vdd"


class SumCarry(NamedTuple):
    sum: int
    carry: int


def golden_full_adder(a: int, b: int, cin: int) -> SumCarry:
    """Reference adder: SUM is the 3-way parity, CARRY is H'A + H*Cin with
    H = A xor B (equivalently the majority of the inputs)."""
    h = a ^ b
    return SumCarry(sum=h ^ cin, carry=cin if h else a)


@dataclass(frozen=True)
class TruthFunction:
    """Total boolean function given as an explicit table over bit vectors."""

    arity: int
    table: dict[tuple[int, ...], int]

    def __post_init__(self):
        expected = {bits for bits in product((0, 1), repeat=self.arity)}
        if set(self.table) != expected:
            raise ValueError(f"table must be total over {2 ** self.arity} rows")

    @classmethod
    def from_callable(cls, arity: int, fn: Callable[..., int]) -> "TruthFunction":
        return cls(arity, {bits: fn(*bits) & 1 for bits in product((0, 1), repeat=arity)})

    def __call__(self, *bits: int) -> int:
        return self.table[tuple(bits)]


@dataclass(frozen=True)
class GdiConfig:
    """Input assignment for a GDI cell.  Each of g/p/n is either a variable
    name (a string) or the constant 0 or 1."""

    g: str | int
    p: str | int
    n: str | int

    def __post_init__(self):
        for v in (self.g, self.p, self.n):
            if not (isinstance(v, str) or v in (0, 1)):
                raise ValueError(f"bad GDI input {v!r}")
        if not self.variables:
            raise ValueError("at least one GDI input must be a variable")

    @property
    def variables(self) -> tuple[str, ...]:
        seen = sorted({v for v in (self.g, self.p, self.n) if isinstance(v, str)})
        return tuple(seen)


@dataclass(frozen=True)
class CellSpec:
    """A generated cell: its circuit plus golden functions per output port."""

    name: str
    circuit: Circuit
    golden: dict[str, TruthFunction] = field(default_factory=dict)

    def __post_init__(self):
        arity = len(self.circuit.ports.inputs)
        for out, fn in self.golden.items():
            if out not in self.circuit.ports.outputs:
                raise ValueError(f"golden output {out!r} is not a declared port")
            if fn.arity != arity:
                raise ValueError(f"golden for {out!r} has arity {fn.arity}, "
                                 f"expected {arity}")

    @property
    def inputs(self) -> tuple[str, ...]:
        return self.circuit.ports.inputs

    @property
    def outputs(self) -> tuple[str, ...]:
        return self.circuit.ports.outputs


def _nmos(name, drain, gate, source, bulk=GROUND, w=DEFAULT_WN) -> Mosfet:
    return Mosfet(name, "NMOS", drain, gate, source, bulk, w, DEFAULT_L)


def _pmos(name, drain, gate, source, bulk=VDD_NET, w=DEFAULT_WP) -> Mosfet:
    return Mosfet(name, "PMOS", drain, gate, source, bulk, w, DEFAULT_L)


def _inverter(tag: str, inp: str, out: str) -> list[Mosfet]:
    return [
        _pmos(f"MP{tag}", out, inp, VDD_NET),
        _nmos(f"MN{tag}", out, inp, GROUND),
    ]


def gdi_cell(cfg: GdiConfig, name: str | None = None) -> CellSpec:
    """Two-transistor GDI cell for an arbitrary G/P/N assignment.

    Constants map to the rails (0 -> ground, 1 -> vdd); the golden function
    is the mux law ``out = G ? N : P`` restricted to the variable inputs.
    """
    def net_of(v) -> str:
        if isinstance(v, str):
            return v.lower()
        return VDD_NET if v else GROUND

    g_net, p_net, n_net = net_of(cfg.g), net_of(cfg.p), net_of(cfg.n)
    mosfets = (
        _pmos("MP1", "out", g_net, p_net, bulk=p_net),
        _nmos("MN1", "out", g_net, n_net, bulk=n_net),
    )
    inputs = tuple(v.lower() for v in cfg.variables)
    circuit = Circuit(
        mosfets=mosfets,
        ports=Ports(inputs=inputs, outputs=("out",), vdd=VDD_NET),
    )

    def fn(*bits: int) -> int:
        env = dict(zip(inputs, bits))
        def val(v):
            return env[v.lower()] if isinstance(v, str) else v
        return val(cfg.n) if val(cfg.g) else val(cfg.p)

    golden = {"out": TruthFunction.from_callable(len(inputs), fn)}
    return CellSpec(name or "gdi-cell", circuit, golden)


def gdi_f1() -> CellSpec:
    """out = A'B  (N=0, P=B, G=A)."""
    return gdi_cell(GdiConfig(g="A", p="B", n=0), name="gdi-f1")


def gdi_f2() -> CellSpec:
    """out = A' + B  (N=B, P=1, G=A)."""
    return gdi_cell(GdiConfig(g="A", p=1, n="B"), name="gdi-f2")


def gdi_or() -> CellSpec:
    """out = A + B  (N=1, P=B, G=A)."""
    return gdi_cell(GdiConfig(g="A", p="B", n=1), name="gdi-or")


def gdi_and() -> CellSpec:
    """out = AB  (N=B, P=0, G=A)."""
    return gdi_cell(GdiConfig(g="A", p=0, n="B"), name="gdi-and")


def gdi_mux() -> CellSpec:
    """out = A'B + AC  (N=C, P=B, G=A)."""
    return gdi_cell(GdiConfig(g="A", p="B", n="C"), name="gdi-mux")


def _ptl_xor_stage(tag: str, x: str, y: str, out: str) -> list[Mosfet]:
    """4T pass XOR: each PMOS passes the other input when its gate is low;
    a 2-NMOS series pull-down handles the both-high row."""
    mid = f"{out}_pd"
    return [
        _pmos(f"MP{tag}a", out, x, y),
        _pmos(f"MP{tag}b", out, y, x),
        _nmos(f"MN{tag}a", out, x, mid),
        _nmos(f"MN{tag}b", mid, y, GROUND),
    ]


def ptl_xor2(name: str = "ptl-xor2") -> CellSpec:
    """Pass-transistor XOR of two inputs using two PMOS and two NMOS."""
    circuit = Circuit(
        mosfets=tuple(_ptl_xor_stage("1", "a", "b", "out")),
        ports=Ports(inputs=("a", "b"), outputs=("out",), vdd=VDD_NET),
    )
    golden = {"out": TruthFunction.from_callable(2, lambda a, b: a ^ b)}
    return CellSpec(name, circuit, golden)


def _adder_golden() -> dict[str, TruthFunction]:
    return {
        "sum": TruthFunction.from_callable(3, lambda a, b, c: golden_full_adder(a, b, c).sum),
        "carry": TruthFunction.from_callable(3, lambda a, b, c: golden_full_adder(a, b, c).carry),
    }


_ADDER_PORTS = Ports(inputs=("a", "b", "cin"), outputs=("sum", "carry"), vdd=VDD_NET)


def proposed_ptl_gdi_adder() -> CellSpec:
    """10T hybrid adder: PTL SUM path (two 4T XOR stages), GDI CARRY.

    H = a xor b feeds a second XOR stage against cin for SUM, and gates the
    CARRY mux whose PMOS source is a and NMOS source is cin.
    """
    mosfets = []
    mosfets += _ptl_xor_stage("h", "a", "b", "h")
    mosfets += _ptl_xor_stage("s", "h", "cin", "sum")
    mosfets += [
        _pmos("MPc", "carry", "h", "a", bulk="a"),
        _nmos("MNc", "carry", "h", "cin", bulk="cin"),
    ]
    circuit = Circuit(mosfets=tuple(mosfets), ports=_ADDER_PORTS)
    return CellSpec("proposed-ptl-gdi", circuit, _adder_golden())


def proposed_gdi_adder() -> CellSpec:
    """10T all-GDI adder: two GDI XOR stages (mux pair + inverter each) and
    a 2T GDI CARRY.

    The H stage muxes a / a' under b; the SUM stage muxes h / h' under cin.
    The inverter on h restores full swing, so the CARRY mux is steered by
    h' (with cin on its PMOS source and a on its NMOS source), computing
    the same H'A + H*Cin as the gate-on-H form but without stacking a
    second threshold drop on a degraded H.
    """
    mosfets = []
    mosfets += _inverter("ia", "a", "a_n")
    mosfets += [
        _pmos("MPh", "h", "b", "a", bulk="a"),
        _nmos("MNh", "h", "b", "a_n", bulk="a_n"),
    ]
    mosfets += _inverter("ih", "h", "h_n")
    mosfets += [
        _pmos("MPs", "sum", "cin", "h", bulk="h"),
        _nmos("MNs", "sum", "cin", "h_n", bulk="h_n"),
    ]
    mosfets += [
        _pmos("MPc", "carry", "h_n", "cin", bulk="cin"),
        _nmos("MNc", "carry", "h_n", "a", bulk="a"),
    ]
    circuit = Circuit(mosfets=tuple(mosfets), ports=_ADDER_PORTS)
    return CellSpec("proposed-gdi", circuit, _adder_golden())


def cmos28_reference_adder() -> CellSpec:
    """28T complementary static full adder (mirror style) as a baseline.

    Carry-bar gate (5N + 5P), sum-bar gate reusing carry-bar (7N + 7P),
    plus output inverters.
    """
    m = []
    # carry-bar: pull-down A*B + Cin*(A+B), mirrored pull-up
    m += [
        _nmos("MNc1", "cob", "a", "cx1"),
        _nmos("MNc2", "cx1", "b", GROUND),
        _nmos("MNc3", "cob", "cin", "cx2"),
        _nmos("MNc4", "cx2", "a", GROUND),
        _nmos("MNc5", "cx2", "b", GROUND),
        _pmos("MPc1", "cy1", "a", VDD_NET),
        _pmos("MPc2", "cob", "b", "cy1"),
        _pmos("MPc3", "cy2", "a", VDD_NET),
        _pmos("MPc4", "cy2", "b", VDD_NET),
        _pmos("MPc5", "cob", "cin", "cy2"),
    ]
    # sum-bar: pull-down cob*(A+B+Cin) + A*B*Cin, mirrored pull-up
    m += [
        _nmos("MNs1", "sb", "cob", "sz1"),
        _nmos("MNs2", "sz1", "a", GROUND),
        _nmos("MNs3", "sz1", "b", GROUND),
        _nmos("MNs4", "sz1", "cin", GROUND),
        _nmos("MNs5", "sb", "a", "sz2"),
        _nmos("MNs6", "sz2", "b", "sz3"),
        _nmos("MNs7", "sz3", "cin", GROUND),
        _pmos("MPs1", "sw1", "a", VDD_NET),
        _pmos("MPs2", "sw1", "b", VDD_NET),
        _pmos("MPs3", "sw1", "cin", VDD_NET),
        _pmos("MPs4", "sb", "cob", "sw1"),
        _pmos("MPs5", "sw2", "a", VDD_NET),
        _pmos("MPs6", "sw3", "b", "sw2"),
        _pmos("MPs7", "sb", "cin", "sw3"),
    ]
    m += _inverter("is", "sb", "sum")
    m += _inverter("ic", "cob", "carry")
    circuit = Circuit(mosfets=tuple(m), ports=_ADDER_PORTS)
    return CellSpec("cmos28", circuit, _adder_golden())


#: CLI/service registry of built-in cell generators.
BUILTIN_CELLS: dict[str, Callable[[], CellSpec]] = {
    "gdi-f1": gdi_f1,
    "gdi-f2": gdi_f2,
    "gdi-or": gdi_or,
    "gdi-and": gdi_and,
    "gdi-mux": gdi_mux,
    "ptl-xor2": ptl_xor2,
    "proposed-ptl-gdi": proposed_ptl_gdi_adder,
    "proposed-gdi": proposed_gdi_adder,
    "cmos28": cmos28_reference_adder,
}


def builtin_cell(name: str) -> CellSpec:
    try:
        return BUILTIN_CELLS[name]()
    except KeyError:
        known = ", ".join(sorted(BUILTIN_CELLS))
        raise KeyError(f"unknown cell {name!r} (known: {known})") from None


def cell_from_circuit(circuit: Circuit, name: str) -> CellSpec:
    """Wrap a user-supplied circuit (e.g. a parsed netlist) as a cell.

    Full-adder goldens are attached automatically when the port shape
    matches (three inputs, outputs named sum/carry); anything else is
    checked against the 2*Vt rule only.
    """
    if not circuit.ports.inputs:
        raise ValueError("netlist declares no input ports (.ports in=...)")
    if not circuit.ports.outputs:
        raise ValueError("netlist declares no output ports (.ports out=...)")
    if circuit.ports.vdd is None:
        raise ValueError("netlist declares no vdd port (.ports vdd=...)")
    golden: dict[str, TruthFunction] = {}
    outs = {o.lower(): o for o in circuit.ports.outputs}
    if len(circuit.ports.inputs) == 3 and {"sum", "carry"} <= set(outs):
        golden = {
            outs["sum"]: TruthFunction.from_callable(
                3, lambda a, b, c: golden_full_adder(a, b, c).sum),
            outs["carry"]: TruthFunction.from_callable(
                3, lambda a, b, c: golden_full_adder(a, b, c).carry),
        }
    return CellSpec(name, circuit, golden)
