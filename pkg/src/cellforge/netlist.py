"""Circuit data model and SPICE-subset netlist parser/serializer.

The accepted grammar (one statement per line, ``+`` continuations,
``*`` comment lines, ``;`` trailing comments):

    M<name> <drain> <gate> <source> <bulk> <NMOS|PMOS> W=<val> L=<val>
    C<name> <n+> <n-> <val>
    V<name> <n+> <n-> DC <val>
    V<name> <n+> <n-> PULSE(<v1> <v2> <td> <tr> <tf> <pw> <per>)
    .ports in=<a,b,cin> out=<sum,carry> vdd=<net>
    .end

Numbers are decimal with an optional SI suffix ``f p n u m k meg``
(case-insensitive).  Keywords are case-insensitive; net and device names
keep their case.  Ground is the net named ``"0"``.

Circuits are immutable after construction and safe to share between
threads; ``parse`` is a pure function.
"""

from __future__ import annotations

import math
import re
import warnings
from dataclasses import dataclass, field, replace

GROUND = "0"

#: Minimum transistor width accepted by the data model (2 um process rule).
MIN_FEATURE_WIDTH = 2e-6

_SUFFIXES = {
    "f": 1e-15,
    "p": 1e-12,
    "n": 1e-9,
    "u": 1e-6,
    "m": 1e-3,
    "k": 1e3,
    "meg": 1e6,
}

_NUMBER_RE = re.compile(
    r"^([+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)(meg|f|p|n|u|m|k)?$",
    re.IGNORECASE,
)


class NetlistError(ValueError):
    """Raised on malformed netlist text or an invalid circuit."""

    def __init__(self, message: str, line: int | None = None, col: int | None = None):
        self.line = line
        self.col = col
        if line is not None:
            where = f"line {line}" + (f", col {col}" if col is not None else "")
            message = f"{where}: {message}"
        super().__init__(message)


class DanglingNetWarning(UserWarning):
    """A net referenced by exactly one device terminal."""


def parse_value(token: str) -> float:
    """Parse a numeric token with an optional SI suffix into a float."""
    m = _NUMBER_RE.match(token)
    if not m:
        raise ValueError(f"bad number {token!r}")
    base, suffix = m.groups()
    scale = _SUFFIXES[suffix.lower()] if suffix else 1.0
    return float(base) * scale


def format_value(value: float) -> str:
    """Format a float so that ``parse_value`` recovers it exactly."""
    return repr(float(value))


@dataclass(frozen=True)
class Mosfet:
    """Four-terminal MOSFET.  Drain and source are stored as written but all
    engines treat the channel as symmetric."""

    name: str
    polarity: str  # "NMOS" | "PMOS"
    drain: str
    gate: str
    source: str
    bulk: str
    width: float
    length: float

    def __post_init__(self):
        if self.polarity not in ("NMOS", "PMOS"):
            raise NetlistError(f"mosfet {self.name}: bad polarity {self.polarity!r}")
        if not self.length > 0:
            raise NetlistError(f"mosfet {self.name}: length must be > 0")
        if not self.width > 0:
            raise NetlistError(f"mosfet {self.name}: width must be > 0")
        if self.width < MIN_FEATURE_WIDTH:
            raise NetlistError(
                f"mosfet {self.name}: width {self.width:g} below minimum "
                f"feature width {MIN_FEATURE_WIDTH:g}"
            )

    @property
    def terminals(self) -> tuple[str, str, str, str]:
        return (self.drain, self.gate, self.source, self.bulk)


@dataclass(frozen=True)
class Dc:
    volts: float


@dataclass(frozen=True)
class Pulse:
    """SPICE PULSE waveform: v_low, v_high, delay, rise, fall, width, period."""

    v_low: float
    v_high: float
    delay: float
    rise: float
    fall: float
    width: float
    period: float

    def __post_init__(self):
        if not (self.rise > 0 and self.fall > 0):
            raise NetlistError("PULSE rise and fall must be > 0")
        if not self.period > self.width + self.rise + self.fall:
            raise NetlistError("PULSE period must exceed width + rise + fall")

    def value(self, t: float) -> float:
        """Waveform value at time ``t`` (v_low before ``delay``, periodic after)."""
        if t < self.delay:
            return self.v_low
        tp = math.fmod(t - self.delay, self.period)
        if tp < self.rise:
            return self.v_low + (self.v_high - self.v_low) * tp / self.rise
        if tp < self.rise + self.width:
            return self.v_high
        if tp < self.rise + self.width + self.fall:
            frac = (tp - self.rise - self.width) / self.fall
            return self.v_high + (self.v_low - self.v_high) * frac
        return self.v_low


@dataclass(frozen=True)
class IndependentSource:
    name: str
    positive: str
    negative: str
    kind: Dc | Pulse

    def value(self, t: float) -> float:
        if isinstance(self.kind, Dc):
            return self.kind.volts
        return self.kind.value(t)

    def breakpoints(self, tstop: float) -> list[float]:
        """Waveform corner times within [0, tstop]."""
        if isinstance(self.kind, Dc):
            return []
        p = self.kind
        pts: list[float] = []
        k = 0
        while True:
            t0 = p.delay + k * p.period
            if t0 > tstop:
                break
            t1 = t0 + p.rise
            t2 = t1 + p.width
            pts.extend([t0, t1, t2, t2 + p.fall])
            k += 1
        return [t for t in pts if 0.0 < t < tstop]


@dataclass(frozen=True)
class Capacitor:
    name: str
    positive: str
    negative: str
    value: float

    def __post_init__(self):
        if not self.value > 0:
            raise NetlistError(f"capacitor {self.name}: value must be > 0")


@dataclass(frozen=True)
class Ports:
    """Declared circuit interface: ordered input/output nets plus the supply."""

    inputs: tuple[str, ...] = ()
    outputs: tuple[str, ...] = ()
    vdd: str | None = None


@dataclass(frozen=True)
class Circuit:
    mosfets: tuple[Mosfet, ...] = ()
    sources: tuple[IndependentSource, ...] = ()
    capacitors: tuple[Capacitor, ...] = ()
    ports: Ports = field(default_factory=Ports)

    def __post_init__(self):
        names = [d.name for d in self.devices]
        seen = set()
        for n in names:
            key = n.upper()
            if key in seen:
                raise NetlistError(f"duplicate device name {n!r}")
            seen.add(key)
        port_names = list(self.ports.inputs) + list(self.ports.outputs)
        if self.ports.vdd:
            port_names.append(self.ports.vdd)
        if len(set(port_names)) != len(port_names):
            raise NetlistError("port names must be unique")

    @property
    def devices(self) -> tuple:
        return self.mosfets + self.capacitors + self.sources

    @property
    def nets(self) -> tuple[str, ...]:
        """All nets in first-reference order; ground is always present and
        declared ports are nets even when no device touches them."""
        order: dict[str, None] = {GROUND: None}
        for m in self.mosfets:
            for t in m.terminals:
                order.setdefault(t, None)
        for c in self.capacitors:
            order.setdefault(c.positive, None)
            order.setdefault(c.negative, None)
        for s in self.sources:
            order.setdefault(s.positive, None)
            order.setdefault(s.negative, None)
        for p in self.ports.inputs + self.ports.outputs:
            order.setdefault(p, None)
        if self.ports.vdd:
            order.setdefault(self.ports.vdd, None)
        return tuple(order)

    def mosfet(self, name: str) -> Mosfet:
        for m in self.mosfets:
            if m.name == name:
                return m
        raise KeyError(name)

    def with_widths(self, widths: dict[str, float]) -> "Circuit":
        """Copy of the circuit with the given device widths substituted."""
        unknown = set(widths) - {m.name for m in self.mosfets}
        if unknown:
            raise KeyError(f"unknown devices: {sorted(unknown)}")
        new = tuple(
            replace(m, width=widths[m.name]) if m.name in widths else m
            for m in self.mosfets
        )
        return replace(self, mosfets=new)


@dataclass(frozen=True)
class TransistorCount:
    nmos: int
    pmos: int
    total: int


def count_transistors(circuit: Circuit) -> TransistorCount:
    """Count MOSFETs by polarity (the Table-2 style tally)."""
    nmos = sum(1 for m in circuit.mosfets if m.polarity == "NMOS")
    pmos = len(circuit.mosfets) - nmos
    return TransistorCount(nmos=nmos, pmos=pmos, total=len(circuit.mosfets))


def _logical_lines(text: str) -> list[tuple[int, str]]:
    """Join '+' continuations, strip comments; yields (first line no, text)."""
    out: list[tuple[int, str]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split(";", 1)[0].rstrip()
        stripped = line.strip()
        if not stripped or stripped.startswith("*"):
            continue
        if stripped.startswith("+"):
            if not out:
                raise NetlistError("continuation with no previous statement", lineno, 1)
            prev_no, prev = out[-1]
            out[-1] = (prev_no, prev + " " + stripped[1:].strip())
        else:
            out.append((lineno, stripped))
    return out


def _parse_ports(tokens: list[str], lineno: int) -> Ports:
    inputs: tuple[str, ...] = ()
    outputs: tuple[str, ...] = ()
    vdd = None
    for tok in tokens:
        if "=" not in tok:
            raise NetlistError(f"bad .ports clause {tok!r}", lineno)
        key, _, val = tok.partition("=")
        names = tuple(n for n in val.split(",") if n)
        key = key.lower()
        if key == "in":
            inputs = names
        elif key == "out":
            outputs = names
        elif key == "vdd":
            if len(names) != 1:
                raise NetlistError("vdd= takes exactly one net", lineno)
            vdd = names[0]
        else:
            raise NetlistError(f"unknown .ports key {key!r}", lineno)
    return Ports(inputs=inputs, outputs=outputs, vdd=vdd)


def _value_at(tokens: list[str], i: int, lineno: int, what: str) -> float:
    if i >= len(tokens):
        raise NetlistError(f"missing {what}", lineno)
    try:
        return parse_value(tokens[i])
    except ValueError:
        raise NetlistError(f"bad {what} {tokens[i]!r}", lineno, col=i + 1) from None


def parse(text: str) -> Circuit:
    """Parse netlist source into a :class:`Circuit`.

    Device order follows source order.  A net referenced by exactly one
    device terminal triggers a :class:`DanglingNetWarning`; duplicate
    device names and malformed statements raise :class:`NetlistError`.
    """
    mosfets: list[Mosfet] = []
    caps: list[Capacitor] = []
    sources: list[IndependentSource] = []
    ports = Ports()

    for lineno, line in _logical_lines(text):
        tokens = line.split()
        head = tokens[0]
        if head.startswith("."):
            directive = head.lower()
            if directive == ".end":
                break
            if directive == ".ports":
                ports = _parse_ports(tokens[1:], lineno)
                continue
            raise NetlistError(f"unknown directive {head!r}", lineno, 1)

        letter = head[0].upper()
        if letter == "M":
            if len(tokens) != 8:
                raise NetlistError(
                    "mosfet needs: name, 4 nets, polarity, W=, L=", lineno
                )
            polarity = tokens[5].upper()
            if polarity not in ("NMOS", "PMOS"):
                raise NetlistError(f"bad polarity {tokens[5]!r}", lineno, 6)
            w = l = None
            for tok in tokens[6:8]:
                key, _, val = tok.partition("=")
                if key.upper() == "W":
                    w = _value_at([val], 0, lineno, "width")
                elif key.upper() == "L":
                    l = _value_at([val], 0, lineno, "length")
                else:
                    raise NetlistError(f"expected W=/L=, got {tok!r}", lineno)
            if w is None or l is None:
                raise NetlistError("mosfet needs both W= and L=", lineno)
            try:
                mosfets.append(
                    Mosfet(head, polarity, tokens[1], tokens[2], tokens[3],
                           tokens[4], w, l)
                )
            except NetlistError as e:
                raise NetlistError(str(e), lineno) from None
        elif letter == "C":
            if len(tokens) != 4:
                raise NetlistError("capacitor needs: name, 2 nets, value", lineno)
            try:
                caps.append(
                    Capacitor(head, tokens[1], tokens[2],
                              _value_at(tokens, 3, lineno, "capacitance"))
                )
            except NetlistError as e:
                raise NetlistError(str(e), lineno) from None
        elif letter == "V":
            if len(tokens) < 4:
                raise NetlistError("source needs: name, 2 nets, waveform", lineno)
            kind_tok = tokens[3].upper()
            if kind_tok == "DC":
                kind: Dc | Pulse = Dc(_value_at(tokens, 4, lineno, "DC value"))
            elif kind_tok.startswith("PULSE"):
                blob = " ".join(tokens[3:])
                m = re.match(r"(?i)PULSE\s*\((.*)\)\s*$", blob)
                if not m:
                    raise NetlistError("malformed PULSE(...) clause", lineno)
                fields = m.group(1).replace(",", " ").split()
                if len(fields) != 7:
                    raise NetlistError(
                        f"PULSE needs 7 fields, got {len(fields)}", lineno
                    )
                vals = [_value_at(fields, i, lineno, "PULSE field")
                        for i in range(7)]
                try:
                    kind = Pulse(*vals)
                except NetlistError as e:
                    raise NetlistError(str(e), lineno) from None
            else:
                raise NetlistError(f"unknown source kind {tokens[3]!r}", lineno, 4)
            sources.append(IndependentSource(head, tokens[1], tokens[2], kind))
        else:
            raise NetlistError(f"unknown device letter {letter!r}", lineno, 1)

    if not (mosfets or caps or sources):
        raise NetlistError("no devices")

    circuit = Circuit(tuple(mosfets), tuple(sources), tuple(caps), ports)

    refs: dict[str, int] = {}
    for m in mosfets:
        for t in m.terminals:
            refs[t] = refs.get(t, 0) + 1
    for two in list(caps) + list(sources):
        refs[two.positive] = refs.get(two.positive, 0) + 1
        refs[two.negative] = refs.get(two.negative, 0) + 1
    declared = set(ports.inputs) | set(ports.outputs) | {ports.vdd, GROUND}
    for net, n in refs.items():
        if n == 1 and net not in declared:
            warnings.warn(f"net {net!r} is referenced only once", DanglingNetWarning,
                          stacklevel=2)
    return circuit


def serialize(circuit: Circuit) -> str:
    """Render a circuit back to netlist text; ``parse`` of the result is
    structurally equal to the input."""
    lines: list[str] = []
    for m in circuit.mosfets:
        lines.append(
            f"{m.name} {m.drain} {m.gate} {m.source} {m.bulk} {m.polarity} "
            f"W={format_value(m.width)} L={format_value(m.length)}"
        )
    for c in circuit.capacitors:
        lines.append(f"{c.name} {c.positive} {c.negative} {format_value(c.value)}")
    for s in circuit.sources:
        if isinstance(s.kind, Dc):
            wave = f"DC {format_value(s.kind.volts)}"
        else:
            p = s.kind
            fields = " ".join(
                format_value(x)
                for x in (p.v_low, p.v_high, p.delay, p.rise, p.fall, p.width,
                          p.period)
            )
            wave = f"PULSE({fields})"
        lines.append(f"{s.name} {s.positive} {s.negative} {wave}")
    p = circuit.ports
    if p.inputs or p.outputs or p.vdd:
        clauses = []
        if p.inputs:
            clauses.append("in=" + ",".join(p.inputs))
        if p.outputs:
            clauses.append("out=" + ",".join(p.outputs))
        if p.vdd:
            clauses.append(f"vdd={p.vdd}")
        lines.append(".ports " + " ".join(clauses))
    lines.append(".end")
    return "\n".join(lines) + "\n"
