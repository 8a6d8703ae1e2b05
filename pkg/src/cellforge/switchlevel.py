"""Switch-level evaluation of MOSFET networks with threshold-drop tracking.

Devices are treated as imperfect switches over a lattice of signal states.
A state is a logic class (Zero / One / HiZ / Conflict) plus a worst-case
voltage bound: for a One, ``vmax`` is the highest level the node can reach;
for a Zero, ``vmin`` is the lowest.  Propagation applies the pass-transistor
rules:

* an ON NMOS passes a One limited to ``min(source-side vmax, Vgate - Vtn)``
  and passes a Zero unattenuated;
* an ON PMOS passes a Zero limited to ``max(source-side vmin, Vgate_low +
  |Vtp|)`` and passes a One unattenuated.

Gates switch on the driving node's bound: an NMOS conducts when its gate is
a One at or above ``vdd/2``; a PMOS conducts when its gate is a Zero below
``vdd/2``.  HiZ gates leave the device off (and are reported), conflicting
gates conservatively conduct at full drive.

Evaluation computes the least fixpoint of these monotone rules; bounds are
quantized to 1 uV so the lattice is finite and termination is guaranteed.
The result is independent of device order.

A node value is marked ``DRIVEN`` only when it arrives at full rail
directly from a supply rail (the restoring case, e.g. an inverter output);
everything routed from signal nodes or attenuated on the way is ``PASSED``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from enum import Enum
from itertools import product

from .cells import CellSpec, TruthFunction
from .netlist import GROUND, Circuit, Dc, Mosfet

_MAX_SWEEPS = 10_000


class Logic(Enum):
    ZERO = "0"
    ONE = "1"
    HIZ = "z"
    CONFLICT = "x"


class Strength(Enum):
    DRIVEN = "driven"
    PASSED = "passed"


def _q(v: float) -> float:
    """Quantize a bound to 1 uV (finite lattice, guarantees termination)."""
    return round(v * 1e6) / 1e6


@dataclass(frozen=True)
class SignalState:
    logic: Logic
    vmax: float | None = None  # achievable high level when ONE
    vmin: float | None = None  # residual low level when ZERO
    strength: Strength | None = None

    @property
    def bit(self) -> int | None:
        if self.logic is Logic.ONE:
            return 1
        if self.logic is Logic.ZERO:
            return 0
        return None

    @property
    def level(self) -> float | None:
        """The meaningful bound for the class (vmax for One, vmin for Zero)."""
        if self.logic is Logic.ONE:
            return self.vmax
        if self.logic is Logic.ZERO:
            return self.vmin
        return None


HIZ = SignalState(Logic.HIZ)
CONFLICT = SignalState(Logic.CONFLICT)


def _one(vmax: float, strength: Strength) -> SignalState:
    return SignalState(Logic.ONE, vmax=_q(vmax), strength=strength)


def _zero(vmin: float, strength: Strength) -> SignalState:
    return SignalState(Logic.ZERO, vmin=_q(vmin), strength=strength)


def _join(a: SignalState, b: SignalState) -> SignalState:
    """Least upper bound of two states (HiZ < One/Zero < Conflict)."""
    if a.logic is Logic.HIZ:
        return b
    if b.logic is Logic.HIZ:
        return a
    if Logic.CONFLICT in (a.logic, b.logic):
        return CONFLICT
    if a.logic is not b.logic:
        return CONFLICT
    if a.logic is Logic.ONE:
        ka = (a.vmax, a.strength is Strength.DRIVEN)
        kb = (b.vmax, b.strength is Strength.DRIVEN)
        return a if ka >= kb else b
    ka = (-a.vmin, a.strength is Strength.DRIVEN)
    kb = (-b.vmin, b.strength is Strength.DRIVEN)
    return a if ka >= kb else b


@dataclass(frozen=True)
class SwitchParams:
    vdd: float
    vtn: float = 0.5
    vtp_abs: float = 0.5

    def __post_init__(self):
        if not self.vdd > 0:
            raise ValueError("vdd must be > 0")
        if not (self.vtn > 0 and self.vtp_abs > 0):
            raise ValueError("thresholds must be > 0")


def _gate_reading(state: SignalState, p: SwitchParams) -> tuple[str, float]:
    """How a device interprets its gate node.

    Returns ("one"|"zero"|"hiz"|"conflict", drive_level).  The drive level
    is the gate bound used by the pass rules (full rail for conflicts).
    """
    half = p.vdd / 2
    if state.logic is Logic.ONE:
        if state.vmax >= half:
            return "one", state.vmax
        return "off", 0.0  # too degraded to switch an NMOS on
    if state.logic is Logic.ZERO:
        if state.vmin < half:
            return "zero", state.vmin
        return "off", 0.0
    if state.logic is Logic.CONFLICT:
        return "conflict", 0.0
    return "hiz", 0.0


def _pass_through(
    dev: Mosfet,
    src_state: SignalState,
    src_net: str,
    gate_kind: str,
    gate_level: float,
    rails: frozenset[str],
    p: SwitchParams,
) -> SignalState | None:
    """Value contributed to the far side of an ON device, or None."""
    if src_state.logic is Logic.HIZ:
        return None
    if src_state.logic is Logic.CONFLICT:
        return CONFLICT
    from_rail = src_net in rails

    if dev.polarity == "NMOS":
        on = gate_kind == "one" or gate_kind == "conflict"
        if not on:
            return None
        vg = p.vdd if gate_kind == "conflict" else gate_level
        if src_state.logic is Logic.ONE:
            vmax = min(src_state.vmax, vg - p.vtn)
            if vmax < 0:
                vmax = 0.0
            return _one(vmax, Strength.PASSED)
        strength = (Strength.DRIVEN
                    if from_rail and src_state.vmin == 0.0 else Strength.PASSED)
        return _zero(src_state.vmin, strength)

    on = gate_kind == "zero" or gate_kind == "conflict"
    if not on:
        return None
    vg_low = 0.0 if gate_kind == "conflict" else gate_level
    if src_state.logic is Logic.ZERO:
        vmin = max(src_state.vmin, vg_low + p.vtp_abs)
        if vmin > p.vdd:
            vmin = p.vdd
        return _zero(vmin, Strength.PASSED)
    strength = (Strength.DRIVEN
                if from_rail and src_state.vmax == p.vdd else Strength.PASSED)
    return _one(src_state.vmax, strength)


def evaluate(
    circuit: Circuit,
    inputs: dict[str, int],
    params: SwitchParams,
) -> dict[str, SignalState]:
    """Least-fixpoint switch-level states for every net of the circuit.

    ``inputs`` assigns a bit to every declared input port; the supply port
    and ground are forced to the rails, and DC sources force their positive
    nets.  HiZ-gated devices and conflicts on output ports are reported via
    warnings.
    """
    states, diags = _evaluate(circuit, inputs, params)
    for msg in diags:
        warnings.warn(msg, stacklevel=2)
    return states


def _evaluate(
    circuit: Circuit,
    inputs: dict[str, int],
    params: SwitchParams,
) -> tuple[dict[str, SignalState], list[str]]:
    ports = circuit.ports
    if ports.vdd is None:
        raise ValueError("circuit has no declared vdd port")
    if set(inputs) != set(ports.inputs):
        raise ValueError(
            f"inputs {sorted(inputs)} do not match ports {sorted(ports.inputs)}"
        )
    vdd = params.vdd
    states: dict[str, SignalState] = {net: HIZ for net in circuit.nets}

    forced: dict[str, SignalState] = {
        GROUND: _zero(0.0, Strength.DRIVEN),
        ports.vdd: _one(vdd, Strength.DRIVEN),
    }
    for name, bit in inputs.items():
        forced[name] = (_one(vdd, Strength.DRIVEN) if bit
                        else _zero(0.0, Strength.DRIVEN))
    for src in circuit.sources:
        if not isinstance(src.kind, Dc):
            continue  # time-varying stimulus has no static meaning here
        if src.positive in forced:
            continue
        v = src.kind.volts
        forced[src.positive] = (_one(min(v, vdd), Strength.DRIVEN)
                                if v >= vdd / 2 else _zero(max(v, 0.0),
                                                           Strength.DRIVEN))
    states.update(forced)
    rails = frozenset(
        {GROUND, ports.vdd}
        | {s.positive for s in circuit.sources if isinstance(s.kind, Dc)}
    )

    for sweep in range(_MAX_SWEEPS):
        changed = False
        for dev in circuit.mosfets:
            gate_kind, gate_level = _gate_reading(states[dev.gate], params)
            if gate_kind in ("hiz", "off"):
                continue
            for src_net, dst_net in ((dev.drain, dev.source),
                                     (dev.source, dev.drain)):
                if dst_net in forced:
                    continue
                contrib = _pass_through(dev, states[src_net], src_net,
                                        gate_kind, gate_level, rails, params)
                if contrib is None:
                    continue
                merged = _join(states[dst_net], contrib)
                if merged != states[dst_net]:
                    states[dst_net] = merged
                    changed = True
        if not changed:
            break
    else:  # pragma: no cover - bounded lattice makes this unreachable
        raise RuntimeError("switch-level evaluation did not converge")

    diags: list[str] = []
    for dev in circuit.mosfets:
        if states[dev.gate].logic is Logic.HIZ:
            diags.append(f"device {dev.name}: gate net {dev.gate!r} is HiZ")
    for out in ports.outputs:
        if states[out].logic is Logic.CONFLICT:
            diags.append(f"output port {out!r} has conflicting drivers")
    return states, diags


@dataclass(frozen=True)
class Degradation:
    inputs: tuple[int, ...]
    port: str
    kind: str  # "weak-one" | "weak-zero"
    level: float


@dataclass(frozen=True)
class RowResult:
    inputs: tuple[int, ...]
    outputs: dict[str, SignalState]
    valid: bool


@dataclass
class TruthTableResult:
    input_ports: tuple[str, ...]
    output_ports: tuple[str, ...]
    rows: list[RowResult]
    degradations: list[Degradation] = field(default_factory=list)
    diagnostics: list[str] = field(default_factory=list)

    def function(self, port: str) -> TruthFunction | None:
        """Extracted truth function for an output, or None if any row is
        HiZ/Conflict there."""
        table = {}
        for row in self.rows:
            bit = row.outputs[port].bit
            if bit is None:
                return None
            table[row.inputs] = bit
        return TruthFunction(len(self.input_ports), table)

    def functions(self) -> dict[str, TruthFunction | None]:
        return {p: self.function(p) for p in self.output_ports}

    def matches(self, golden: dict[str, TruthFunction]) -> tuple[bool, str]:
        for port, fn in golden.items():
            got = self.function(port)
            if got is None:
                return False, f"output {port!r} has invalid rows"
            if got != fn:
                bad = next(bits for bits in fn.table if got.table[bits] != fn.table[bits])
                return False, (f"output {port!r} mismatches golden at "
                               f"inputs {bad}")
        return True, "ok"


def truth_table(spec: CellSpec, params: SwitchParams) -> TruthTableResult:
    """Exhaustive switch-level truth table of a cell plus degradation report.

    Every output whose One bound falls below ``vdd - |Vtp|`` or whose Zero
    bound rises above ``Vtn`` is listed as a weak (static-current risk)
    level.  Rows with HiZ or Conflict outputs are marked invalid.
    """
    ins = spec.inputs
    outs = spec.outputs
    result = TruthTableResult(ins, outs, rows=[])
    for bits in product((0, 1), repeat=len(ins)):
        assignment = dict(zip(ins, bits))
        states, diags = _evaluate(spec.circuit, assignment, params)
        outputs = {o: states[o] for o in outs}
        valid = all(outputs[o].logic in (Logic.ZERO, Logic.ONE) for o in outs)
        result.rows.append(RowResult(bits, outputs, valid))
        result.diagnostics.extend(f"row {bits}: {d}" for d in diags)
        for o in outs:
            st = outputs[o]
            if st.logic is Logic.ONE and st.vmax < params.vdd - params.vtp_abs:
                result.degradations.append(Degradation(bits, o, "weak-one", st.vmax))
            elif st.logic is Logic.ZERO and st.vmin > params.vtn:
                result.degradations.append(Degradation(bits, o, "weak-zero", st.vmin))
    return result


@dataclass(frozen=True)
class OperabilityResult:
    operable: bool
    reason: str


def operability(spec: CellSpec, params: SwitchParams) -> OperabilityResult:
    """Supply-scaling verdict: the cell is operable when the supply is at
    least twice the worst threshold and its switch-level truth table still
    matches the golden functions."""
    vt = max(params.vtn, params.vtp_abs)
    if params.vdd < 2 * vt:
        return OperabilityResult(
            False, f"vdd < 2*Vt ({params.vdd:g} V < {2 * vt:g} V)"
        )
    if not spec.golden:
        table = truth_table(spec, params)
        if any(not row.valid for row in table.rows):
            return OperabilityResult(False, "truth table has invalid rows")
        return OperabilityResult(True, "ok (no golden reference; 2*Vt rule only)")
    ok, reason = truth_table(spec, params).matches(spec.golden)
    return OperabilityResult(ok, reason)
