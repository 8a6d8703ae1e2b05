"""Sweep harness: cell x Vdd measurements and Tables 2-5 style reports.

Every cell runs the same stimulus: the three inputs count through all eight
states in binary order, each state held for one period (10 ns at the
default 100 MHz), and the whole lap repeats once more.  Measurements use
the second lap only, so the first acts as warm-up.

Inputs are driven through small vdd-powered inverting buffers (the sources
carry the complemented pattern), which keeps input-stage dissipation on the
supply rail; a bare pass-transistor cell would otherwise draw nearly
nothing from vdd and its power column would be meaningless.  Delay is still
measured pin-to-pin at the cell boundary.

Reports are deterministic: identical configs yield byte-identical CSV.
"""

from __future__ import annotations

import csv
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from itertools import product
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .cells import BUILTIN_CELLS, CellSpec, builtin_cell, cell_from_circuit
from .netlist import (
    GROUND,
    Capacitor,
    Circuit,
    Dc,
    IndependentSource,
    Mosfet,
    Ports,
    Pulse,
    TransistorCount,
    count_transistors,
    parse,
)
from .switchlevel import SwitchParams, operability, truth_table
from .transient import (
    DEFAULT_MODELS,
    DeviceModel,
    ModelSet,
    NoTransition,
    SimOptions,
    Waveform,
    measure_delay,
    measure_power,
    transient,
)

DEFAULT_PERIOD = 1e-8  # 100 MHz
DEFAULT_EDGE = 5e-11
DEFAULT_LOAD = 1e-14  # 10 fF per output
DEFAULT_LAPS = 2
_BUFFER_WP = 4e-6
_BUFFER_WN = 2e-6
_BUFFER_L = 0.18e-6


@dataclass(frozen=True)
class Testbench:
    """A cell wrapped with counting stimulus, input buffers and loads."""

    circuit: Circuit
    spec: CellSpec
    vdd: float
    period: float
    laps: int

    @property
    def lap_time(self) -> float:
        return (2 ** len(self.spec.inputs)) * self.period

    @property
    def tstop(self) -> float:
        return self.laps * self.lap_time

    @property
    def warmup(self) -> float:
        return (self.laps - 1) * self.lap_time

    def sample_times(self) -> list[tuple[tuple[int, ...], float]]:
        """(input bits, time) pairs sampling each state at 95% of its last
        period on the measurement lap."""
        n = len(self.spec.inputs)
        out = []
        for i in range(2 ** n):
            bits = tuple((i >> (n - 1 - j)) & 1 for j in range(n))
            out.append((bits, self.warmup + (i + 0.95) * self.period))
        return out


def counting_pulse(weight: int, vdd: float, period: float,
                   edge: float = DEFAULT_EDGE, inverted: bool = False) -> Pulse:
    """Square wave for bit ``weight`` of a binary counter: low for 2^w
    periods, high for 2^w, repeating."""
    half = (2 ** weight) * period
    lo, hi = (vdd, 0.0) if inverted else (0.0, vdd)
    return Pulse(v_low=lo, v_high=hi, delay=half, rise=edge, fall=edge,
                 width=half - 2 * edge, period=2 * half)


def build_testbench(
    spec: CellSpec,
    vdd: float,
    period: float = DEFAULT_PERIOD,
    load_cap: float = DEFAULT_LOAD,
    laps: int = DEFAULT_LAPS,
    edge: float = DEFAULT_EDGE,
) -> Testbench:
    if spec.circuit.ports.vdd is None:
        raise ValueError(f"cell {spec.name!r} has no vdd port")
    vdd_net = spec.circuit.ports.vdd
    mosfets = list(spec.circuit.mosfets)
    caps = list(spec.circuit.capacitors)
    sources = list(spec.circuit.sources)

    sources.append(IndependentSource("VDD", vdd_net, GROUND, Dc(vdd)))
    n = len(spec.inputs)
    for j, name in enumerate(spec.inputs):
        stim = f"{name}_stim"
        sources.append(
            IndependentSource(
                f"V{name}", stim, GROUND,
                counting_pulse(n - 1 - j, vdd, period, edge, inverted=True),
            )
        )
        mosfets.append(Mosfet(f"MPbuf_{name}", "PMOS", name, stim, vdd_net,
                              vdd_net, _BUFFER_WP, _BUFFER_L))
        mosfets.append(Mosfet(f"MNbuf_{name}", "NMOS", name, stim, GROUND,
                              GROUND, _BUFFER_WN, _BUFFER_L))
    for out in spec.outputs:
        caps.append(Capacitor(f"CL_{out}", out, GROUND, load_cap))

    circuit = Circuit(
        mosfets=tuple(mosfets),
        sources=tuple(sources),
        capacitors=tuple(caps),
        ports=Ports(inputs=(), outputs=spec.outputs, vdd=vdd_net),
    )
    return Testbench(circuit, spec, vdd, period, laps)


def run_testbench(
    tb: Testbench,
    models: ModelSet | None = None,
    options: SimOptions | None = None,
) -> Waveform:
    """Simulate a testbench over its full lap schedule."""
    base = options or SimOptions()
    opts = replace(base, tstop=tb.tstop)
    nets = list(dict.fromkeys(list(tb.spec.inputs) + list(tb.spec.outputs)))
    return transient(tb.circuit, models or DEFAULT_MODELS, opts,
                     record_nets=nets)


def transient_truth_table(
    spec: CellSpec,
    vdd: float,
    models: ModelSet | None = None,
    options: SimOptions | None = None,
    period: float = DEFAULT_PERIOD,
) -> dict[str, dict[tuple[int, ...], int]]:
    """End-of-period digitized truth table extracted from a transient run."""
    tb = build_testbench(spec, vdd, period=period)
    wave = run_testbench(tb, models, options)
    tables: dict[str, dict[tuple[int, ...], int]] = {o: {} for o in spec.outputs}
    for bits, t in tb.sample_times():
        for out in spec.outputs:
            tables[out][bits] = wave.digitize_at(out, t, vdd)
    return tables


@dataclass(frozen=True)
class MeasurementReport:
    """One cell at one supply: the Tables 2-5 analog of a single row."""

    cell: str
    vdd: float
    counts: TransistorCount
    operable: bool
    operable_reason: str
    delay: float | None  # seconds; None when distorted/failed
    power: float | None  # watts
    pdp: float | None  # joules; None whenever delay is
    notes: tuple[str, ...] = ()


def _measure_one(
    spec: CellSpec,
    vdd: float,
    models: ModelSet,
    options: SimOptions | None,
    period: float,
    load_cap: float,
    laps: int,
) -> MeasurementReport:
    counts = count_transistors(spec.circuit)
    params = SwitchParams(vdd=vdd, vtn=models.nmos.vt0,
                          vtp_abs=abs(models.pmos.vt0))
    verdict = operability(spec, params)
    notes: list[str] = []
    delay = power = pdp_j = None
    try:
        tb = build_testbench(spec, vdd, period=period, load_cap=load_cap,
                             laps=laps)
        wave = run_testbench(tb, models, options)
        power = measure_power(wave, vdd, t_start=tb.warmup, t_stop=tb.tstop)
        delays = []
        for out in spec.outputs:
            try:
                delays.append(
                    measure_delay(wave, list(spec.inputs), out, vdd,
                                  t_start=tb.warmup)
                )
            except NoTransition as e:
                notes.append(f"distorted: {e}")
        if delays and not notes:
            delay = max(delays)
            pdp_j = delay * power
        if spec.golden:
            mismatches = []
            for bits, t in tb.sample_times():
                for out in spec.outputs:
                    want = spec.golden[out](*bits)
                    got = wave.digitize_at(out, t, vdd)
                    if got != want:
                        mismatches.append((out, bits))
            if mismatches:
                notes.append(f"transient table mismatch at {mismatches[:4]}")
    except Exception as e:  # simulation failures never abort the suite
        notes.append(f"simulation failed: {type(e).__name__}: {e}")
        power = None
    return MeasurementReport(
        cell=spec.name,
        vdd=vdd,
        counts=counts,
        operable=verdict.operable,
        operable_reason=verdict.reason,
        delay=delay,
        power=power,
        pdp=pdp_j,
        notes=tuple(notes),
    )


def _measure_star(args) -> MeasurementReport:
    return _measure_one(*args)


def run_suite(
    cells: list[CellSpec],
    vdds: list[float],
    models: ModelSet | None = None,
    options: SimOptions | None = None,
    period: float = DEFAULT_PERIOD,
    load_cap: float = DEFAULT_LOAD,
    laps: int = DEFAULT_LAPS,
    jobs: int = 1,
) -> list[MeasurementReport]:
    """One report per (cell, vdd) in deterministic order.

    Failures are captured in the report notes; distorted cells are
    reported, never dropped.
    """
    if not cells or not vdds:
        raise ValueError("need at least one cell and one vdd")
    models = models or DEFAULT_MODELS
    work = [(spec, vdd, models, options, period, load_cap, laps)
            for spec, vdd in product(cells, vdds)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_measure_star, work))
    return [_measure_star(w) for w in work]


# -- unit-aware rendering -------------------------------------------------


def _format_mantissa(v: float) -> str:
    """Three significant figures, paper style: '21.0', '0.020', '88.4'."""
    if v == 0:
        return "0.0"
    exp = math.floor(math.log10(abs(v)))
    ndig = 2 - exp
    q = round(v, ndig)
    if q != 0:
        exp = math.floor(math.log10(abs(q)))
        ndig = 2 - exp
    s = f"{q:.{max(ndig, 0)}f}"
    if "." in s:
        s = s.rstrip("0").rstrip(".")
    min_dec = 1 if abs(q) >= 1 else 1 - exp
    if "." not in s:
        s += "." + "0" * min_dec
    else:
        dec = len(s) - s.index(".") - 1
        if dec < min_dec:
            s += "0" * (min_dec - dec)
    return s


def format_delay(seconds: float) -> str:
    return _format_mantissa(seconds / 1e-12) + " ps"


def format_power(watts: float) -> str:
    if abs(watts) >= 1e-6:
        return _format_mantissa(watts / 1e-6) + " uW"
    if abs(watts) >= 1e-9:
        return _format_mantissa(watts / 1e-9) + " nW"
    return _format_mantissa(watts / 1e-12) + " pW"


def format_pdp(joules: float) -> str:
    # the paper tabulates femtojoules and falls through to zeptojoules
    if abs(joules) >= 1e-18:
        return _format_mantissa(joules / 1e-15) + " fJ"
    return _format_mantissa(joules / 1e-21) + " zJ"


def parse_quantity(text: str) -> float:
    """Inverse of the format_* helpers (used by the lossless-render check)."""
    value, unit = text.split()
    scale = {"ps": 1e-12, "uW": 1e-6, "nW": 1e-9, "pW": 1e-12,
             "fJ": 1e-15, "zJ": 1e-21}[unit]
    return float(value) * scale


def _vdd_label(vdd: float) -> str:
    return f"{vdd:g} V"


def _md_table(title: str, header: list[str], rows: list[list[str]]) -> str:
    widths = [max(len(h), *(len(r[i]) for r in rows)) if rows else len(h)
              for i, h in enumerate(header)]
    def line(cells):
        return "| " + " | ".join(c.ljust(w) for c, w in zip(cells, widths)) + " |"
    out = [f"### {title}", "", line(header),
           "|" + "|".join("-" * (w + 2) for w in widths) + "|"]
    out.extend(line(r) for r in rows)
    return "\n".join(out) + "\n"


def render(reports: list[MeasurementReport], fmt: str = "md") -> str:
    """Render reports as markdown tables, CSV or JSON.

    Markdown mirrors the paper's layout: one table per metric with cells as
    rows and supplies as columns, units auto-scaled per metric.
    """
    if fmt == "csv":
        return _render_csv(reports)
    if fmt == "json":
        return _render_json(reports)
    if fmt != "md":
        raise ValueError(f"unknown format {fmt!r}")

    cells = list(dict.fromkeys(r.cell for r in reports))
    vdds = list(dict.fromkeys(r.vdd for r in reports))
    by_key = {(r.cell, r.vdd): r for r in reports}

    def metric_rows(getter, formatter):
        rows = []
        for cell in cells:
            row = [cell]
            for vdd in vdds:
                r = by_key.get((cell, vdd))
                val = getter(r) if r else None
                row.append(formatter(val) if val is not None else "distorted")
            rows.append(row)
        return rows

    parts = []
    count_rows = []
    for cell in cells:
        r = next(x for x in reports if x.cell == cell)
        count_rows.append([cell, str(r.counts.nmos), str(r.counts.pmos),
                           str(r.counts.total)])
    parts.append(_md_table("Transistor counts", ["cell", "NMOS", "PMOS", "total"],
                           count_rows))
    vdd_headers = ["cell"] + [_vdd_label(v) for v in vdds]
    parts.append(_md_table("Delay", vdd_headers,
                           metric_rows(lambda r: r.delay, format_delay)))
    parts.append(_md_table("Average power", vdd_headers,
                           metric_rows(lambda r: r.power, format_power)))
    parts.append(_md_table("Power-delay product", vdd_headers,
                           metric_rows(lambda r: r.pdp, format_pdp)))

    op_rows = [[r.cell, _vdd_label(r.vdd), "yes" if r.operable else "no",
                r.operable_reason, "; ".join(r.notes)] for r in reports]
    parts.append(_md_table("Operability",
                           ["cell", "vdd", "operable", "reason", "notes"],
                           op_rows))
    return "\n".join(parts)


def _render_csv(reports: list[MeasurementReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["cell", "vdd", "nmos", "pmos", "total", "operable",
                "delay_s", "power_w", "pdp_j", "notes"])
    for r in reports:
        w.writerow([
            r.cell, repr(r.vdd), r.counts.nmos, r.counts.pmos, r.counts.total,
            int(r.operable),
            repr(r.delay) if r.delay is not None else "",
            repr(r.power) if r.power is not None else "",
            repr(r.pdp) if r.pdp is not None else "",
            "; ".join(r.notes),
        ])
    return buf.getvalue()


def _render_json(reports: list[MeasurementReport]) -> str:
    out = []
    for r in reports:
        out.append({
            "cell": r.cell,
            "vdd": r.vdd,
            "counts": {"nmos": r.counts.nmos, "pmos": r.counts.pmos,
                       "total": r.counts.total},
            "operable": r.operable,
            "operable_reason": r.operable_reason,
            "delay_s": r.delay,
            "power_w": r.power,
            "pdp_j": r.pdp,
            "notes": list(r.notes),
        })
    return json.dumps(out, indent=2) + "\n"


# -- qualitative trend checks ---------------------------------------------


@dataclass(frozen=True)
class TrendResult:
    claim: str
    passed: bool


def trend_check(reports: list[MeasurementReport],
                reference: str = "cmos28") -> list[TrendResult]:
    """Qualitative claims from the paper's comparison discussion.

    Per cell: delay rises and power falls as the supply drops; per supply:
    no low-count cell is slower than the reference.  Pairs with missing
    (distorted) measurements are skipped; fewer than two supplies yields no
    claims.
    """
    cells = list(dict.fromkeys(r.cell for r in reports))
    vdds = sorted(dict.fromkeys(r.vdd for r in reports), reverse=True)
    by_key = {(r.cell, r.vdd): r for r in reports}
    results: list[TrendResult] = []
    if len(vdds) < 2:
        return results

    for cell in cells:
        for hi, lo in zip(vdds, vdds[1:]):
            a, b = by_key.get((cell, hi)), by_key.get((cell, lo))
            if not (a and b):
                continue
            if a.delay is not None and b.delay is not None:
                results.append(TrendResult(
                    f"{cell}: delay({_vdd_label(lo)}) > delay({_vdd_label(hi)})",
                    b.delay > a.delay,
                ))
            if a.power is not None and b.power is not None:
                results.append(TrendResult(
                    f"{cell}: power({_vdd_label(lo)}) < power({_vdd_label(hi)})",
                    b.power < a.power,
                ))
    if reference in cells:
        for cell in cells:
            if cell == reference:
                continue
            for vdd in vdds:
                a = by_key.get((cell, vdd))
                ref = by_key.get((reference, vdd))
                if a and ref and a.delay is not None and ref.delay is not None:
                    results.append(TrendResult(
                        f"{cell} not slower than {reference} at {_vdd_label(vdd)}",
                        a.delay <= ref.delay,
                    ))
    return results


# -- suite configuration ---------------------------------------------------


@dataclass
class SuiteConfig:
    cells: list[CellSpec]
    vdds: list[float]
    models: ModelSet
    options: SimOptions | None
    period: float = DEFAULT_PERIOD
    load_cap: float = DEFAULT_LOAD
    laps: int = DEFAULT_LAPS


def _model_from_table(base: DeviceModel, table: dict) -> DeviceModel:
    fields = {}
    for key, value in table.items():
        name = "lambda_" if key in ("lambda", "lambda_") else key
        if name not in ("vt0", "kprime", "lambda_", "cox_area", "cj_term"):
            raise ValueError(f"unknown model parameter {key!r}")
        fields[name] = float(value)
    return replace(base, **fields)


def load_suite_config(text: str, base_dir: str | Path = ".") -> SuiteConfig:
    """Parse a TOML suite description.

    ``cells`` entries are built-in cell names or netlist file paths
    (relative to ``base_dir``); ``vdds`` is a list of supplies.  Optional
    tables ``[models.nmos]``/``[models.pmos]`` override device parameters
    and ``[options]`` overrides solver settings.
    """
    data = tomllib.loads(text)
    base = Path(base_dir)

    names = data.get("cells", [])
    if not names:
        raise ValueError("config must list at least one cell")
    cells = []
    for name in names:
        if name in BUILTIN_CELLS:
            cells.append(builtin_cell(name))
        else:
            path = base / name
            if not path.exists():
                raise FileNotFoundError(
                    f"cell {name!r} is neither a built-in nor a netlist file"
                )
            cells.append(cell_from_circuit(parse(path.read_text()), path.stem))

    vdds = [float(v) for v in data.get("vdds", [])]
    if not vdds:
        raise ValueError("config must list at least one vdd")

    models = DEFAULT_MODELS
    mtab = data.get("models", {})
    if mtab:
        models = ModelSet(
            nmos=_model_from_table(DEFAULT_MODELS.nmos, mtab.get("nmos", {})),
            pmos=_model_from_table(DEFAULT_MODELS.pmos, mtab.get("pmos", {})),
        )

    options = None
    otab = data.get("options", {})
    if otab:
        known = {"tstep", "tstop", "newton_tol_v", "newton_tol_i",
                 "max_newton_iters", "gmin"}
        bad = set(otab) - known
        if bad:
            raise ValueError(f"unknown option keys {sorted(bad)}")
        kwargs = {k: (int(v) if k == "max_newton_iters" else float(v))
                  for k, v in otab.items()}
        options = replace(SimOptions(), **kwargs)

    return SuiteConfig(
        cells=cells,
        vdds=vdds,
        models=models,
        options=options,
        period=float(data.get("period", DEFAULT_PERIOD)),
        load_cap=float(data.get("load_cap", DEFAULT_LOAD)),
        laps=int(data.get("laps", DEFAULT_LAPS)),
    )
