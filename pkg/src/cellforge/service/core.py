"""Service handlers: schema-typed entry points shared by HTTP and the CLI."""

from __future__ import annotations

import warnings
from dataclasses import replace
from pathlib import Path

from .. import __version__
from ..bench import load_suite_config, render, run_suite, trend_check
from ..cells import BUILTIN_CELLS, builtin_cell, cell_from_circuit
from ..netlist import (
    GROUND,
    Dc,
    IndependentSource,
    count_transistors,
    parse,
    serialize,
)
from ..sizing import SizingProblem, optimize
from ..switchlevel import SwitchParams, operability, truth_table
from ..transient import DEFAULT_MODELS, SimOptions, transient
from . import schemas as s


def list_cells() -> s.CellListResponse:
    return s.CellListResponse(cells=sorted(BUILTIN_CELLS))


def health() -> s.HealthResponse:
    return s.HealthResponse(status="ok", version=__version__)


def emit(req: s.EmitRequest) -> s.EmitResponse:
    spec = builtin_cell(req.cell)
    tc = count_transistors(spec.circuit)
    return s.EmitResponse(
        name=spec.name,
        netlist=serialize(spec.circuit),
        counts=s.CountsModel(nmos=tc.nmos, pmos=tc.pmos, total=tc.total),
    )


def _state_model(state) -> s.SignalStateModel:
    return s.SignalStateModel(
        logic=state.logic.value,
        vmax=state.vmax,
        vmin=state.vmin,
        strength=state.strength.value if state.strength else None,
    )


def _check_spec(spec, params: s.SwitchParamsModel) -> s.CheckResponse:
    p = SwitchParams(vdd=params.vdd, vtn=params.vtn, vtp_abs=params.vtp_abs)
    table = truth_table(spec, p)
    verdict = operability(spec, p)
    matches = detail = None
    if spec.golden:
        matches, detail = table.matches(spec.golden)
    return s.CheckResponse(
        cell=spec.name,
        input_ports=list(table.input_ports),
        output_ports=list(table.output_ports),
        rows=[
            s.TruthRowModel(
                inputs=list(r.inputs),
                outputs={o: _state_model(st) for o, st in r.outputs.items()},
                valid=r.valid,
            )
            for r in table.rows
        ],
        degradations=[
            s.DegradationModel(inputs=list(d.inputs), port=d.port,
                               kind=d.kind, level=d.level)
            for d in table.degradations
        ],
        diagnostics=list(table.diagnostics),
        golden_available=bool(spec.golden),
        matches_golden=matches,
        mismatch_detail=detail,
        operable=verdict.operable,
        reason=verdict.reason,
    )


def check(req: s.CheckRequest) -> s.CheckResponse:
    circuit = parse(req.netlist)
    spec = cell_from_circuit(circuit, "netlist")
    return _check_spec(spec, req.params)


def truthtable(req: s.TruthTableRequest) -> s.CheckResponse:
    return _check_spec(builtin_cell(req.cell), req.params)


def simulate(req: s.SimRequest) -> s.SimResponse:
    circuit = parse(req.netlist)
    if req.vdd is not None:
        vdd_net = circuit.ports.vdd
        if vdd_net is None:
            raise ValueError("--vdd given but the netlist has no vdd port")
        if not any(src.positive == vdd_net for src in circuit.sources):
            supply = IndependentSource("VDDAUTO", vdd_net, GROUND, Dc(req.vdd))
            circuit = replace(circuit, sources=circuit.sources + (supply,))
    models = req.models.to_modelset() if req.models else DEFAULT_MODELS
    options = SimOptions(tstep=req.tstep, tstop=req.tstop)
    wave = transient(circuit, models, options, record_nets=req.nets)
    return s.SimResponse(
        times=[float(t) for t in wave.times],
        nodes={n: [float(x) for x in v] for n, v in wave.node_volts.items()},
        supply_current=[float(x) for x in wave.supply_current],
        csv=wave.to_csv() if req.include_csv else None,
    )


def bench(req: s.BenchRequest, base_dir: str | Path = ".") -> s.BenchResponse:
    cfg = load_suite_config(req.config, base_dir=base_dir)
    reports = run_suite(
        cfg.cells, cfg.vdds, cfg.models, cfg.options,
        period=cfg.period, load_cap=cfg.load_cap, laps=cfg.laps,
        jobs=req.jobs,
    )
    trends = trend_check(reports)
    return s.BenchResponse(
        reports=[
            s.BenchReportModel(
                cell=r.cell,
                vdd=r.vdd,
                counts=s.CountsModel(nmos=r.counts.nmos, pmos=r.counts.pmos,
                                     total=r.counts.total),
                operable=r.operable,
                operable_reason=r.operable_reason,
                delay_s=r.delay,
                power_w=r.power,
                pdp_j=r.pdp,
                notes=list(r.notes),
            )
            for r in reports
        ],
        trends=[s.TrendModel(claim=t.claim, passed=t.passed) for t in trends],
        rendered=render(reports, req.format),
        format=req.format,
    )


def size(req: s.SizeRequest) -> s.SizeResponse:
    circuit = parse(req.netlist)
    spec = cell_from_circuit(circuit, "netlist")
    tunable = tuple(req.tunable) if req.tunable else tuple(
        m.name for m in circuit.mosfets
    )
    kwargs = dict(
        cell=spec,
        tunable=tunable,
        w_max=req.w_max,
        vdd=req.vdd,
        objective=req.objective,
        groups=tuple(tuple(p) for p in req.pairs),
    )
    if req.w_min is not None:
        kwargs["w_min"] = req.w_min
    problem = SizingProblem(**kwargs)
    models = req.models.to_modelset() if req.models else DEFAULT_MODELS
    result = optimize(problem, models, SimOptions(tstep=req.tstep),
                      budget=req.budget)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        sized = serialize(circuit.with_widths(result.widths))
    return s.SizeResponse(
        widths=result.widths,
        objective=req.objective,
        objective_value=result.objective,
        evaluations=result.evaluations,
        history=[s.HistoryEntryModel(widths=w, objective=f)
                 for w, f in result.history],
        events=result.events,
        netlist=sized,
    )
