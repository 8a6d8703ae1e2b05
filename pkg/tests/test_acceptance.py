"""Acceptance suite: one test per release criterion, each printing a
PASS/FAIL line.  Run with ``pytest tests/test_acceptance.py -v -s``.

Absolute delay/power/PDP values from the original tables are out of reach
without the proprietary process kit, so acceptance is structural facts
(transistor counts, truth tables, logic identities) plus property checks
(solver oracles, qualitative supply-scaling trends, optimizer contracts).
"""

import functools
from itertools import product

import numpy as np
import pytest

from cellforge.bench import load_suite_config, render, run_suite, transient_truth_table
from cellforge.cells import (
    BUILTIN_CELLS,
    builtin_cell,
    golden_full_adder,
    proposed_gdi_adder,
    proposed_ptl_gdi_adder,
)
from cellforge.netlist import Circuit, Mosfet, Ports, count_transistors, parse
from cellforge.sizing import SizingProblem, optimize
from cellforge.switchlevel import SwitchParams, evaluate, operability, truth_table
from cellforge.transient import (
    SimOptions,
    dc_operating_point,
    device_conductances,
    device_current,
    measure_delay,
    measure_power,
    transient,
)
from cellforge.transient.model import DEFAULT_MODELS, DeviceModel, ModelSet


def criterion(name):
    def deco(fn):
        @functools.wraps(fn)
        def wrapper(*args, **kwargs):
            try:
                fn(*args, **kwargs)
            except BaseException:
                print(f"\n[ACCEPTANCE] {name}: FAIL")
                raise
            print(f"\n[ACCEPTANCE] {name}: PASS")
        return wrapper
    return deco


@criterion("transistor counts: both proposed adders are 10T with 5 NMOS")
def test_transistor_count_reproduction():
    for factory in (proposed_gdi_adder, proposed_ptl_gdi_adder):
        tc = count_transistors(factory().circuit)
        assert tc.total == 10
        assert tc.nmos == 5
        assert tc.pmos == 5


@criterion("GDI cell truth tables: F1, F2, OR, AND, MUX rows all match")
def test_gdi_function_table_reproduction():
    expected = {
        "gdi-f1": lambda a, b: (1 - a) & b,
        "gdi-f2": lambda a, b: (1 - a) | b,
        "gdi-or": lambda a, b: a | b,
        "gdi-and": lambda a, b: a & b,
        "gdi-mux": lambda a, b, c: ((1 - a) & b) | (a & c),
    }
    params = SwitchParams(vdd=1.8, vtn=0.5, vtp_abs=0.5)
    for name, fn in expected.items():
        spec = builtin_cell(name)
        table = truth_table(spec, params)
        got = table.function("out")
        assert got is not None, name
        for bits in product((0, 1), repeat=len(spec.inputs)):
            assert got(*bits) == fn(*bits), (name, bits)


@criterion("golden-adder equivalence: switch-level and digitized transient "
            "tables match on all 8 rows at 1.8 V and 3.0 V")
def test_golden_adder_equivalence():
    options = SimOptions(tstep=2.5e-11)
    for factory in (proposed_gdi_adder, proposed_ptl_gdi_adder):
        spec = factory()
        for vdd in (1.8, 3.0):
            params = SwitchParams(vdd=vdd, vtn=0.5, vtp_abs=0.5)
            ok, why = truth_table(spec, params).matches(spec.golden)
            assert ok, (spec.name, vdd, why)
            tables = transient_truth_table(spec, vdd, DEFAULT_MODELS, options)
            for out in spec.outputs:
                for bits in product((0, 1), repeat=3):
                    want = golden_full_adder(*bits)
                    expect = want.sum if out == "sum" else want.carry
                    assert tables[out][bits] == expect, (spec.name, vdd, out,
                                                         bits)


@criterion("adder equations: H'A + H*Cin is the majority and H xor Cin the "
            "parity on all 8 rows")
def test_equation_identities():
    for a, b, c in product((0, 1), repeat=3):
        h = a ^ b
        carry = ((1 - h) & a) | (h & c)
        majority = 1 if a + b + c >= 2 else 0
        assert carry == majority
        assert h ^ c == (a + b + c) % 2
        got = golden_full_adder(a, b, c)
        assert (got.sum, got.carry) == ((a + b + c) % 2, majority)


def _nmos_chain(k):
    mosfets = []
    prev = "in"
    for i in range(1, k + 1):
        mosfets.append(
            Mosfet(f"M{i}", "NMOS", f"n{i}", prev, "vdd", "0", 2e-6, 0.18e-6))
        prev = f"n{i}"
    return Circuit(mosfets=tuple(mosfets),
                   ports=Ports(inputs=("in",), outputs=(prev,), vdd="vdd"))


@criterion("threshold-drop law: one-pass bound Vdd - Vtn, k-stage cascades "
            "drop k thresholds for k <= 3")
def test_threshold_drop_law():
    p18 = SwitchParams(vdd=1.8, vtn=0.5, vtp_abs=0.5)
    states = evaluate(_nmos_chain(1), {"in": 1}, p18)
    assert states["n1"].vmax == pytest.approx(1.8 - 0.5, abs=1e-9)
    p30 = SwitchParams(vdd=3.0, vtn=0.5, vtp_abs=0.5)
    for k in (1, 2, 3):
        states = evaluate(_nmos_chain(k), {"in": 1}, p30)
        assert states[f"n{k}"].vmax == pytest.approx(3.0 - k * 0.5, abs=1e-9)


@criterion("2*Vt operability: every pass-transistor cell inoperable at "
            "0.8 V, every cell operable at 1.8 V")
def test_supply_scaling_operability():
    p08 = SwitchParams(vdd=0.8, vtn=0.5, vtp_abs=0.5)
    p18 = SwitchParams(vdd=1.8, vtn=0.5, vtp_abs=0.5)
    pass_cells = [n for n in BUILTIN_CELLS if n != "cmos28"]
    for name in pass_cells:
        verdict = operability(builtin_cell(name), p08)
        assert not verdict.operable, name
        assert "vdd < 2*Vt" in verdict.reason, name
    for name in BUILTIN_CELLS:
        verdict = operability(builtin_cell(name), p18)
        assert verdict.operable, (name, verdict.reason)


@criterion("solver oracles: RC analytic step response, finite-difference "
            "Jacobians, monotone VTC, f*C*Vdd^2 dynamic power")
def test_solver_oracles():
    # RC step response: 50% crossing at 0.693 tau within 2%
    kp = 1.0 / (999.5 * 1e4)
    rc_models = ModelSet(nmos=DeviceModel(vt0=0.5, kprime=kp),
                         pmos=DeviceModel(vt0=-0.5, kprime=60e-6))
    rc = parse(
        "M1 in big out 0 NMOS W=2u L=2u\n"
        "C1 out 0 10f\n"
        "Vg big 0 DC 1000\n"
        "Vin in 0 PULSE(0 1.8 1n 1p 1p 200n 500n)\n"
        ".ports in=in out=out vdd=big\n"
    )
    wave = transient(rc, rc_models, SimOptions(tstep=1e-12, tstop=3e-9))
    delay = measure_delay(wave, "in", "out", 1.8)
    assert delay == pytest.approx(0.693 * 1e-10, rel=0.02)

    # analytic conductances vs central differences: 1e-6 relative at 100
    # random interior points per region, both polarities
    rng = np.random.default_rng(8035)
    h = 1e-6
    for polarity in ("NMOS", "PMOS"):
        model = DEFAULT_MODELS.for_polarity(polarity)
        vt = abs(model.vt0)
        for region in ("cutoff", "triode", "saturation"):
            for _ in range(100):
                if region == "cutoff":
                    vgs = rng.uniform(-1.0, vt - 0.05)
                    vds = rng.uniform(0.05, 2.0)
                elif region == "triode":
                    vgs = rng.uniform(vt + 0.2, vt + 2.0)
                    vds = rng.uniform(0.02, vgs - vt - 0.1)
                else:
                    vgs = rng.uniform(vt + 0.1, vt + 2.0)
                    vds = rng.uniform(vgs - vt + 0.1, vgs - vt + 2.0)
                if polarity == "PMOS":
                    vgs, vds = -vgs, -vds
                gm, gds = device_conductances(model, 4e-6, 0.18e-6, vgs, vds)
                fd_gm = (device_current(model, 4e-6, 0.18e-6, vgs + h, vds)
                         - device_current(model, 4e-6, 0.18e-6, vgs - h, vds)
                         ) / (2 * h)
                fd_gds = (device_current(model, 4e-6, 0.18e-6, vgs, vds + h)
                          - device_current(model, 4e-6, 0.18e-6, vgs, vds - h)
                          ) / (2 * h)
                assert abs(gm - fd_gm) <= 1e-6 * max(abs(gm), abs(fd_gm), 1e-12)
                assert abs(gds - fd_gds) <= 1e-6 * max(abs(gds), abs(fd_gds),
                                                       1e-12)

    # inverter VTC swept 0 -> vdd in 50 mV steps is monotone non-increasing
    inv = parse(
        "MP out in vdd vdd PMOS W=4u L=0.18u\n"
        "MN out in 0 0 NMOS W=2u L=0.18u\n"
        "Vdd vdd 0 DC 1.8\n"
        "Vin in 0 DC 0\n"
        ".ports in=in out=out vdd=vdd\n"
    )
    outs = [dc_operating_point(inv, source_values={"Vin": v})["out"]
            for v in np.arange(0.0, 1.8 + 1e-12, 0.05)]
    assert (np.diff(outs) <= 1e-9).all()

    # toggling inverter: average power within 15% of f C Vdd^2
    clean = ModelSet(nmos=DeviceModel(vt0=0.5, kprime=170e-6, lambda_=0.05),
                     pmos=DeviceModel(vt0=-0.5, kprime=60e-6, lambda_=0.05))
    tog = parse(
        "MP out in vdd vdd PMOS W=4u L=0.18u\n"
        "MN out in 0 0 NMOS W=2u L=0.18u\n"
        "CL out 0 10f\n"
        "Vdd vdd 0 DC 1.8\n"
        "Vin in 0 PULSE(0 1.8 1n 50p 50p 4.9n 10n)\n"
        ".ports in=in out=out vdd=vdd\n"
    )
    wave = transient(tog, clean, SimOptions(tstep=1e-11, tstop=3e-8))
    power = measure_power(wave, 1.8, t_start=1e-8, t_stop=3e-8)
    assert power == pytest.approx(1e8 * 1e-14 * 1.8 ** 2, rel=0.15)


@criterion("supply-scaling delay trend: every operable cell slows down "
            "from 3.0 V to 1.8 V")
def test_delay_trend_3v_to_1v8():
    cells = [builtin_cell(n)
             for n in ("proposed-gdi", "proposed-ptl-gdi", "cmos28")]
    reports = run_suite(cells, [3.0, 1.8], options=SimOptions(tstep=2.5e-11))
    by_key = {(r.cell, r.vdd): r for r in reports}
    for spec in cells:
        hi = by_key[(spec.name, 3.0)]
        lo = by_key[(spec.name, 1.8)]
        assert hi.operable and lo.operable, spec.name
        assert hi.delay is not None and lo.delay is not None, spec.name
        assert lo.delay > hi.delay, (spec.name, hi.delay, lo.delay)


@criterion("sizing contract: monotone history and final PDP <= initial on "
            "the 10T GDI adder at 1.8 V with budget 200")
def test_sizing_contract():
    cell = proposed_gdi_adder()
    problem = SizingProblem(
        cell,
        tunable=tuple(m.name for m in cell.circuit.mosfets),
        vdd=1.8,
        objective="pdp",
    )
    result = optimize(problem, options=SimOptions(tstep=5e-11), budget=200)
    objectives = [f for _, f in result.history]
    assert all(b <= a for a, b in zip(objectives, objectives[1:]))
    assert result.objective <= objectives[0]
    assert result.evaluations <= 200
    print(f"\n  initial PDP {objectives[0]:.3e} J -> final "
          f"{result.objective:.3e} J in {result.evaluations} evaluations")


@criterion("determinism: identical bench configs render byte-identical CSV")
def test_bench_determinism():
    config = (
        'cells = ["gdi-and"]\n'
        'vdds = [3.0, 1.8]\n'
        '[options]\n'
        'tstep = 5e-11\n'
    )
    outputs = []
    for _ in range(2):
        cfg = load_suite_config(config)
        reports = run_suite(cfg.cells, cfg.vdds, cfg.models, cfg.options,
                            period=cfg.period, load_cap=cfg.load_cap,
                            laps=cfg.laps)
        outputs.append(render(reports, "csv").encode())
    assert outputs[0] == outputs[1]
