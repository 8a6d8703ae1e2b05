"""Coordinate-descent transistor sizing against simulated PDP/delay/power.

This mechanizes the iterative redesign-and-resize loop: cycle over the
tunable devices, try scaling each width by 1.25 up and down (clamped to the
bound box), keep whichever candidate improves the simulated objective, and
stop when an entire cycle improves the objective by less than 0.5% or the
evaluation budget runs out.

The objective is a full testbench simulation, so candidate evaluations are
independent and the accepted history is monotone non-increasing by
construction.  Simulation failures at a candidate point discard that
candidate; a distorted cell (no output transition) counts as an infinite
objective.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .bench import (
    DEFAULT_LAPS,
    DEFAULT_LOAD,
    DEFAULT_PERIOD,
    build_testbench,
    run_testbench,
)
from .cells import CellSpec
from .netlist import MIN_FEATURE_WIDTH
from .transient import (
    DEFAULT_MODELS,
    ModelSet,
    NoTransition,
    SimOptions,
    measure_delay,
    measure_power,
)

STEP_FACTOR = 1.25
CYCLE_IMPROVEMENT = 0.005

OBJECTIVES = ("pdp", "delay", "power")


class InfeasibleStart(RuntimeError):
    """The cell does not simulate (or is distorted) at its initial widths."""


@dataclass(frozen=True)
class SizingProblem:
    cell: CellSpec
    tunable: tuple[str, ...]
    w_min: float = MIN_FEATURE_WIDTH
    w_max: float = 4e-5
    vdd: float = 1.8
    objective: str = "pdp"
    groups: tuple[tuple[str, ...], ...] = ()  # widths ganged per group

    def __post_init__(self):
        if not self.tunable:
            raise ValueError("tunable device set is empty")
        if self.w_min < MIN_FEATURE_WIDTH:
            raise ValueError(
                f"w_min {self.w_min:g} below minimum feature width "
                f"{MIN_FEATURE_WIDTH:g}"
            )
        if not self.w_min < self.w_max:
            raise ValueError("need w_min < w_max")
        if self.objective not in OBJECTIVES:
            raise ValueError(f"objective must be one of {OBJECTIVES}")
        known = {m.name for m in self.cell.circuit.mosfets}
        missing = set(self.tunable) - known
        if missing:
            raise ValueError(f"unknown tunable devices {sorted(missing)}")
        grouped = [d for g in self.groups for d in g]
        if len(grouped) != len(set(grouped)):
            raise ValueError("groups must not overlap")
        if set(grouped) - set(self.tunable):
            raise ValueError("groups may only contain tunable devices")

    def cycle_groups(self) -> list[tuple[str, ...]]:
        """Groups in deterministic circuit order; ungrouped devices are
        singleton groups."""
        grouped = {d for g in self.groups for d in g}
        order = [m.name for m in self.cell.circuit.mosfets
                 if m.name in self.tunable]
        out: list[tuple[str, ...]] = []
        seen: set[str] = set()
        for name in order:
            if name in seen:
                continue
            for g in self.groups:
                if name in g:
                    out.append(tuple(g))
                    seen.update(g)
                    break
            else:
                out.append((name,))
                seen.add(name)
        return out


def objective_eval(
    cell: CellSpec,
    widths: dict[str, float],
    vdd: float,
    objective: str,
    models: ModelSet | None = None,
    options: SimOptions | None = None,
    period: float = DEFAULT_PERIOD,
    load_cap: float = DEFAULT_LOAD,
) -> float:
    """Simulated objective at the given widths (seconds, watts or joules).

    A distorted cell maps to ``inf`` so optimizers reject the point; a cell
    is distorted when an output never crosses the 50% line or, for cells
    with golden functions, when the digitized end-of-period table disagrees
    with them (sizing must not "improve" a cell into wrong logic).
    """
    models = models or DEFAULT_MODELS
    spec = CellSpec(cell.name, cell.circuit.with_widths(widths), cell.golden)
    tb = build_testbench(spec, vdd, period=period, load_cap=load_cap,
                         laps=DEFAULT_LAPS)
    wave = run_testbench(tb, models, options)
    for bits, t in tb.sample_times():
        for out, fn in spec.golden.items():
            if wave.digitize_at(out, t, vdd) != fn(*bits):
                return math.inf
    try:
        delay = max(
            measure_delay(wave, list(spec.inputs), out, vdd, t_start=tb.warmup)
            for out in spec.outputs
        )
    except NoTransition:
        return math.inf
    if objective == "delay":
        return delay
    power = measure_power(wave, vdd, t_start=tb.warmup, t_stop=tb.tstop)
    if objective == "power":
        return power
    return delay * power


@dataclass
class OptimizeResult:
    widths: dict[str, float]
    objective: float
    history: list[tuple[dict[str, float], float]]
    evaluations: int
    events: list[str] = field(default_factory=list)


def optimize(
    problem: SizingProblem,
    models: ModelSet | None = None,
    options: SimOptions | None = None,
    budget: int = 100,
    period: float = DEFAULT_PERIOD,
    load_cap: float = DEFAULT_LOAD,
) -> OptimizeResult:
    """Coordinate descent over the tunable widths within the budget.

    The returned history holds every accepted point (initial included) and
    is monotone non-increasing in the objective; rejected and failed
    candidates are listed in ``events``.
    """
    if budget < 1:
        raise ValueError("budget must be >= 1")
    models = models or DEFAULT_MODELS
    circuit = problem.cell.circuit
    widths = {m.name: m.width for m in circuit.mosfets
              if m.name in problem.tunable}

    def clamp(w: float) -> float:
        return min(max(w, problem.w_min), problem.w_max)

    def run(candidate: dict[str, float]) -> float:
        return objective_eval(problem.cell, candidate, problem.vdd,
                              problem.objective, models, options,
                              period, load_cap)

    evaluations = 0
    events: list[str] = []
    try:
        best = run(widths)
    except Exception as e:
        raise InfeasibleStart(f"initial point failed: {e}") from e
    evaluations += 1
    if not math.isfinite(best):
        raise InfeasibleStart("cell is distorted at its initial widths")
    history: list[tuple[dict[str, float], float]] = [(dict(widths), best)]

    groups = problem.cycle_groups()
    while evaluations < budget:
        cycle_start = best
        for group in groups:
            if evaluations >= budget:
                break
            candidates = []
            for factor in (STEP_FACTOR, 1.0 / STEP_FACTOR):
                cand = dict(widths)
                for name in group:
                    cand[name] = clamp(widths[name] * factor)
                if all(abs(cand[n] - widths[n]) < 1e-15 for n in group):
                    continue  # clamped into a no-op
                candidates.append((factor, cand))
            for factor, cand in candidates:
                if evaluations >= budget:
                    break
                try:
                    value = run(cand)
                except Exception as e:
                    evaluations += 1
                    events.append(
                        f"{'/'.join(group)} x{factor:g}: failed ({e})"
                    )
                    continue
                evaluations += 1
                if value < best:
                    best = value
                    widths = cand
                    history.append((dict(widths), best))
                else:
                    events.append(
                        f"{'/'.join(group)} x{factor:g}: rejected "
                        f"({value:.6g} >= {best:.6g})"
                    )
        if cycle_start <= 0:
            break
        if (cycle_start - best) / cycle_start < CYCLE_IMPROVEMENT:
            break

    return OptimizeResult(widths=widths, objective=best, history=history,
                          evaluations=evaluations, events=events)
