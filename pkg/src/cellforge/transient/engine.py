"""Nodal analysis engine: Newton-Raphson DC solve and trapezoidal transient.

Formulation is modified nodal analysis: one KCL row per non-ground net plus
one branch-current unknown and constraint row per independent source.  Every
net carries a ``gmin`` conductance to ground so pass-network nodes with all
channels cut off stay solvable.

Capacitors (explicit ones, plus per-MOSFET gate-area and junction lumps)
integrate with the trapezoidal companion model; the first step and the
first step after any stimulus breakpoint fall back to backward Euler to
avoid trapezoidal ringing across discontinuities.  Timesteps align to
source breakpoints and halve (down to tstep/64) when Newton fails to
converge, recovering toward the nominal step afterwards.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..netlist import GROUND, Circuit
from .model import ModelSet, stamp_currents
from .waveform import Waveform

_IC_CONDUCTANCE = 1.0  # S, pins initial-condition nodes during the t=0 solve


class NonConvergence(RuntimeError):
    def __init__(self, iterations: int, worst_node: str, residual: float):
        self.iterations = iterations
        self.worst_node = worst_node
        self.residual = residual
        super().__init__(
            f"Newton failed after {iterations} iterations "
            f"(worst node {worst_node!r}, residual {residual:.3e} A)"
        )


class SingularMatrix(RuntimeError):
    def __init__(self, nodes: list[str]):
        self.nodes = nodes
        super().__init__(f"singular system matrix (suspect nodes: {nodes})")


@dataclass(frozen=True)
class SimOptions:
    tstep: float = 1e-11
    tstop: float = 1.6e-7
    newton_tol_v: float = 1e-6
    newton_tol_i: float = 1e-9
    max_newton_iters: int = 60
    gmin: float = 1e-12
    ic: dict[str, float] | None = None

    def __post_init__(self):
        if not (0 < self.tstep < self.tstop):
            raise ValueError("need 0 < tstep < tstop")
        if not (self.newton_tol_v > 0 and self.newton_tol_i > 0):
            raise ValueError("tolerances must be > 0")


class _System:
    """Index maps and stamp arrays for one circuit + model set."""

    def __init__(self, circuit: Circuit, models: ModelSet, options: SimOptions):
        self.circuit = circuit
        self.options = options
        nets = [n for n in circuit.nets if n != GROUND]
        self.nets = nets
        self.n = len(nets)
        self.m = len(circuit.sources)
        self.size = self.n + 1 + self.m  # ground slot at index n
        self.gnd = self.n
        self.index = {net: i for i, net in enumerate(nets)}
        self.index[GROUND] = self.gnd

        mos = circuit.mosfets
        self.idx_d = np.array([self.index[m.drain] for m in mos], dtype=int)
        self.idx_g = np.array([self.index[m.gate] for m in mos], dtype=int)
        self.idx_s = np.array([self.index[m.source] for m in mos], dtype=int)
        self.kwl = np.array(
            [models.for_polarity(m.polarity).kprime * m.width / m.length
             for m in mos]
        )
        self.vt_abs = np.array(
            [abs(models.for_polarity(m.polarity).vt0) for m in mos]
        )
        self.lam = np.array(
            [models.for_polarity(m.polarity).lambda_ for m in mos]
        )
        self.sign = np.array(
            [1.0 if m.polarity == "NMOS" else -1.0 for m in mos]
        )

        # capacitors: explicit two-terminal ones, gate-oxide lump per
        # MOSFET gate, junction lump per drain/source terminal
        cap_a: list[int] = []
        cap_b: list[int] = []
        cap_v: list[float] = []
        for c in circuit.capacitors:
            cap_a.append(self.index[c.positive])
            cap_b.append(self.index[c.negative])
            cap_v.append(c.value)
        for m in mos:
            model = models.for_polarity(m.polarity)
            if model.cox_area > 0:
                cap_a.append(self.index[m.gate])
                cap_b.append(self.gnd)
                cap_v.append(model.cox_area * m.width * m.length)
            if model.cj_term > 0:
                for term in (m.drain, m.source):
                    cap_a.append(self.index[term])
                    cap_b.append(self.gnd)
                    cap_v.append(model.cj_term)
        self.cap_a = np.array(cap_a, dtype=int)
        self.cap_b = np.array(cap_b, dtype=int)
        self.cap_c = np.array(cap_v)

        self.src_pos = np.array([self.index[s.positive] for s in circuit.sources],
                                dtype=int)
        self.src_neg = np.array([self.index[s.negative] for s in circuit.sources],
                                dtype=int)

        # IC pins are applied only while solving the t=0 operating point
        self.ic_idx = np.array(
            [self.index[net] for net in (options.ic or {})], dtype=int
        )
        self.ic_val = np.array([v for v in (options.ic or {}).values()])

        # Newton updates on source-pinned nets are exact (linear rows);
        # every other node is clamped per iteration to kill the quadratic
        # overshoot oscillations of the square-law model.
        pinned = set(self.src_pos) | set(self.src_neg)
        self.clamped = np.array(
            [i for i in range(self.n) if i not in pinned], dtype=int
        )

    # -- assembly --------------------------------------------------------

    def assemble(self, x, src_vals, cap_geq, cap_ieq, pin_ics,
                 need_jacobian=True):
        """Residual (and Jacobian) at state ``x``, ground row/col included."""
        n, size = self.n, self.size
        v = x[: n + 1]
        F = np.zeros(size)
        J = np.zeros((size, size)) if need_jacobian else None

        if len(self.idx_d):
            i_ds, d_dd, d_dg, d_ds = stamp_currents(
                self.kwl, self.vt_abs, self.lam, self.sign,
                v[self.idx_d], v[self.idx_g], v[self.idx_s],
            )
            np.add.at(F, self.idx_d, i_ds)
            np.add.at(F, self.idx_s, -i_ds)
            if need_jacobian:
                flat = J.ravel()
                for rows, sgn in ((self.idx_d, 1.0), (self.idx_s, -1.0)):
                    np.add.at(flat, rows * size + self.idx_d, sgn * d_dd)
                    np.add.at(flat, rows * size + self.idx_g, sgn * d_dg)
                    np.add.at(flat, rows * size + self.idx_s, sgn * d_ds)

        if len(self.cap_a) and cap_geq is not None:
            ic = cap_geq * (v[self.cap_a] - v[self.cap_b]) + cap_ieq
            np.add.at(F, self.cap_a, ic)
            np.add.at(F, self.cap_b, -ic)
            if need_jacobian:
                flat = J.ravel()
                np.add.at(flat, self.cap_a * size + self.cap_a, cap_geq)
                np.add.at(flat, self.cap_a * size + self.cap_b, -cap_geq)
                np.add.at(flat, self.cap_b * size + self.cap_a, -cap_geq)
                np.add.at(flat, self.cap_b * size + self.cap_b, cap_geq)

        gmin = self.options.gmin
        F[:n] += gmin * v[:n]

        if pin_ics and len(self.ic_idx):
            F[self.ic_idx] += _IC_CONDUCTANCE * (v[self.ic_idx] - self.ic_val)

        for k in range(self.m):
            row = n + 1 + k
            p, q = self.src_pos[k], self.src_neg[k]
            i_br = x[row]
            F[p] += i_br
            F[q] -= i_br
            F[row] = v[p] - v[q] - src_vals[k]

        if need_jacobian:
            J[np.arange(n), np.arange(n)] += gmin
            if pin_ics and len(self.ic_idx):
                J[self.ic_idx, self.ic_idx] += _IC_CONDUCTANCE
            for k in range(self.m):
                row = n + 1 + k
                p, q = self.src_pos[k], self.src_neg[k]
                J[p, row] += 1.0
                J[q, row] -= 1.0
                J[row, p] += 1.0
                J[row, q] -= 1.0
        return F, J

    def newton(self, x0, src_vals, cap_geq=None, cap_ieq=None, pin_ics=False):
        """Solve the nonlinear system; returns the state vector."""
        opts = self.options
        x = x0.copy()
        keep = [i for i in range(self.size) if i != self.gnd]
        last_dv = np.inf
        for it in range(opts.max_newton_iters):
            F, J = self.assemble(x, src_vals, cap_geq, cap_ieq, pin_ics)
            resid = np.abs(F[: self.n])
            if (it > 0 and last_dv < opts.newton_tol_v
                    and (resid < opts.newton_tol_i).all()):
                return x
            Fr = F[keep]
            Jr = J[np.ix_(keep, keep)]
            try:
                dx = np.linalg.solve(Jr, -Fr)
            except np.linalg.LinAlgError:
                diag = np.abs(np.diag(Jr))
                bad = [self.nets[i] for i in range(self.n) if diag[i] == 0.0]
                raise SingularMatrix(bad or self.nets) from None
            if len(self.clamped):
                dx[self.clamped] = np.clip(dx[self.clamped], -1.0, 1.0)
            x[keep] += dx
            x[self.gnd] = 0.0
            last_dv = float(np.max(np.abs(dx[: self.n]))) if self.n else 0.0
        worst = int(np.argmax(np.abs(F[: self.n]))) if self.n else 0
        raise NonConvergence(opts.max_newton_iters, self.nets[worst],
                             float(np.abs(F[: self.n]).max()))

    # -- helpers ---------------------------------------------------------

    def initial_state(self, src_vals) -> np.ndarray:
        """Zero state with source-driven nets preset to their values."""
        x = np.zeros(self.size)
        for k in range(self.m):
            p, q = self.src_pos[k], self.src_neg[k]
            if q == self.gnd and p != self.gnd:
                x[p] = src_vals[k]
        if self.options.ic:
            for net, val in self.options.ic.items():
                x[self.index[net]] = val
        return x

    def solve_dc(self, src_vals, x0=None, pin_ics=False) -> np.ndarray:
        """DC solve with source-stepping homotopy as a fallback."""
        x = self.initial_state(src_vals) if x0 is None else x0
        try:
            return self.newton(x, src_vals, pin_ics=pin_ics)
        except NonConvergence:
            pass
        x = np.zeros(self.size)
        for alpha in np.linspace(0.1, 1.0, 10):
            x = self.newton(x, [alpha * s for s in src_vals], pin_ics=pin_ics)
        return x

    def injected_current(self, x, net: str) -> float:
        """Current delivered into ``net`` by the sources attached to it.

        The branch-current unknowns are oriented so that a positive value
        flows out of the net into the source, hence the sign flips.
        """
        i = self.index[net]
        total = 0.0
        for k in range(self.m):
            if self.src_pos[k] == i:
                total -= x[self.n + 1 + k]
            if self.src_neg[k] == i:
                total += x[self.n + 1 + k]
        return float(total)


def _source_values(circuit: Circuit, t: float) -> np.ndarray:
    return np.array([s.value(t) for s in circuit.sources])


def dc_operating_point(
    circuit: Circuit,
    models: ModelSet | None = None,
    options: SimOptions | None = None,
    source_values: dict[str, float] | None = None,
) -> dict[str, float]:
    """Newton solution of the DC Kirchhoff equations (sources at t=0).

    ``source_values`` overrides individual source levels by name, which is
    how DC sweeps are run.
    """
    from .model import DEFAULT_MODELS

    models = models or DEFAULT_MODELS
    options = options or SimOptions()
    system = _System(circuit, models, options)
    vals = _source_values(circuit, 0.0)
    if source_values:
        names = [s.name for s in circuit.sources]
        for name, v in source_values.items():
            vals[names.index(name)] = v
    x = system.solve_dc(vals, pin_ics=bool(options.ic))
    out = {net: float(x[system.index[net]]) for net in system.nets}
    out[GROUND] = 0.0
    return out


def _breakpoints(circuit: Circuit, tstop: float) -> np.ndarray:
    pts: set[float] = set()
    for s in circuit.sources:
        pts.update(s.breakpoints(tstop))
    return np.array(sorted(pts))


def transient(
    circuit: Circuit,
    models: ModelSet | None = None,
    options: SimOptions | None = None,
    record_nets: list[str] | None = None,
) -> Waveform:
    """Integrate the circuit over [0, tstop] and record every accepted step.

    The supply current channel holds the current delivered into the circuit
    by the sources attached to the declared vdd port net (0 if there is no
    such source).
    """
    from .model import DEFAULT_MODELS

    models = models or DEFAULT_MODELS
    options = options or SimOptions()
    system = _System(circuit, models, options)
    n = system.n

    vdd_net = circuit.ports.vdd
    supply_net = None
    if vdd_net is not None and any(
        s.positive == vdd_net for s in circuit.sources
    ):
        supply_net = vdd_net

    bps = _breakpoints(circuit, options.tstop)
    vals0 = _source_values(circuit, 0.0)
    x = system.solve_dc(vals0, pin_ics=bool(options.ic))

    nets = record_nets if record_nets is not None else system.nets
    times = [0.0]
    volts = {net: [float(x[system.index[net]])] for net in nets}
    idd = [system.injected_current(x, supply_net) if supply_net else 0.0]

    cap_v = (x[system.cap_a] - x[system.cap_b]) if len(system.cap_a) else None
    cap_i = np.zeros(len(system.cap_a)) if len(system.cap_a) else None

    t = 0.0
    h_nom = options.tstep
    h = h_nom
    h_min = options.tstep / 64
    bp_i = 0
    force_be = True  # backward Euler on the very first step
    while t < options.tstop - 1e-18:
        while bp_i < len(bps) and bps[bp_i] <= t + 1e-18:
            bp_i += 1
        t_next = min(t + h, options.tstop)
        hit_bp = bp_i < len(bps) and bps[bp_i] < t_next - 1e-18
        if hit_bp:
            t_next = float(bps[bp_i])
        h_eff = t_next - t

        use_be = force_be
        if cap_v is not None:
            if use_be:
                geq = system.cap_c / h_eff
                ieq = -geq * cap_v
            else:
                geq = 2.0 * system.cap_c / h_eff
                ieq = -geq * cap_v - cap_i
        else:
            geq = ieq = None

        vals = _source_values(circuit, t_next)
        try:
            x_new = system.newton(x, vals, geq, ieq)
        except NonConvergence:
            if h_eff <= h_min + 1e-24:
                raise
            h = max(h_eff / 2, h_min)
            force_be = True
            continue

        if cap_v is not None:
            new_v = x_new[system.cap_a] - x_new[system.cap_b]
            cap_i = geq * new_v + ieq
            cap_v = new_v
        x = x_new
        t = t_next
        times.append(t)
        for net in nets:
            volts[net].append(float(x[system.index[net]]))
        idd.append(
            system.injected_current(x, supply_net) if supply_net else 0.0
        )
        force_be = hit_bp  # smooth restart after a waveform corner
        h = min(h * 2, h_nom)

    return Waveform(
        times=np.array(times),
        node_volts={net: np.array(v) for net, v in volts.items()},
        supply_current=np.array(idd),
    )
