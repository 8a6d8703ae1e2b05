"""Waveform measurements: 50%-50% delay, average power, PDP."""

from __future__ import annotations

import numpy as np

from .waveform import Waveform


class NoTransition(RuntimeError):
    """The output never crosses 50% after an input edge (a distorted cell)."""


class WindowTooShort(ValueError):
    """The requested measurement window holds fewer than two samples."""


def crossings(times: np.ndarray, values: np.ndarray, level: float) -> list[float]:
    """Times where the trace crosses ``level``, linearly interpolated."""
    out: list[float] = []
    above = values >= level
    flips = np.nonzero(above[1:] != above[:-1])[0]
    for i in flips:
        v0, v1 = values[i], values[i + 1]
        frac = (level - v0) / (v1 - v0)
        out.append(float(times[i] + frac * (times[i + 1] - times[i])))
    return out


def measure_delay(
    waveform: Waveform,
    in_port: str | list[str] | tuple[str, ...],
    out_port: str,
    vdd: float,
    t_start: float = 0.0,
) -> float:
    """Worst-case 50%-to-50% delay.

    Each output crossing is attributed to the most recent input crossing
    before it (over all listed input ports) and the maximum interval is
    returned.  Raises :class:`NoTransition` when the output never crosses
    the 50% level after the first input edge, which is how distorted cells
    announce themselves.
    """
    in_ports = [in_port] if isinstance(in_port, str) else list(in_port)
    level = vdd / 2
    t = waveform.times
    in_cross: list[float] = []
    for p in in_ports:
        in_cross.extend(c for c in crossings(t, waveform.node_volts[p], level)
                        if c >= t_start)
    if not in_cross:
        raise NoTransition(f"no input transition on {in_ports} after {t_start:g} s")
    in_cross.sort()
    out_cross = [c for c in crossings(t, waveform.node_volts[out_port], level)
                 if c >= in_cross[0]]
    if not out_cross:
        raise NoTransition(
            f"output {out_port!r} never crosses 50% after an input edge"
        )
    delays = []
    arr = np.array(in_cross)
    for oc in out_cross:
        k = int(np.searchsorted(arr, oc, side="right")) - 1
        if k >= 0:
            delays.append(float(oc - arr[k]))
    return max(delays)


def measure_power(
    waveform: Waveform,
    vdd: float,
    t_start: float = 0.0,
    t_stop: float | None = None,
) -> float:
    """Average supply power over [t_start, t_stop] (trapezoidal time mean).

    The warm-up prefix is excluded by choosing ``t_start``; callers are
    expected to leave at least one full stimulus period in the window.
    """
    t = waveform.times
    if t_stop is None:
        t_stop = float(t[-1])
    if not t_stop > t_start:
        raise WindowTooShort(f"window [{t_start:g}, {t_stop:g}] is empty")
    inside = (t > t_start) & (t < t_stop)
    ts = np.concatenate(([t_start], t[inside], [t_stop]))
    i_t = np.interp(ts, t, waveform.supply_current)
    if len(ts) < 2:
        raise WindowTooShort("fewer than two samples in the window")
    energy = float(np.trapezoid(vdd * i_t, ts))
    return energy / (t_stop - t_start)


def pdp(delay: float, power: float) -> float:
    """Power-delay product in joules (the energy-per-operation figure)."""
    if not (np.isfinite(delay) and np.isfinite(power)):
        raise ValueError("delay and power must be finite")
    return delay * power
