"""Level-1 square-law MOSFET model.

Drain current of an NMOS-convention device (current positive drain to
source, ``vt`` positive):

* cutoff      ``vgs <= vt``:            ``i = 0``
* triode      ``vds < vgs - vt``:       ``i = k' (W/L) ((vgs-vt) vds - vds^2/2) (1 + lambda vds)``
* saturation  ``vds >= vgs - vt``:      ``i = (k'/2) (W/L) (vgs-vt)^2 (1 + lambda vds)``

The two conducting branches agree at the region boundary, so the current is
continuous there.  PMOS devices are handled by reflecting every voltage
through zero; drain/source asymmetry is handled by swapping terminals when
``vds < 0`` (the channel is symmetric).

Analytic small-signal conductances (``di/dvgs``, ``di/dvds``) are provided
alongside the current so the nodal solver can assemble exact Jacobians.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class DeviceModel:
    """Parameter set for one polarity.

    vt0 is signed (negative for PMOS); kprime is the process
    transconductance in A/V^2; lambda_ the channel-length modulation in
    1/V; cox_area the gate capacitance per area in F/m^2; cj_term a fixed
    lumped junction capacitance per drain/source terminal in F.
    """

    vt0: float
    kprime: float
    lambda_: float = 0.0
    cox_area: float = 0.0
    cj_term: float = 0.0

    def __post_init__(self):
        if not self.kprime > 0:
            raise ValueError("kprime must be > 0")
        if self.lambda_ < 0 or self.cox_area < 0 or self.cj_term < 0:
            raise ValueError("lambda, cox_area and cj_term must be >= 0")

    @property
    def polarity(self) -> str:
        return "PMOS" if self.vt0 < 0 else "NMOS"


# Generic 180 nm-class textbook values; configuration defaults, not
# calibrated foundry data.
NMOS_DEFAULT = DeviceModel(vt0=0.5, kprime=170e-6, lambda_=0.05,
                           cox_area=8.5e-3, cj_term=1e-15)
PMOS_DEFAULT = DeviceModel(vt0=-0.5, kprime=60e-6, lambda_=0.05,
                           cox_area=8.5e-3, cj_term=1e-15)


@dataclass(frozen=True)
class ModelSet:
    nmos: DeviceModel = NMOS_DEFAULT
    pmos: DeviceModel = PMOS_DEFAULT

    def __post_init__(self):
        if self.nmos.vt0 <= 0:
            raise ValueError("nmos model must have vt0 > 0")
        if self.pmos.vt0 >= 0:
            raise ValueError("pmos model must have vt0 < 0")

    def for_polarity(self, polarity: str) -> DeviceModel:
        return self.nmos if polarity == "NMOS" else self.pmos


DEFAULT_MODELS = ModelSet()


def _core(kwl, vt, lam, vgs, vds):
    """Current and partials for NMOS convention with vds >= 0 (vectorized).

    Returns (i, di/dvgs, di/dvds).
    """
    vov = vgs - vt
    one_lam = 1.0 + lam * vds
    conducting = vov > 0.0
    triode = conducting & (vds < vov)
    sat = conducting & ~triode

    i = np.where(
        triode,
        kwl * (vov * vds - 0.5 * vds * vds) * one_lam,
        np.where(sat, 0.5 * kwl * vov * vov * one_lam, 0.0),
    )
    gm = np.where(
        triode,
        kwl * vds * one_lam,
        np.where(sat, kwl * vov * one_lam, 0.0),
    )
    gds = np.where(
        triode,
        kwl * ((vov - vds) * one_lam + (vov * vds - 0.5 * vds * vds) * lam),
        np.where(sat, 0.5 * kwl * vov * vov * lam, 0.0),
    )
    return i, gm, gds


def stamp_currents(kwl, vt_abs, lam, sign, vd, vg, vs):
    """Vectorized terminal-oriented evaluation for the nodal solver.

    All arguments are arrays over devices; ``sign`` is +1 for NMOS and -1
    for PMOS (the PMOS case is evaluated in the voltage-mirrored world,
    where the partials carry over unchanged).  Returns the physical
    drain->source current and its partials w.r.t. the drain, gate and
    source voltages.
    """
    u_d = sign * vd
    u_g = sign * vg
    u_s = sign * vs
    swap = u_d < u_s
    lo = np.where(swap, u_d, u_s)
    hi = np.where(swap, u_s, u_d)
    i, gm, gds = _core(kwl, vt_abs, lam, u_g - lo, hi - lo)

    i_ds = np.where(swap, -i, i)
    d_dd = np.where(swap, gm + gds, gds)
    d_dg = np.where(swap, -gm, gm)
    d_ds = np.where(swap, -gds, -gm - gds)
    return sign * i_ds, d_dd, d_dg, d_ds


def device_current(model: DeviceModel, w: float, l: float,
                   vgs: float, vds: float) -> float:
    """Drain current of a single device at the given bias (amperes).

    NMOS convention; PMOS models (vt0 < 0) expect reflected (negative)
    biases and return negative current.  Total function: every bias is in
    exactly one region.
    """
    if not (w > 0 and l > 0):
        raise ValueError("w and l must be > 0")
    sign = 1.0 if model.polarity == "NMOS" else -1.0
    i, _, _, _ = stamp_currents(
        np.array([model.kprime * w / l]),
        np.array([abs(model.vt0)]),
        np.array([model.lambda_]),
        np.array([sign]),
        np.array([vds]),
        np.array([vgs]),
        np.array([0.0]),
    )
    return float(i[0])


def device_conductances(model: DeviceModel, w: float, l: float,
                        vgs: float, vds: float) -> tuple[float, float]:
    """Analytic (di/dvgs, di/dvds) at the given bias."""
    sign = 1.0 if model.polarity == "NMOS" else -1.0
    _, d_dd, d_dg, _ = stamp_currents(
        np.array([model.kprime * w / l]),
        np.array([abs(model.vt0)]),
        np.array([model.lambda_]),
        np.array([sign]),
        np.array([vds]),
        np.array([vgs]),
        np.array([0.0]),
    )
    return float(d_dg[0]), float(d_dd[0])
