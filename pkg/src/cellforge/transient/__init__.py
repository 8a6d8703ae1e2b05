"""Small analog transient engine: level-1 square-law MOSFETs, nodal analysis
with a Newton solve per timestep, trapezoidal integration."""

from .model import (
    DEFAULT_MODELS,
    NMOS_DEFAULT,
    PMOS_DEFAULT,
    DeviceModel,
    ModelSet,
    device_conductances,
    device_current,
)
from .engine import (
    NonConvergence,
    SimOptions,
    SingularMatrix,
    dc_operating_point,
    transient,
)
from .waveform import Waveform
from .measure import (
    NoTransition,
    WindowTooShort,
    measure_delay,
    measure_power,
    pdp,
)

__all__ = [
    "DeviceModel",
    "ModelSet",
    "NMOS_DEFAULT",
    "PMOS_DEFAULT",
    "DEFAULT_MODELS",
    "device_current",
    "device_conductances",
    "SimOptions",
    "NonConvergence",
    "SingularMatrix",
    "dc_operating_point",
    "transient",
    "Waveform",
    "measure_delay",
    "measure_power",
    "pdp",
    "NoTransition",
    "WindowTooShort",
]
