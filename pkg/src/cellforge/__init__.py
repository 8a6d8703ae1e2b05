"""cellforge: transistor-level analysis toolkit for GDI/PTL adder cells.

Subsystems:

- ``netlist``     circuit data model + SPICE-subset parser/serializer
- ``cells``       generators for GDI/PTL primitives, the two proposed
                  10-transistor adders and a 28T static CMOS reference
- ``switchlevel`` imperfect-switch evaluator with threshold-drop bounds
- ``transient``   level-1 MOSFET nodal simulator (Newton + trapezoidal)
- ``bench``       cell x Vdd sweep harness producing delay/power/PDP reports
- ``sizing``      coordinate-descent transistor width optimizer
- ``service``     FastAPI wrapper exposing the toolkit over HTTP
- ``cli``         ``cellforge`` command-line front end
"""

__version__ = "0.1.0"

from .netlist import Circuit, Mosfet, Capacitor, IndependentSource, parse, serialize
from .cells import CellSpec, golden_full_adder

__all__ = [
    "__version__",
    "Circuit",
    "Mosfet",
    "Capacitor",
    "IndependentSource",
    "parse",
    "serialize",
    "CellSpec",
    "golden_full_adder",
]
