"""Waveform container and CSV / VCD writers."""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np


@dataclass
class Waveform:
    """Time-ordered node voltages plus the supply current channel.

    All sequences share the same length and times are strictly increasing;
    one sample per accepted integration step.
    """

    times: np.ndarray
    node_volts: dict[str, np.ndarray]
    supply_current: np.ndarray

    def __post_init__(self):
        n = len(self.times)
        if len(self.supply_current) != n:
            raise ValueError("supply_current length mismatch")
        for net, v in self.node_volts.items():
            if len(v) != n:
                raise ValueError(f"net {net!r} sample length mismatch")
        if n > 1 and not (np.diff(self.times) > 0).all():
            raise ValueError("times must be strictly increasing")

    def value_at(self, net: str, t: float) -> float:
        """Linearly interpolated node voltage at time t."""
        return float(np.interp(t, self.times, self.node_volts[net]))

    def digitize_at(self, net: str, t: float, vdd: float) -> int:
        return 1 if self.value_at(net, t) >= vdd / 2 else 0

    def to_csv(self) -> str:
        """``time,<net>,...,idd`` rows in SI units, full float precision."""
        nets = list(self.node_volts)
        buf = io.StringIO()
        buf.write(",".join(["time"] + nets + ["idd"]) + "\n")
        cols = [self.times] + [self.node_volts[n] for n in nets]
        cols.append(self.supply_current)
        for row in zip(*cols):
            buf.write(",".join(repr(float(x)) for x in row) + "\n")
        return buf.getvalue()

    def to_vcd(self, vdd: float, real_nets: tuple[str, ...] = (),
               timescale: str = "1ps") -> str:
        """VCD dump: every net as a 1-bit wire quantized at vdd/2, plus
        ``$var real`` channels for the selected nets and the supply current."""
        nets = list(self.node_volts)
        ids = {}
        next_id = 33  # '!'
        for net in nets:
            ids[("wire", net)] = chr(next_id)
            next_id += 1
        for net in real_nets:
            if net not in self.node_volts:
                raise KeyError(f"net {net!r} not recorded")
            ids[("real", net)] = chr(next_id)
            next_id += 1
        ids[("real", "idd")] = chr(next_id)

        buf = io.StringIO()
        buf.write("$timescale %s $end\n" % timescale)
        buf.write("$scope module cellforge $end\n")
        for net in nets:
            buf.write(f"$var wire 1 {ids[('wire', net)]} {net} $end\n")
        for net in real_nets:
            buf.write(f"$var real 64 {ids[('real', net)]} V({net}) $end\n")
        buf.write(f"$var real 64 {ids[('real', 'idd')]} idd $end\n")
        buf.write("$upscope $end\n$enddefinitions $end\n")

        last_bits: dict[str, int | None] = {net: None for net in nets}
        last_real: dict[str, float | None] = {net: None for net in real_nets}
        last_idd: float | None = None
        last_stamp = None
        for k, t in enumerate(self.times):
            stamp = int(round(t * 1e12))
            changes: list[str] = []
            for net in nets:
                bit = 1 if self.node_volts[net][k] >= vdd / 2 else 0
                if bit != last_bits[net]:
                    changes.append(f"{bit}{ids[('wire', net)]}")
                    last_bits[net] = bit
            for net in real_nets:
                val = float(self.node_volts[net][k])
                if val != last_real[net]:
                    changes.append(f"r{val!r} {ids[('real', net)]}")
                    last_real[net] = val
            idd = float(self.supply_current[k])
            if idd != last_idd:
                changes.append(f"r{idd!r} {ids[('real', 'idd')]}")
                last_idd = idd
            if changes:
                if stamp != last_stamp:
                    buf.write(f"#{stamp}\n")
                    last_stamp = stamp
                buf.write("\n".join(changes) + "\n")
        return buf.getvalue()
