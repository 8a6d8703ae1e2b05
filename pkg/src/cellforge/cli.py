"""Command-line front end.

Thin client over the service handlers in :mod:`cellforge.service.core`:
each subcommand builds a request model, invokes the shared handler
in-process and formats the response.  Exit codes: 0 success, 1 user error
(bad flags, unreadable netlist, unknown cell), 2 engine error
(non-convergence, singular system).  Diagnostics go to stderr, data to
stdout or to files written atomically (temp file + rename).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import __version__
from .netlist import NetlistError
from .sizing import InfeasibleStart
from .transient import NonConvergence, SingularMatrix, Waveform
from .service import core
from .service import schemas as s

USER_ERRORS = (NetlistError, FileNotFoundError, IsADirectoryError,
               PermissionError, KeyError, ValueError, InfeasibleStart,
               UnicodeDecodeError)
ENGINE_ERRORS = (NonConvergence, SingularMatrix)


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # bad flags are user errors: exit 1, not 2
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _write_atomic(path: str, text: str) -> None:
    """Write via a temp file and rename, so failures leave no partial file."""
    target = Path(path)
    fd, tmp = tempfile.mkstemp(dir=str(target.parent) or ".",
                               prefix=f".{target.name}.")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def _emit_output(text: str, path: str | None) -> None:
    if path:
        _write_atomic(path, text)
    else:
        sys.stdout.write(text)


def _read_netlist(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    return Path(path).read_text()


def _switch_params(args) -> s.SwitchParamsModel:
    return s.SwitchParamsModel(vdd=args.vdd, vtn=args.vtn, vtp_abs=args.vtp)


def _render_check_md(resp: s.CheckResponse) -> str:
    header = list(resp.input_ports) + list(resp.output_ports)
    lines = [f"## {resp.cell}", "", "| " + " | ".join(header) + " |",
             "|" + "---|" * len(header)]
    for row in resp.rows:
        cells = [str(b) for b in row.inputs]
        for port in resp.output_ports:
            st = row.outputs[port]
            level = st.vmax if st.logic == "1" else st.vmin
            cells.append(st.logic if level is None
                         else f"{st.logic} ({level:.2f} V)")
        lines.append("| " + " | ".join(cells) + " |")
    lines.append("")
    if resp.degradations:
        lines.append("Degraded levels:")
        for d in resp.degradations:
            lines.append(f"- inputs {tuple(d.inputs)}: {d.port} {d.kind} "
                         f"at {d.level:.2f} V")
        lines.append("")
    for diag in resp.diagnostics:
        lines.append(f"- warning: {diag}")
    if resp.golden_available:
        verdict = "yes" if resp.matches_golden else f"NO ({resp.mismatch_detail})"
        lines.append(f"Matches golden: {verdict}")
    lines.append(f"Operable: {'yes' if resp.operable else 'no'} ({resp.reason})")
    lines.append("")
    return "\n".join(lines)


def _cmd_emit(args) -> int:
    resp = core.emit(s.EmitRequest(cell=args.cell))
    _emit_output(resp.netlist, args.output)
    return 0


def _cmd_truthtable(args) -> int:
    resp = core.truthtable(
        s.TruthTableRequest(cell=args.cell, params=_switch_params(args)))
    text = (resp.model_dump_json(indent=2) + "\n" if args.format == "json"
            else _render_check_md(resp))
    _emit_output(text, args.output)
    return 0


def _cmd_check(args) -> int:
    resp = core.check(s.CheckRequest(netlist=_read_netlist(args.netlist),
                                     params=_switch_params(args)))
    text = (resp.model_dump_json(indent=2) + "\n" if args.format == "json"
            else _render_check_md(resp))
    _emit_output(text, args.output)
    return 0


def _cmd_sim(args) -> int:
    req = s.SimRequest(
        netlist=_read_netlist(args.netlist),
        tstop=args.tstop,
        tstep=args.tstep,
        vdd=args.vdd,
        nets=args.nets.split(",") if args.nets else None,
    )
    resp = core.simulate(req)
    _emit_output(resp.csv or "", args.output)
    if args.vcd:
        if args.vdd is None:
            raise ValueError("--vcd needs --vdd for logic quantization")
        wave = Waveform(
            times=np.array(resp.times),
            node_volts={n: np.array(v) for n, v in resp.nodes.items()},
            supply_current=np.array(resp.supply_current),
        )
        _write_atomic(args.vcd, wave.to_vcd(vdd=args.vdd))
    return 0


def _cmd_bench(args) -> int:
    config_path = Path(args.config)
    resp = core.bench(
        s.BenchRequest(config=config_path.read_text(), format=args.format,
                       jobs=args.jobs),
        base_dir=config_path.parent,
    )
    _emit_output(resp.rendered, args.output)
    failed = [t for t in resp.trends if not t.passed]
    for t in resp.trends:
        print(f"[{'PASS' if t.passed else 'FAIL'}] {t.claim}", file=sys.stderr)
    if args.strict and failed:
        print(f"{len(failed)} trend check(s) failed", file=sys.stderr)
        return 1
    return 0


def _cmd_size(args) -> int:
    req = s.SizeRequest(
        netlist=_read_netlist(args.netlist),
        objective=args.objective,
        vdd=args.vdd,
        budget=args.budget,
        w_max=args.w_max,
        w_min=args.w_min,
        tunable=args.tunable.split(",") if args.tunable else None,
        pairs=[p.split(",") for p in args.pair],
        tstep=args.tstep,
    )
    resp = core.size(req)
    _emit_output(resp.netlist, args.output)
    if args.history:
        lines = ["step,objective," + ",".join(sorted(resp.widths))]
        for i, entry in enumerate(resp.history):
            widths = ",".join(repr(entry.widths[k])
                              for k in sorted(entry.widths))
            lines.append(f"{i},{entry.objective!r},{widths}")
        _write_atomic(args.history, "\n".join(lines) + "\n")
    print(f"{resp.objective} = {resp.objective_value:.6g} after "
          f"{resp.evaluations} evaluations", file=sys.stderr)
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import app

    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cellforge",
                     description="GDI/PTL adder cell analysis toolkit")
    parser.add_argument("--version", action="version",
                        version=f"cellforge {__version__}")
    parser.add_argument("--seed", type=int, default=None,
                        help="seed for randomized corpus tooling; simulation "
                             "results never depend on it")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("emit", help="write a built-in cell as a netlist")
    p.add_argument("cell")
    p.add_argument("-o", "--output")
    p.set_defaults(fn=_cmd_emit)

    def add_switch_flags(p):
        p.add_argument("--vdd", type=float, default=1.8)
        p.add_argument("--vtn", type=float, default=0.5)
        p.add_argument("--vtp", type=float, default=0.5)
        p.add_argument("--format", choices=("md", "json"), default="md")
        p.add_argument("-o", "--output")

    p = sub.add_parser("truthtable",
                       help="switch-level truth table of a built-in cell")
    p.add_argument("cell")
    add_switch_flags(p)
    p.set_defaults(fn=_cmd_truthtable)

    p = sub.add_parser("check",
                       help="truth table, degradations and operability of a "
                            "netlist")
    p.add_argument("netlist", help="netlist file ('-' for stdin)")
    add_switch_flags(p)
    p.set_defaults(fn=_cmd_check)

    p = sub.add_parser("sim", help="transient simulation to CSV/VCD")
    p.add_argument("netlist")
    p.add_argument("--tstop", type=float, required=True)
    p.add_argument("--tstep", type=float, default=1e-11)
    p.add_argument("--vdd", type=float, default=None,
                   help="adds a DC supply on the vdd port if none exists")
    p.add_argument("--nets", help="comma-separated subset of nets to record")
    p.add_argument("-o", "--output")
    p.add_argument("--vcd", help="also write a VCD dump to this path")
    p.set_defaults(fn=_cmd_sim)

    p = sub.add_parser("bench", help="run a measurement suite from a config")
    p.add_argument("--config", required=True)
    p.add_argument("--format", choices=("md", "csv", "json"), default="md")
    p.add_argument("-o", "--output")
    p.add_argument("--strict", action="store_true",
                   help="exit 1 when a trend check fails")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(fn=_cmd_bench)

    p = sub.add_parser("size", help="coordinate-descent width optimization")
    p.add_argument("netlist")
    p.add_argument("--objective", choices=("pdp", "delay", "power"),
                   default="pdp")
    p.add_argument("--vdd", type=float, default=1.8)
    p.add_argument("--budget", type=int, default=100)
    p.add_argument("--w-min", type=float, default=None)
    p.add_argument("--w-max", type=float, default=4e-5)
    p.add_argument("--tunable", help="comma-separated device names")
    p.add_argument("--pair", action="append", default=[],
                   help="gang devices, e.g. --pair MPh,MNh (repeatable)")
    p.add_argument("--tstep", type=float, default=5e-11)
    p.add_argument("-o", "--output")
    p.add_argument("--history", help="write the accepted-point history CSV")
    p.set_defaults(fn=_cmd_size)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(fn=_cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return args.fn(args)
    except USER_ERRORS as e:
        if isinstance(e, OSError) and e.filename:
            msg = f"{e.strerror}: {e.filename}"
        elif isinstance(e, KeyError) and e.args:
            msg = e.args[0]
        else:
            msg = str(e)
        print(f"cellforge: error: {msg}", file=sys.stderr)
        return 1
    except ENGINE_ERRORS as e:
        print(f"cellforge: engine error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
