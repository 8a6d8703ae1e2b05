"""FastAPI application exposing the toolkit over HTTP.

User mistakes (bad netlists, unknown cells, invalid parameters) map to 400;
solver breakdowns (non-convergence, singular systems) map to 500.  Run with
``cellforge serve`` or ``uvicorn cellforge.service:app``.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..netlist import NetlistError
from ..sizing import InfeasibleStart
from ..transient import NonConvergence, SingularMatrix
from . import core
from . import schemas as s

app = FastAPI(
    title="cellforge",
    version=__version__,
    description="Switch-level checking, transient measurement and sizing "
                "of GDI/PTL adder cells.",
)

_USER_ERRORS = (NetlistError, KeyError, ValueError, InfeasibleStart)
_ENGINE_ERRORS = (NonConvergence, SingularMatrix)


@app.exception_handler(Exception)
async def _translate(request: Request, exc: Exception):
    if isinstance(exc, _USER_ERRORS):
        detail = exc.args[0] if exc.args else str(exc)
        return JSONResponse(status_code=400, content={"detail": str(detail)})
    if isinstance(exc, _ENGINE_ERRORS):
        return JSONResponse(status_code=500, content={"detail": str(exc)})
    raise exc


@app.get("/health", response_model=s.HealthResponse)
def health() -> s.HealthResponse:
    return core.health()


@app.get("/cells", response_model=s.CellListResponse)
def cells() -> s.CellListResponse:
    return core.list_cells()


@app.post("/emit", response_model=s.EmitResponse)
def emit(req: s.EmitRequest) -> s.EmitResponse:
    return core.emit(req)


@app.post("/check", response_model=s.CheckResponse)
def check(req: s.CheckRequest) -> s.CheckResponse:
    return core.check(req)


@app.post("/truthtable", response_model=s.CheckResponse)
def truthtable(req: s.TruthTableRequest) -> s.CheckResponse:
    return core.truthtable(req)


@app.post("/sim", response_model=s.SimResponse)
def sim(req: s.SimRequest) -> s.SimResponse:
    return core.simulate(req)


@app.post("/bench", response_model=s.BenchResponse)
def bench(req: s.BenchRequest) -> s.BenchResponse:
    return core.bench(req)


@app.post("/size", response_model=s.SizeResponse)
def size(req: s.SizeRequest) -> s.SizeResponse:
    return core.size(req)
