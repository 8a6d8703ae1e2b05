"""Pydantic request/response models for the HTTP service and the CLI."""

from __future__ import annotations

from pydantic import BaseModel, Field

from ..transient.model import DEFAULT_MODELS, DeviceModel, ModelSet


class CountsModel(BaseModel):
    nmos: int
    pmos: int
    total: int


class DeviceModelPatch(BaseModel):
    """Partial override of one polarity's level-1 parameters."""

    vt0: float | None = None
    kprime: float | None = None
    lambda_: float | None = None
    cox_area: float | None = None
    cj_term: float | None = None

    def apply(self, base: DeviceModel) -> DeviceModel:
        from dataclasses import replace

        fields = {k: v for k, v in self.model_dump().items() if v is not None}
        return replace(base, **fields) if fields else base


class ModelsPatch(BaseModel):
    nmos: DeviceModelPatch = Field(default_factory=DeviceModelPatch)
    pmos: DeviceModelPatch = Field(default_factory=DeviceModelPatch)

    def to_modelset(self) -> ModelSet:
        return ModelSet(
            nmos=self.nmos.apply(DEFAULT_MODELS.nmos),
            pmos=self.pmos.apply(DEFAULT_MODELS.pmos),
        )


class SwitchParamsModel(BaseModel):
    vdd: float = 1.8
    vtn: float = 0.5
    vtp_abs: float = 0.5


# -- emit -------------------------------------------------------------------


class EmitRequest(BaseModel):
    cell: str


class EmitResponse(BaseModel):
    name: str
    netlist: str
    counts: CountsModel


class CellListResponse(BaseModel):
    cells: list[str]


# -- check / truthtable -------------------------------------------------------


class SignalStateModel(BaseModel):
    logic: str  # "0" | "1" | "z" | "x"
    vmax: float | None = None
    vmin: float | None = None
    strength: str | None = None


class TruthRowModel(BaseModel):
    inputs: list[int]
    outputs: dict[str, SignalStateModel]
    valid: bool


class DegradationModel(BaseModel):
    inputs: list[int]
    port: str
    kind: str
    level: float


class CheckRequest(BaseModel):
    netlist: str
    params: SwitchParamsModel = Field(default_factory=SwitchParamsModel)


class TruthTableRequest(BaseModel):
    cell: str
    params: SwitchParamsModel = Field(default_factory=SwitchParamsModel)


class CheckResponse(BaseModel):
    cell: str
    input_ports: list[str]
    output_ports: list[str]
    rows: list[TruthRowModel]
    degradations: list[DegradationModel]
    diagnostics: list[str]
    golden_available: bool
    matches_golden: bool | None = None
    mismatch_detail: str | None = None
    operable: bool
    reason: str


# -- sim ----------------------------------------------------------------------


class SimRequest(BaseModel):
    netlist: str
    tstop: float
    tstep: float = 1e-11
    vdd: float | None = None  # adds a DC supply on the vdd port if absent
    nets: list[str] | None = None
    models: ModelsPatch | None = None
    include_csv: bool = True


class SimResponse(BaseModel):
    times: list[float]
    nodes: dict[str, list[float]]
    supply_current: list[float]
    csv: str | None = None


# -- bench ----------------------------------------------------------------------


class BenchRequest(BaseModel):
    config: str  # TOML suite description
    format: str = "md"
    jobs: int = 1


class BenchReportModel(BaseModel):
    cell: str
    vdd: float
    counts: CountsModel
    operable: bool
    operable_reason: str
    delay_s: float | None = None
    power_w: float | None = None
    pdp_j: float | None = None
    notes: list[str] = Field(default_factory=list)


class TrendModel(BaseModel):
    claim: str
    passed: bool


class BenchResponse(BaseModel):
    reports: list[BenchReportModel]
    trends: list[TrendModel]
    rendered: str
    format: str


# -- size -------------------------------------------------------------------


class SizeRequest(BaseModel):
    netlist: str
    objective: str = "pdp"
    vdd: float = 1.8
    budget: int = 100
    w_max: float = 4e-5
    w_min: float | None = None
    tunable: list[str] | None = None  # default: every MOSFET
    pairs: list[list[str]] = Field(default_factory=list)
    tstep: float = 5e-11
    models: ModelsPatch | None = None


class HistoryEntryModel(BaseModel):
    widths: dict[str, float]
    objective: float


class SizeResponse(BaseModel):
    widths: dict[str, float]
    objective: str
    objective_value: float
    evaluations: int
    history: list[HistoryEntryModel]
    events: list[str]
    netlist: str


class HealthResponse(BaseModel):
    status: str
    version: str
