"""Request and response models of the HTTP service."""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field, model_validator


class TargetSpec(BaseModel):
    builder: Optional[Literal["ghz", "qft", "random"]] = None
    n: Optional[int] = Field(None, ge=1)
    m: Optional[int] = Field(None, ge=1)
    seed: int = 0
    topology: Optional[Literal["doubling", "ghz10"]] = None
    circuit: Optional[dict] = None

    @model_validator(mode="after")
    def _one_source(self):
        if (self.builder is None) == (self.circuit is None):
            raise ValueError("give exactly one of builder and circuit")
        if self.builder is not None and self.n is None:
            raise ValueError("builder targets need n")
        if self.builder == "random" and self.m is None:
            raise ValueError("random targets need m")
        return self


class NoiseSpec(BaseModel):
    rate_1q: float = Field(0.0, ge=0, le=1)
    rate_2q: float = Field(0.0, ge=0, le=1)
    rate_meas: float = Field(0.0, ge=0, le=1)
    meas_exact: bool = False
    prep_flip: Optional[list[float]] = None
    meas_flip: Optional[list[float]] = None
    slots: dict[int, dict[str, float]] = Field(default_factory=dict)
    epsilon: float = Field(0.0, ge=0, le=0.5)
    gd_seed: int = 0


class ProtocolSpec(BaseModel):
    theta: float = Field(0.13, gt=0, lt=1)
    alpha: float = Field(0.95, gt=0, lt=1)
    v: Optional[int] = Field(None, ge=1)
    seed: int


class AccreditRequest(BaseModel):
    target: TargetSpec
    noise: NoiseSpec = Field(default_factory=NoiseSpec)
    protocol: ProtocolSpec
    shots: int = Field(1000, ge=0)
    max_workers: Optional[int] = Field(None, ge=1)


class AccreditResponse(BaseModel):
    report: dict
    summary: str
    trap_outputs: list[str]


class OracleRequest(BaseModel):
    target: TargetSpec
    noise: NoiseSpec = Field(default_factory=NoiseSpec)
    mode: Literal["exact", "sampled"] = "exact"
    protocol: Optional[ProtocolSpec] = None
    shots: int = Field(100_000, ge=1)


class OracleResponse(BaseModel):
    mode: str
    vd: float
    p_inc: float
    bound: float
    holds: bool
    p_err: Optional[float] = None


class DiagnoseRequest(BaseModel):
    n: Optional[int] = Field(None, ge=1)
    trap_outputs: Optional[list[str]] = None
    p_flip: Optional[float] = Field(None, ge=0, le=1)
    target: Optional[TargetSpec] = None
    noise: Optional[NoiseSpec] = None
    traps: int = Field(200, ge=1)
    shots_per_trap: int = Field(500, ge=1)
    seed: int = 0

    @model_validator(mode="after")
    def _one_source(self):
        if (self.trap_outputs is None) == (self.target is None):
            raise ValueError("give either trap_outputs or a target to simulate")
        return self


class HammingRow(BaseModel):
    h: int
    empirical: float
    model: float


class DiagnoseResponse(BaseModel):
    n: int
    samples: int
    p_flip: float
    fitted_p_flip: float
    tv: float
    rows: list[HammingRow]


class CompareBoundsRequest(BaseModel):
    grid: list[float] = Field(default_factory=lambda: [round(0.01 * k, 2) for k in range(1, 51)])
    v_max: int = Field(10**6, ge=1)
    kappa: float = Field(1.7, gt=0)


class BoundRow(BaseModel):
    p_inc: float
    eta_best: float
    argmin_v: int
    present_bound: float


class CompareBoundsResponse(BaseModel):
    rows: list[BoundRow]


class GenerateTrapsRequest(BaseModel):
    target: TargetSpec
    count: int = Field(10, ge=0)
    seed: int
    qotp: bool = True


class TrapRecord(BaseModel):
    index: int
    t: int
    selections: list[str]
    qotp: list[str]
    circuit: dict


class GenerateTrapsResponse(BaseModel):
    n: int
    m: int
    seed: int
    traps: list[TrapRecord]
