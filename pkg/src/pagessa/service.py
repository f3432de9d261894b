"""HTTP facade over the core package.

Panels travel as row-major lists with nulls for missing cells; every
endpoint is a thin adapter around the corresponding library call.
"""

from __future__ import annotations

from typing import Literal, Optional

import numpy as np
from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from . import __version__
from .diagnostics import mssa_suitability, rank_scaling_report
from .experiments import ConfigError, parse_policy, run_experiment
from .mssa import fit_forecaster, forecast, impute
from .panel import Panel, initialize_missing
from .variance import estimate_variance


class PanelPayload(BaseModel):
    """N rows of T cells; null marks a missing observation."""

    values: list[list[Optional[float]]]
    series_names: Optional[list[str]] = None

    def to_panel(self) -> Panel:
        arr = np.array([[np.nan if v is None else v for v in row] for row in self.values], dtype=float)
        if arr.ndim != 2 or arr.size == 0:
            raise HTTPException(status_code=400, detail="values must be a non-empty N x T grid")
        mask = ~np.isnan(arr)
        return Panel(values=np.where(mask, arr, 0.0), mask=mask, series_names=tuple(self.series_names or ()))


class PolicyPayload(BaseModel):
    kind: Literal["fixed", "energy", "median"] = "energy"
    k: Optional[int] = None
    fraction: float = 0.9

    def to_policy(self):
        d = {"kind": self.kind, "fraction": self.fraction}
        if self.kind == "fixed":
            if self.k is None:
                raise HTTPException(status_code=400, detail="fixed policy needs k")
            d["k"] = self.k
        return parse_policy(d)


class ImputeRequest(BaseModel):
    panel: PanelPayload
    L: Optional[int] = None
    mode: Literal["ssa", "mssa", "hssa", "vssa"] = "mssa"
    policy: PolicyPayload = Field(default_factory=PolicyPayload)
    init: Literal["zero", "ffill"] = "zero"


class ImputeResponse(BaseModel):
    estimates: list[list[float]]
    L: Optional[int]
    mode: str
    policy: str
    ranks: list[int]
    notes: list[str]


class ForecastRequest(BaseModel):
    panel: PanelPayload
    times: list[int]
    L: Optional[int] = None
    policy: PolicyPayload = Field(default_factory=PolicyPayload)
    init: Literal["zero", "ffill"] = "zero"


class ForecastResponse(BaseModel):
    forecasts: list[list[float]]
    times: list[int]
    L: int
    k: int
    rho_hat: float


class VarianceRequest(BaseModel):
    panel: PanelPayload
    L: Optional[int] = None
    policy_mean: PolicyPayload = Field(default_factory=PolicyPayload)
    policy_sq: PolicyPayload = Field(default_factory=PolicyPayload)


class VarianceResponse(BaseModel):
    sigma2: list[list[float]]
    mean_estimates: list[list[float]]
    flagged_partial: bool


class DiagnoseRequest(BaseModel):
    panel: PanelPayload
    subset_sizes: Optional[list[int]] = None
    energy: float = 0.9


class RankRow(BaseModel):
    scope: str
    n_series: int
    L: int
    effective_rank: int


class DiagnoseResponse(BaseModel):
    rows: list[RankRow]
    verdict: str
    rationale: str


class ExperimentRequest(BaseModel):
    config: dict
    seed: int = 0
    workers: int = 1
    missing_token: Optional[str] = None


class ExperimentResponse(BaseModel):
    task: str
    rows: list[dict]
    report_csv: str
    report_json: str
    resolved_config: str


class HealthResponse(BaseModel):
    status: str
    version: str


app = FastAPI(title="pagessa", version=__version__)


def _init(payload: PanelPayload, init: str) -> Panel:
    panel = payload.to_panel()
    return initialize_missing(panel, "ffill") if init == "ffill" else panel


@app.get("/health", response_model=HealthResponse)
def health() -> HealthResponse:
    return HealthResponse(status="ok", version=__version__)


@app.post("/impute", response_model=ImputeResponse)
def impute_endpoint(req: ImputeRequest) -> ImputeResponse:
    try:
        result = impute(_init(req.panel, req.init), L=req.L, policy=req.policy.to_policy(), mode=req.mode)
    except ValueError as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from exc
    return ImputeResponse(
        estimates=result.estimates.tolist(),
        L=result.L,
        mode=result.mode,
        policy=result.policy_name,
        ranks=[int(m.k) for m in result.models],
        notes=list(result.notes),
    )


@app.post("/forecast", response_model=ForecastResponse)
def forecast_endpoint(req: ForecastRequest) -> ForecastResponse:
    panel = _init(req.panel, req.init)
    try:
        model = fit_forecaster(panel, L=req.L, policy=req.policy.to_policy())
        preds = forecast(model, panel, req.times)
    except ValueError as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from exc
    return ForecastResponse(forecasts=preds.tolist(), times=list(req.times), L=model.L, k=model.k, rho_hat=model.rho_hat)


@app.post("/variance", response_model=VarianceResponse)
def variance_endpoint(req: VarianceRequest) -> VarianceResponse:
    try:
        result = estimate_variance(
            req.panel.to_panel(),
            L=req.L,
            policy_mean=req.policy_mean.to_policy(),
            policy_sq=req.policy_sq.to_policy(),
        )
    except ValueError as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from exc
    return VarianceResponse(
        sigma2=result.sigma2_hat.tolist(),
        mean_estimates=result.mean_result.estimates.tolist(),
        flagged_partial=result.flagged_partial,
    )


@app.post("/diagnose", response_model=DiagnoseResponse)
def diagnose_endpoint(req: DiagnoseRequest) -> DiagnoseResponse:
    try:
        report = rank_scaling_report(req.panel.to_panel(), subset_sizes=req.subset_sizes, energy=req.energy)
    except ValueError as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from exc
    verdict = mssa_suitability(report)
    return DiagnoseResponse(
        rows=[RankRow(**r) for r in report.to_rows()],
        verdict=verdict.verdict,
        rationale=verdict.rationale,
    )


@app.post("/experiments/run", response_model=ExperimentResponse)
def experiments_endpoint(req: ExperimentRequest) -> ExperimentResponse:
    try:
        report = run_experiment(req.config, out_dir=None, seed=req.seed, workers=req.workers, missing_token=req.missing_token)
    except ConfigError as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from exc
    return ExperimentResponse(
        task=report.task,
        rows=report.sorted_rows(),
        report_csv=report.csv_text(),
        report_json=report.json_text(),
        resolved_config=report.config_text(),
    )
