"""Pydantic request/response models for the analysis service."""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, model_validator


class ConfigModel(BaseModel):
    tau_prior: str = "half-normal:0.5"
    mu_prior: str = "uniform"
    level: float = 0.95
    interval: Literal["shortest", "central"] = "shortest"
    methods: list[str] = ["bayes"]
    subset_last: Optional[int] = None


class StudyRow(BaseModel):
    label: str
    y: float
    se: float


class AnalyzeRequest(BaseModel):
    """Data arrive either as inline rows or as raw CSV content (one of the two)."""

    studies: Optional[list[StudyRow]] = None
    csv_text: Optional[str] = None
    config: ConfigModel = ConfigModel()

    @model_validator(mode="after")
    def _one_source(self) -> "AnalyzeRequest":
        if (self.studies is None) == (self.csv_text is None):
            raise ValueError("provide exactly one of 'studies' or 'csv_text'")
        return self


class SensitivityRequest(AnalyzeRequest):
    tau_priors: list[str]


class MethodBlockModel(BaseModel):
    method: str
    estimate: float
    se_or_sd: float
    interval: list[float]
    level: float


class TauBlockModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    estimate: float
    interval: list[float]
    posterior_median: Optional[float] = None
    posterior_interval: Optional[list[float]] = None


class ReportModel(BaseModel):
    k: int
    config: dict
    results: list[MethodBlockModel]
    tau: TauBlockModel


class SensitivityRunModel(BaseModel):
    tau_prior: str
    report: Optional[ReportModel] = None
    error: Optional[str] = None


class SensitivityResponse(BaseModel):
    runs: list[SensitivityRunModel]


class HealthResponse(BaseModel):
    status: str = "ok"
