"""Pydantic request/response models for the evaluation service."""
from __future__ import annotations

from typing import Any, Optional

from pydantic import BaseModel, Field


class HealthResponse(BaseModel):
    status: str = "ok"
    version: str


class SynthRequest(BaseModel):
    out_dir: str
    n_routes: int = Field(default=12, ge=1)
    n_frames: int = Field(default=150, ge=1)
    n_models: int = Field(default=16, ge=1)
    density: float = Field(default=1.0, ge=0.0)
    seed: int = 0
    timestep: float = Field(default=0.1, gt=0.0)
    config_path: Optional[str] = None
    overrides: dict[str, Any] = Field(default_factory=dict)


class SynthSummary(BaseModel):
    n_files: int
    detectors: list[str]
    routes: list[str]
    mean_objects_per_frame: float
    realized_miss_rate: float


class SynthResponse(BaseModel):
    files: list[str]
    summary: SynthSummary


class EvaluateRequest(BaseModel):
    log_paths: list[str] = Field(default_factory=list)
    log_dir: Optional[str] = None
    out_csv: Optional[str] = None
    jobs: int = Field(default=1, ge=1)
    iou_kind: Optional[str] = None  # "bev" or "3d"
    metrics: Optional[list[str]] = None
    config_path: Optional[str] = None
    overrides: dict[str, Any] = Field(default_factory=dict)


class MetricRow(BaseModel):
    detector_id: str
    route_id: str
    values: dict[str, Optional[float]]


class EvaluateResponse(BaseModel):
    csv_path: Optional[str]
    columns: list[str]
    rows: list[MetricRow]


class CorrelateRequest(BaseModel):
    table_csv: str
    out_prefix: Optional[str] = None
    plots: bool = False
    signed: bool = False
    offline_metrics: Optional[list[str]] = None
    online_metrics: Optional[list[str]] = None


class CorrelationEntryModel(BaseModel):
    offline_metric: str
    online_metric: str
    pearson: float
    spearman: float
    n: int


class CorrelateResponse(BaseModel):
    entries: list[CorrelationEntryModel]
    text_table: str
    detector_aggregates: dict[str, dict[str, Optional[float]]]
    report_csv: Optional[str] = None
    svg_paths: list[str] = Field(default_factory=list)


class ErrorBody(BaseModel):
    error_code: str
    message: str
