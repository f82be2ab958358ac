"""FastAPI service wrapping the evaluation toolkit.

The CLI is a thin client of this app; endpoints operate on server-local
paths and return the key tables inline.
"""
from __future__ import annotations

import dataclasses
from pathlib import Path

from fastapi import FastAPI, HTTPException

from .. import __version__
from ..config import ConfigError, load_config
from ..core_types import LogParseError, LogValidationError, save_route_log
from ..correlation import (
    DegenerateInputError,
    InsufficientDataError,
    OFFLINE_COLUMNS,
    ONLINE_COLUMNS,
    aggregate_per_detector,
    build_report,
    format_report_text,
    read_metric_table,
    report_to_csv,
    write_metric_table,
    write_scatter_svgs,
)
from ..pipeline import evaluate_log_files
from ..synth import run_study
from .schemas import (
    CorrelateRequest,
    CorrelateResponse,
    CorrelationEntryModel,
    EvaluateRequest,
    EvaluateResponse,
    HealthResponse,
    MetricRow,
    SynthRequest,
    SynthResponse,
    SynthSummary,
)

app = FastAPI(title="detmetrics", version=__version__)

_ERROR_CODES = {
    LogParseError: "E_PARSE",
    LogValidationError: "E_VALIDATE",
    ConfigError: "E_CONFIG",
    InsufficientDataError: "E_INSUFFICIENT_DETECTORS",
    DegenerateInputError: "E_DEGENERATE_INPUT",
    FileNotFoundError: "E_NOT_FOUND",
    ValueError: "E_INVALID",
}


def _fail(exc: Exception) -> HTTPException:
    for cls, code in _ERROR_CODES.items():
        if isinstance(exc, cls):
            return HTTPException(
                status_code=400, detail={"error_code": code, "message": str(exc)}
            )
    raise exc


@app.get("/health", response_model=HealthResponse)
def health() -> HealthResponse:
    return HealthResponse(version=__version__)


@app.post("/synth", response_model=SynthResponse)
def synth(req: SynthRequest) -> SynthResponse:
    try:
        cfg = load_config(req.config_path, req.overrides)
        synth_cfg = dataclasses.replace(
            cfg.synth,
            n_routes=req.n_routes,
            n_frames=req.n_frames,
            n_models=req.n_models,
            density=req.density,
            seed=req.seed,
            timestep=req.timestep,
        )
        cfg = dataclasses.replace(cfg, synth=synth_cfg)
        logs = run_study(cfg)
    except (ValueError, FileNotFoundError) as exc:
        raise _fail(exc)

    out_dir = Path(req.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    files = []
    for route in logs:
        path = out_dir / f"{route.detector_id}__{route.route_id}.jsonl"
        save_route_log(route, path)
        files.append(str(path))

    n_frames = sum(len(r.frames) for r in logs)
    n_gt = sum(len(f.gt_objects) for r in logs for f in r.frames)
    n_det_tp_possible = n_gt
    n_det = sum(len(f.detections) for r in logs for f in r.frames)
    miss_rate = 1.0 - min(1.0, n_det / n_det_tp_possible) if n_det_tp_possible else 0.0
    return SynthResponse(
        files=files,
        summary=SynthSummary(
            n_files=len(files),
            detectors=sorted({r.detector_id for r in logs}),
            routes=sorted({r.route_id for r in logs}),
            mean_objects_per_frame=n_gt / n_frames if n_frames else 0.0,
            realized_miss_rate=miss_rate,
        ),
    )


@app.post("/evaluate", response_model=EvaluateResponse)
def evaluate(req: EvaluateRequest) -> EvaluateResponse:
    try:
        cfg = load_config(req.config_path, req.overrides)
        if req.iou_kind is not None:
            if req.iou_kind not in ("bev", "3d"):
                raise ConfigError(f"iou_kind must be 'bev' or '3d', got {req.iou_kind!r}")
            cfg = dataclasses.replace(
                cfg, matching=dataclasses.replace(cfg.matching, iou_kind=req.iou_kind)
            )
        paths = list(req.log_paths)
        if req.log_dir:
            paths.extend(sorted(str(p) for p in Path(req.log_dir).glob("*.jsonl")))
        if not paths:
            raise ValueError("no route logs given (log_paths empty, log_dir empty or unset)")
        table = evaluate_log_files(paths, cfg, jobs=req.jobs)
    except (ValueError, FileNotFoundError) as exc:
        raise _fail(exc)

    if req.metrics:
        keep = set(req.metrics) | set(ONLINE_COLUMNS)
        for row in table.rows.values():
            for col in table.columns:
                if col not in keep:
                    row[col] = None

    csv_path = None
    if req.out_csv:
        csv_path = str(write_metric_table(table, req.out_csv))
    rows = [
        MetricRow(detector_id=det, route_id=route, values=table.rows[(det, route)])
        for det, route in sorted(table.rows)
    ]
    return EvaluateResponse(csv_path=csv_path, columns=list(table.columns), rows=rows)


@app.post("/correlate", response_model=CorrelateResponse)
def correlate(req: CorrelateRequest) -> CorrelateResponse:
    try:
        table = read_metric_table(req.table_csv)
        aggregates = aggregate_per_detector(table)
        offline = tuple(req.offline_metrics or [c for c in OFFLINE_COLUMNS if c in table.columns])
        online = tuple(req.online_metrics or [c for c in ONLINE_COLUMNS if c in table.columns])
        report = build_report(aggregates, offline, online, signed=req.signed)
    except (ValueError, FileNotFoundError) as exc:
        raise _fail(exc)

    report_csv = None
    svg_paths: list[str] = []
    if req.out_prefix:
        prefix = Path(req.out_prefix)
        prefix.parent.mkdir(parents=True, exist_ok=True)
        report_csv = str(report_to_csv(report, prefix.with_suffix(".csv")))
        Path(prefix.with_suffix(".txt")).write_text(format_report_text(report))
        if req.plots:
            svg_paths = [
                str(p)
                for p in write_scatter_svgs(aggregates, report, prefix.parent / f"{prefix.name}_plots")
            ]

    def coeff(v: float) -> float:
        return v if req.signed else abs(v)

    return CorrelateResponse(
        entries=[
            CorrelationEntryModel(
                offline_metric=e.offline_metric,
                online_metric=e.online_metric,
                pearson=coeff(e.pearson_r),
                spearman=coeff(e.spearman_rho),
                n=e.n,
            )
            for e in report.entries
        ],
        text_table=format_report_text(report),
        detector_aggregates={d: dict(v) for d, v in aggregates.items()},
        report_csv=report_csv,
        svg_paths=svg_paths,
    )
