"""Route-level orchestration: logs in, metric rows out."""
from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Sequence

from . import ap_metrics, driving_eval, nds_metrics, planner_metrics
from .config import EvalConfig
from .core_types import RouteLog, load_route_log
from .correlation import ALL_COLUMNS, MetricTable
from .tracking import fill_velocities

log = logging.getLogger(__name__)


def evaluate_route(route: RouteLog, cfg: EvalConfig | None = None) -> dict[str, float | None]:
    """Every offline and online metric for one route; failed metrics become
    missing cells (None), never zeros."""
    cfg = cfg or EvalConfig()
    frames = route.frames
    if not any(d.velocity is not None for f in frames for d in f.detections):
        # Raw detections without tracked velocities: run the tracker.
        frames = tuple(fill_velocities(frames, cfg.tracker, route.timestep))

    row: dict[str, float | None] = {c: None for c in ALL_COLUMNS}

    def attempt(name: str, fn) -> None:
        try:
            row[name] = float(fn())
        except (ValueError, ZeroDivisionError) as exc:
            log.warning("route %s/%s: %s unavailable: %s",
                        route.detector_id, route.route_id, name, exc)

    attempt("ap", lambda: ap_metrics.route_ap(frames, cfg.matching))
    attempt("aos", lambda: ap_metrics.route_aos(frames, cfg.matching))
    attempt("id_ap", lambda: ap_metrics.id_ap(frames, cfg.matching))

    def nds_family():
        vals = nds_metrics.route_nds(frames, cfg.nds, cfg.matching)
        for key, value in vals.items():
            row[key] = float(value)
        return vals["nds"]

    try:
        nds_family()
    except (ValueError, ZeroDivisionError) as exc:
        log.warning("route %s/%s: nds family unavailable: %s",
                    route.detector_id, route.route_id, exc)

    attempt("ade", lambda: planner_metrics.route_ade(route))
    attempt("fde", lambda: planner_metrics.route_fde(route))

    is_ = driving_eval.infraction_score(route.infractions, cfg.penalties)
    row["rc"] = route.route_completion
    row["infraction_score"] = is_
    row["ds"] = driving_eval.driving_score(route.route_completion, is_)
    row["num_collisions"] = float(driving_eval.collision_count(route.infractions))
    return row


def _evaluate_one(args) -> tuple[str, str, dict]:
    route, cfg = args
    return route.detector_id, route.route_id, evaluate_route(route, cfg)


def evaluate_routes(
    routes: Sequence[RouteLog], cfg: EvalConfig | None = None, jobs: int = 1
) -> MetricTable:
    cfg = cfg or EvalConfig()
    table = MetricTable(columns=ALL_COLUMNS)
    work = [(route, cfg) for route in routes]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_evaluate_one, work))
    else:
        results = [_evaluate_one(w) for w in work]
    # Gather-then-sort keeps output independent of worker scheduling.
    for detector_id, route_id, row in sorted(results, key=lambda r: (r[0], r[1])):
        table.add_row(detector_id, route_id, row)
    return table


def evaluate_log_files(
    paths: Sequence[str | Path], cfg: EvalConfig | None = None, jobs: int = 1
) -> MetricTable:
    routes = [load_route_log(p) for p in paths]
    return evaluate_routes(routes, cfg, jobs)
