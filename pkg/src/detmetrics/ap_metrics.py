"""Precision-recall accumulation and the AP family: AP-40, AOS, ID-AP.

AP uses 40 equidistant recall levels with max-to-the-right interpolated
precision. AOS replaces the true-positive mass in the precision numerator
with the orientation similarity s = (1 + cos(dyaw)) / 2 of each true
positive. ID-AP is AP over inverse-distance-weighted counts.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .config import MatchingConfig
from .core_types import FrameRecord
from .geometry import yaw_delta
from .matching import (
    MatchResult,
    inverse_distance_weights,
    match_by_iou,
)

RECALL_LEVELS = tuple(k / 40.0 for k in range(1, 41))
_RECALL_EPS = 1e-12


class ZeroGroundTruthError(ValueError):
    """Recall is undefined: the accumulated GT mass is zero."""


def orientation_similarity(delta_yaw: float) -> float:
    return 0.5 * (1.0 + math.cos(delta_yaw))


@dataclass(frozen=True)
class DetectionOutcome:
    """One pooled detection: its confidence, weight, and match outcome."""

    confidence: float
    true_positive: bool
    weight: float = 1.0
    orientation_similarity: float | None = None


@dataclass(frozen=True)
class PRCurve:
    recalls: tuple[float, ...]
    precisions: tuple[float, ...]
    confidences: tuple[float, ...]
    gt_mass: float
    det_mass: float
    heading_precisions: tuple[float, ...] | None = None


def accumulate_pr(outcomes: Iterable[DetectionOutcome], gt_mass: float) -> PRCurve:
    """Pool detections, sort by descending confidence, accumulate weighted PR."""
    if gt_mass <= 0.0:
        raise ZeroGroundTruthError("cannot accumulate a PR curve with zero GT mass")
    ordered = sorted(outcomes, key=lambda o: -o.confidence)
    recalls, precisions, confidences, heading = [], [], [], []
    tp_w = fp_w = sim_w = 0.0
    have_heading = True
    for out in ordered:
        if out.true_positive:
            tp_w += out.weight
            if out.orientation_similarity is None:
                have_heading = False
            else:
                sim_w += out.weight * out.orientation_similarity
        else:
            fp_w += out.weight
        recalls.append(tp_w / gt_mass)
        precisions.append(tp_w / (tp_w + fp_w))
        heading.append(sim_w / (tp_w + fp_w))
        confidences.append(out.confidence)
    return PRCurve(
        recalls=tuple(recalls),
        precisions=tuple(precisions),
        confidences=tuple(confidences),
        gt_mass=gt_mass,
        det_mass=tp_w + fp_w,
        heading_precisions=tuple(heading) if have_heading else None,
    )


def _interpolated_mean(recalls: Sequence[float], values: Sequence[float]) -> float:
    total = 0.0
    for level in RECALL_LEVELS:
        best = 0.0
        for r, v in zip(recalls, values):
            if r >= level - _RECALL_EPS and v > best:
                best = v
        total += best
    return total / len(RECALL_LEVELS)


def ap_40(curve: PRCurve) -> float:
    """Mean interpolated precision over the 40 equidistant recall levels."""
    return _interpolated_mean(curve.recalls, curve.precisions)


def aos(curve: PRCurve) -> float:
    if curve.heading_precisions is None:
        raise ValueError("curve carries no orientation similarity for its true positives")
    return _interpolated_mean(curve.recalls, curve.heading_precisions)


# ---------------------------------------------------------------------------
# Route-level helpers operating on FrameRecord sequences.


def classes_present(frames: Sequence[FrameRecord]) -> list[str]:
    seen: dict[str, None] = {}
    for frame in frames:
        for g in frame.gt_objects:
            seen.setdefault(g.class_id, None)
    return list(seen)


def frame_outcomes(
    frame: FrameRecord,
    class_id: str,
    match: MatchResult,
) -> tuple[list[DetectionOutcome], float]:
    """Convert one frame's match result into pooled outcomes and GT mass."""
    gt = frame.gt_objects
    det = frame.detections
    matched = {di: (gi, val) for gi, di, val in match.pairs}
    outcomes = []
    for di, d in enumerate(det):
        if d.class_id != class_id:
            continue
        if di in matched:
            gi, _ = matched[di]
            sim = orientation_similarity(yaw_delta(gt[gi].box.yaw, d.box.yaw))
            outcomes.append(
                DetectionOutcome(d.confidence, True, match.det_weights[di], sim)
            )
        else:
            outcomes.append(DetectionOutcome(d.confidence, False, match.det_weights[di]))
    gt_mass = sum(
        w for g, w in zip(gt, match.gt_weights) if g.class_id == class_id
    )
    return outcomes, gt_mass


def _route_curve(
    frames: Sequence[FrameRecord],
    class_id: str,
    cfg: MatchingConfig,
    weighted: bool,
) -> PRCurve | None:
    outcomes: list[DetectionOutcome] = []
    gt_mass = 0.0
    for frame in frames:
        if weighted:
            gt_w, det_w = inverse_distance_weights(
                frame.gt_objects, frame.detections, d_min=cfg.d_min
            )
        else:
            gt_w = det_w = None
        match = match_by_iou(
            frame.gt_objects,
            frame.detections,
            iou_threshold=cfg.iou_threshold,
            iou_kind=cfg.iou_kind,
            gt_weights=gt_w,
            det_weights=det_w,
        )
        frame_out, frame_mass = frame_outcomes(frame, class_id, match)
        outcomes.extend(frame_out)
        gt_mass += frame_mass
    if gt_mass <= 0.0:
        return None
    return accumulate_pr(outcomes, gt_mass)


def _mean_over_classes(frames, cfg, weighted, scorer) -> float:
    values = []
    for class_id in classes_present(frames):
        curve = _route_curve(frames, class_id, cfg, weighted)
        if curve is not None:
            values.append(scorer(curve))
    if not values:
        raise ZeroGroundTruthError("no ground-truth objects in any frame")
    return sum(values) / len(values)


def route_ap(frames: Sequence[FrameRecord], cfg: MatchingConfig | None = None) -> float:
    """mAP-40 under the IoU criterion, averaged over classes present in GT."""
    return _mean_over_classes(frames, cfg or MatchingConfig(), False, ap_40)


def route_aos(frames: Sequence[FrameRecord], cfg: MatchingConfig | None = None) -> float:
    return _mean_over_classes(frames, cfg or MatchingConfig(), False, aos)


def id_ap(frames: Sequence[FrameRecord], cfg: MatchingConfig | None = None) -> float:
    """AP-40 over inverse-distance-weighted PR accumulation."""
    return _mean_over_classes(frames, cfg or MatchingConfig(), True, ap_40)
