"""Per-frame assignment of detections to ground truth.

Greedy matching in descending detection confidence, the convention used by
the KITTI and nuScenes evaluation kits. Matching is per class: a detection
never matches a ground-truth object of another class. Tie-breaks are fixed
(equal confidence: lower detection index; equal criterion value: lower GT
index) so results are deterministic given input order.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

from .core_types import Detection, GroundTruthObject
from .geometry import bev_iou, center_distance_bev, iou_3d


@dataclass(frozen=True)
class MatchResult:
    """One frame's assignment. ``pairs`` holds (gt_index, det_index, value)."""

    pairs: tuple[tuple[int, int, float], ...]
    unmatched_gt: tuple[int, ...]
    unmatched_det: tuple[int, ...]
    gt_weights: tuple[float, ...] = field(default_factory=tuple)
    det_weights: tuple[float, ...] = field(default_factory=tuple)


def _det_order(det: Sequence[Detection]) -> list[int]:
    return sorted(range(len(det)), key=lambda i: (-det[i].confidence, i))


def _finish(
    n_gt: int,
    n_det: int,
    pairs: list[tuple[int, int, float]],
    gt_weights,
    det_weights,
) -> MatchResult:
    matched_gt = {g for g, _, _ in pairs}
    matched_det = {d for _, d, _ in pairs}
    if gt_weights is None:
        gt_weights = (1.0,) * n_gt
    if det_weights is None:
        det_weights = (1.0,) * n_det
    return MatchResult(
        pairs=tuple(pairs),
        unmatched_gt=tuple(i for i in range(n_gt) if i not in matched_gt),
        unmatched_det=tuple(i for i in range(n_det) if i not in matched_det),
        gt_weights=tuple(gt_weights),
        det_weights=tuple(det_weights),
    )


def match_by_iou(
    gt: Sequence[GroundTruthObject],
    det: Sequence[Detection],
    iou_threshold: float = 0.7,
    iou_kind: str = "3d",
    gt_weights: Sequence[float] | None = None,
    det_weights: Sequence[float] | None = None,
) -> MatchResult:
    if not (0.0 < iou_threshold < 1.0):
        raise ValueError(f"iou_threshold must be in (0, 1), got {iou_threshold}")
    iou = {"bev": bev_iou, "3d": iou_3d}[iou_kind]
    pairs: list[tuple[int, int, float]] = []
    used: set[int] = set()
    for di in _det_order(det):
        best_gi, best_val = -1, -1.0
        for gi, g in enumerate(gt):
            if gi in used or g.class_id != det[di].class_id:
                continue
            val = iou(g.box, det[di].box)
            if val >= iou_threshold and val > best_val:
                best_gi, best_val = gi, val
        if best_gi >= 0:
            used.add(best_gi)
            pairs.append((best_gi, di, best_val))
    pairs.sort()
    return _finish(len(gt), len(det), pairs, gt_weights, det_weights)


def match_by_center_distance(
    gt: Sequence[GroundTruthObject],
    det: Sequence[Detection],
    dist_threshold: float = 1.0,
    gt_weights: Sequence[float] | None = None,
    det_weights: Sequence[float] | None = None,
) -> MatchResult:
    if dist_threshold <= 0.0:
        raise ValueError(f"dist_threshold must be > 0, got {dist_threshold}")
    pairs: list[tuple[int, int, float]] = []
    used: set[int] = set()
    for di in _det_order(det):
        best_gi, best_val = -1, math.inf
        for gi, g in enumerate(gt):
            if gi in used or g.class_id != det[di].class_id:
                continue
            val = center_distance_bev(g.box, det[di].box)
            if val <= dist_threshold and val < best_val:
                best_gi, best_val = gi, val
        if best_gi >= 0:
            used.add(best_gi)
            pairs.append((best_gi, di, best_val))
    pairs.sort()
    return _finish(len(gt), len(det), pairs, gt_weights, det_weights)


def inverse_distance_weights(
    gt: Sequence[GroundTruthObject],
    det: Sequence[Detection],
    ego_xy: tuple[float, float] = (0.0, 0.0),
    d_min: float = 1.0,
) -> tuple[tuple[float, ...], tuple[float, ...]]:
    """w = 1 / max(distance_to_ego, d_min) for every GT object and detection.

    ``d_min`` bounds the singularity at zero distance. Detection distance is
    taken from its predicted center.
    """
    if d_min <= 0.0:
        raise ValueError(f"d_min must be > 0, got {d_min}")
    ex, ey = ego_xy

    def weight(x: float, y: float) -> float:
        return 1.0 / max(math.hypot(x - ex, y - ey), d_min)

    gt_w = tuple(weight(*g.box.center_xy) for g in gt)
    det_w = tuple(weight(*d.box.center_xy) for d in det)
    return gt_w, det_w
