"""Composite detection score built on center-distance AP plus TP error terms.

The matching criterion is BEV center distance at a single fixed threshold
(default 1 m). Four true-positive error terms are averaged over all TP pairs
of a route: translation (m), scale (1 - aligned IoU), orientation (rad), and
velocity (m/s). Each term is normalized into [0, 1] and the composite gives
the TP terms, in total, the same weight as the AP term. The attribute error
of the original formulation is dataset-specific and excluded, so the
composite has 8 parts: 4 x AP + the 4 TP terms.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .config import MatchingConfig, NdsConfig
from .core_types import Detection, FrameRecord, GroundTruthObject
from .geometry import aligned_iou, center_distance_bev, yaw_delta
from .matching import inverse_distance_weights, match_by_center_distance
from .ap_metrics import (
    DetectionOutcome,
    ZeroGroundTruthError,
    accumulate_pr,
    ap_40,
    classes_present,
)


@dataclass(frozen=True)
class TPErrors:
    ate: float  # meters
    ase: float  # 1 - aligned IoU, in [0, 1]
    aoe: float  # radians, in [0, pi]
    ave: float  # m/s
    no_tp: bool = False


@dataclass(frozen=True)
class TPPair:
    gt: GroundTruthObject
    det: Detection
    weight: float = 1.0


def center_distance_ap(
    frames: Sequence[FrameRecord],
    threshold: float = 1.0,
    weighted: bool = False,
    d_min: float = 1.0,
) -> float:
    """mAP-40 with BEV center distance as the TP criterion."""
    if threshold <= 0.0:
        raise ValueError(f"threshold must be > 0, got {threshold}")
    values = []
    for class_id in classes_present(frames):
        outcomes: list[DetectionOutcome] = []
        gt_mass = 0.0
        for frame in frames:
            gt_w = det_w = None
            if weighted:
                gt_w, det_w = inverse_distance_weights(
                    frame.gt_objects, frame.detections, d_min=d_min
                )
            match = match_by_center_distance(
                frame.gt_objects,
                frame.detections,
                dist_threshold=threshold,
                gt_weights=gt_w,
                det_weights=det_w,
            )
            matched = {di for _, di, _ in match.pairs}
            for di, det in enumerate(frame.detections):
                if det.class_id != class_id:
                    continue
                outcomes.append(
                    DetectionOutcome(det.confidence, di in matched, match.det_weights[di])
                )
            gt_mass += sum(
                w
                for g, w in zip(frame.gt_objects, match.gt_weights)
                if g.class_id == class_id
            )
        if gt_mass > 0.0:
            values.append(ap_40(accumulate_pr(outcomes, gt_mass)))
    if not values:
        raise ZeroGroundTruthError("no ground-truth objects in any frame")
    return sum(values) / len(values)


def route_tp_pairs(
    frames: Sequence[FrameRecord],
    threshold: float = 1.0,
    weighted: bool = False,
    d_min: float = 1.0,
) -> list[TPPair]:
    """All TP pairs of a route at the fixed operating set, with GT weights."""
    pairs: list[TPPair] = []
    for frame in frames:
        gt_w = None
        if weighted:
            gt_w, _ = inverse_distance_weights(frame.gt_objects, frame.detections, d_min=d_min)
        match = match_by_center_distance(
            frame.gt_objects, frame.detections, dist_threshold=threshold, gt_weights=gt_w
        )
        for gi, di, _ in match.pairs:
            pairs.append(
                TPPair(frame.gt_objects[gi], frame.detections[di], match.gt_weights[gi])
            )
    return pairs


def tp_errors(
    pairs: Sequence[TPPair],
    threshold: float = 1.0,
    v_cap: float = 10.0,
) -> TPErrors:
    """Weighted mean TP errors; worst-case caps and a flag when no pairs exist."""
    if not pairs:
        return TPErrors(ate=threshold, ase=1.0, aoe=math.pi, ave=v_cap, no_tp=True)
    w_sum = ate = ase = aoe = 0.0
    vel_w_sum = ave = 0.0
    for pair in pairs:
        w = pair.weight
        w_sum += w
        ate += w * center_distance_bev(pair.gt.box, pair.det.box)
        ase += w * (1.0 - aligned_iou(pair.gt.box, pair.det.box))
        aoe += w * yaw_delta(pair.gt.box.yaw, pair.det.box.yaw)
        if pair.det.velocity is not None:
            vel_w_sum += w
            dvx = pair.gt.velocity[0] - pair.det.velocity[0]
            dvy = pair.gt.velocity[1] - pair.det.velocity[1]
            ave += w * math.hypot(dvx, dvy)
    return TPErrors(
        ate=ate / w_sum,
        ase=ase / w_sum,
        aoe=aoe / w_sum,
        # Velocity is only defined for detections a tracker has aged; pairs
        # without one are excluded. No velocities at all scores worst case.
        ave=ave / vel_w_sum if vel_w_sum > 0.0 else v_cap,
    )


def _tp_errors_recall_sweep(
    pairs: Sequence[TPPair], gt_count: int, threshold: float, v_cap: float
) -> TPErrors:
    """Cumulative-mean variant: average errors over achieved recall >= 10%."""
    if not pairs or gt_count <= 0:
        return tp_errors(pairs, threshold, v_cap)
    ordered = sorted(pairs, key=lambda p: -p.det.confidence)
    sweep: list[TPErrors] = []
    for k in range(1, len(ordered) + 1):
        if k / gt_count >= 0.1:
            sweep.append(tp_errors(ordered[:k], threshold, v_cap))
    if not sweep:
        sweep.append(tp_errors(ordered, threshold, v_cap))
    n = len(sweep)
    return TPErrors(
        ate=sum(e.ate for e in sweep) / n,
        ase=sum(e.ase for e in sweep) / n,
        aoe=sum(e.aoe for e in sweep) / n,
        ave=sum(e.ave for e in sweep) / n,
    )


def nds(map_cd: float, errors: TPErrors, cfg: NdsConfig | None = None) -> float:
    """Composite score: (4 * mAP + sum of weighted TP scores) / (4 + sum of weights)."""
    cfg = cfg or NdsConfig()
    if not (0.0 <= map_cd <= 1.0):
        raise ValueError(f"map_cd out of range: {map_cd}")
    normalized = (
        errors.ate / cfg.threshold_m,
        errors.ase,
        errors.aoe / math.pi,
        errors.ave / cfg.v_cap,
    )
    num = 4.0 * map_cd
    den = 4.0
    for w, x in zip(cfg.tp_weights, normalized):
        num += w * (1.0 - min(1.0, x))
        den += w
    return num / den


def _route_errors(frames, cfg: NdsConfig, weighted: bool, d_min: float) -> TPErrors:
    pairs = route_tp_pairs(frames, cfg.threshold_m, weighted=weighted, d_min=d_min)
    if cfg.recall_sweep_mode:
        gt_count = sum(len(f.gt_objects) for f in frames)
        return _tp_errors_recall_sweep(pairs, gt_count, cfg.threshold_m, cfg.v_cap)
    return tp_errors(pairs, cfg.threshold_m, cfg.v_cap)


def route_nds(
    frames: Sequence[FrameRecord],
    cfg: NdsConfig | None = None,
    matching: MatchingConfig | None = None,
) -> dict:
    """Full family for one route: map_cd, the four errors, nds, id_nds."""
    cfg = cfg or NdsConfig()
    d_min = (matching or MatchingConfig()).d_min
    map_cd = center_distance_ap(frames, cfg.threshold_m)
    errors = _route_errors(frames, cfg, weighted=False, d_min=d_min)
    composite = nds(map_cd, errors, cfg)
    return {
        "map_cd": map_cd,
        "ate": errors.ate,
        "ase": errors.ase,
        "aoe": errors.aoe,
        "ave": errors.ave,
        "nds": composite,
        "id_nds": id_nds(frames, cfg, d_min=d_min),
    }


def id_nds(frames: Sequence[FrameRecord], cfg: NdsConfig | None = None, d_min: float = 1.0) -> float:
    """Composite with inverse-distance-weighted AP and TP error means."""
    cfg = cfg or NdsConfig()
    map_cd = center_distance_ap(frames, cfg.threshold_m, weighted=True, d_min=d_min)
    errors = _route_errors(frames, cfg, weighted=True, d_min=d_min)
    return nds(map_cd, errors, cfg)
