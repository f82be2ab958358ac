"""Fixed perception post-processing chain.

Confidence gating, BEV NMS, frame-to-frame association by minimum-cost
assignment on BEV center distance, consecutive-frame confirmation, and the
two-point speed heuristic (last two ground-plane centers divided by the
timestep). Track centers are kept in the world frame so ego motion does not
leak into speed estimates.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .config import TrackerConfig
from .core_types import Detection, EgoPose, FrameRecord, OrientedBox3D
from .geometry import bev_iou

_FORBIDDEN_COST = 1e9


class TrackingError(RuntimeError):
    pass


def nms(dets: Sequence[Detection], iou_threshold: float = 0.2) -> list[Detection]:
    """Greedy BEV NMS; drops any detection overlapping a kept one by more
    than the threshold. Output sorted by descending confidence."""
    if not (0.0 < iou_threshold < 1.0):
        raise ValueError(f"iou_threshold must be in (0, 1), got {iou_threshold}")
    order = sorted(range(len(dets)), key=lambda i: (-dets[i].confidence, i))
    kept: list[Detection] = []
    for i in order:
        if all(bev_iou(dets[i].box, k.box) <= iou_threshold for k in kept):
            kept.append(dets[i])
    return kept


@dataclass
class Track:
    track_id: int
    history: list[tuple[int, OrientedBox3D, float]] = field(default_factory=list)
    world_centers: list[tuple[float, float]] = field(default_factory=list)
    age: int = 0

    @property
    def confirmed(self) -> bool:
        # age counts consecutive associated frames; confirmation threshold
        # is applied by the tracker config.
        return self.age >= 4

    @property
    def last_center(self) -> tuple[float, float]:
        return self.world_centers[-1]


def estimate_speed(track: Track, timestep: float) -> float:
    """L2 norm of the last two ground-plane centers divided by the timestep."""
    if timestep <= 0.0:
        raise ValueError(f"timestep must be > 0, got {timestep}")
    if track.age < 2 or len(track.world_centers) < 2:
        raise TrackingError(f"track {track.track_id} has no speed before its second frame")
    (x0, y0), (x1, y1) = track.world_centers[-2], track.world_centers[-1]
    return math.hypot(x1 - x0, y1 - y0) / timestep


def estimate_velocity(track: Track, timestep: float) -> tuple[float, float]:
    if track.age < 2 or len(track.world_centers) < 2:
        raise TrackingError(f"track {track.track_id} has no velocity before its second frame")
    (x0, y0), (x1, y1) = track.world_centers[-2], track.world_centers[-1]
    return ((x1 - x0) / timestep, (y1 - y0) / timestep)


def associate(
    tracks: Sequence[Track],
    det_centers: Sequence[tuple[float, float]],
    gate: float,
) -> tuple[list[tuple[int, int, float]], list[int], list[int]]:
    """Minimum-total-cost one-to-one assignment under a distance gate.

    Returns (pairs as (track_idx, det_idx, cost), unmatched track indices,
    unmatched det indices). Maximizes the number of in-gate pairs, then
    minimizes their total cost.
    """
    if gate <= 0.0:
        raise ValueError(f"gate must be > 0, got {gate}")
    if not tracks or not det_centers:
        return [], list(range(len(tracks))), list(range(len(det_centers)))
    cost = np.empty((len(tracks), len(det_centers)))
    for ti, track in enumerate(tracks):
        tx, ty = track.last_center
        for di, (dx, dy) in enumerate(det_centers):
            cost[ti, di] = math.hypot(tx - dx, ty - dy)
    gated = np.where(cost > gate, _FORBIDDEN_COST, cost)
    rows, cols = linear_sum_assignment(gated)
    pairs = [
        (int(ti), int(di), float(cost[ti, di]))
        for ti, di in zip(rows, cols)
        if cost[ti, di] <= gate
    ]
    matched_t = {p[0] for p in pairs}
    matched_d = {p[1] for p in pairs}
    unmatched_t = [i for i in range(len(tracks)) if i not in matched_t]
    unmatched_d = [i for i in range(len(det_centers)) if i not in matched_d]
    return pairs, unmatched_t, unmatched_d


@dataclass(frozen=True)
class TrackedDetection:
    detection: Detection  # velocity filled in (world-frame BEV)
    track_id: int
    speed: float

    @property
    def source(self) -> Detection:
        return self.detection


def to_world_xy(box: OrientedBox3D, pose: EgoPose) -> tuple[float, float]:
    c = math.cos(pose.heading)
    s = math.sin(pose.heading)
    x, y = box.center_xy
    return (pose.x + c * x - s * y, pose.y + s * x + c * y)


class Tracker:
    """Single-route tracker; feed frames in strictly increasing order."""

    def __init__(self, config: TrackerConfig | None = None, timestep: float = 0.1):
        self.config = config or TrackerConfig()
        self.timestep = timestep
        self.tracks: list[Track] = []
        self._next_id = 0
        self._last_frame_index: Optional[int] = None

    def step(self, frame: FrameRecord) -> list[TrackedDetection]:
        cfg = self.config
        if self._last_frame_index is not None and frame.frame_index <= self._last_frame_index:
            raise TrackingError(
                f"frames out of order: {frame.frame_index} after {self._last_frame_index}"
            )
        if self._last_frame_index is not None and frame.frame_index != self._last_frame_index + 1:
            # A gap breaks every track's consecutive-frame streak.
            self.tracks = []
        self._last_frame_index = frame.frame_index

        dets = [d for d in frame.detections if d.confidence >= cfg.conf_threshold]
        dets = nms(dets, cfg.nms_iou)
        centers = [to_world_xy(d.box, frame.ego_pose) for d in dets]

        pairs, unmatched_t, unmatched_d = associate(self.tracks, centers, cfg.gate_m)

        survivors: list[Track] = []
        emitted: list[TrackedDetection] = []
        for ti, di, _ in sorted(pairs):
            track = self.tracks[ti]
            track.history.append((frame.frame_index, dets[di].box, dets[di].confidence))
            track.world_centers.append(centers[di])
            track.age += 1
            survivors.append(track)
            if track.age >= cfg.confirm_frames:
                velocity = estimate_velocity(track, self.timestep)
                emitted.append(
                    TrackedDetection(
                        detection=replace(dets[di], velocity=velocity),
                        track_id=track.track_id,
                        speed=math.hypot(*velocity),
                    )
                )
        # Unmatched tracks terminate immediately; no coasting.
        for di in unmatched_d:
            track = Track(track_id=self._next_id, age=1)
            self._next_id += 1
            track.history.append((frame.frame_index, dets[di].box, dets[di].confidence))
            track.world_centers.append(centers[di])
            survivors.append(track)
        survivors.sort(key=lambda t: t.track_id)
        self.tracks = survivors
        emitted.sort(key=lambda e: e.track_id)
        return emitted


def fill_velocities(
    frames: Sequence[FrameRecord],
    config: TrackerConfig | None = None,
    timestep: float = 0.1,
) -> list[FrameRecord]:
    """Run the tracker over a route and copy track velocities onto the raw
    detections that produced them. Detections without a confirmed track keep
    velocity None."""
    tracker = Tracker(config, timestep)
    out: list[FrameRecord] = []
    for frame in frames:
        emitted = tracker.step(frame)
        by_key = {
            (e.detection.box, e.detection.confidence, e.detection.class_id): e.detection.velocity
            for e in emitted
        }
        new_dets = []
        for det in frame.detections:
            if det.velocity is None:
                vel = by_key.get((det.box, det.confidence, det.class_id))
                if vel is not None:
                    det = replace(det, velocity=vel)
            new_dets.append(det)
        out.append(replace(frame, detections=tuple(new_dets)))
    return out
