"""Displacement errors between paired planner trajectories."""
from __future__ import annotations

import math
from typing import Sequence

from .core_types import FrameRecord, RouteLog, Trajectory


class TrajectoryMismatchError(ValueError):
    pass


class MissingTrajectoriesError(ValueError):
    """No frame of the route carries a trajectory pair."""


def _check_pair(t_gt: Trajectory, t_pred: Trajectory) -> None:
    if len(t_gt) != len(t_pred):
        raise TrajectoryMismatchError(
            f"trajectory lengths differ: {len(t_gt)} vs {len(t_pred)}"
        )
    if t_gt.timestep != t_pred.timestep:
        raise TrajectoryMismatchError(
            f"trajectory timesteps differ: {t_gt.timestep} vs {t_pred.timestep}"
        )


def frame_ade(t_gt: Trajectory, t_pred: Trajectory) -> float:
    """Mean point-wise L2 distance between paired waypoints."""
    _check_pair(t_gt, t_pred)
    total = 0.0
    for (ax, ay), (bx, by) in zip(t_gt.waypoints, t_pred.waypoints):
        total += math.hypot(ax - bx, ay - by)
    return total / len(t_gt)


def frame_fde(t_gt: Trajectory, t_pred: Trajectory) -> float:
    """L2 distance between the final waypoints."""
    _check_pair(t_gt, t_pred)
    (ax, ay), (bx, by) = t_gt.waypoints[-1], t_pred.waypoints[-1]
    return math.hypot(ax - bx, ay - by)


def _route_mean(frames: Sequence[FrameRecord], per_frame) -> float:
    values = [
        per_frame(f.traj_gt_conditioned, f.traj_perception_conditioned)
        for f in frames
        if f.has_trajectories
    ]
    if not values:
        raise MissingTrajectoriesError("no frame carries both planner trajectories")
    return sum(values) / len(values)


def route_ade(route: RouteLog) -> float:
    """Mean of per-frame ADEs over frames where both trajectories exist."""
    return _route_mean(route.frames, frame_ade)


def route_fde(route: RouteLog) -> float:
    return _route_mean(route.frames, frame_fde)
