"""Small factories shared across test modules."""
from __future__ import annotations

from detmetrics.core_types import (
    Detection,
    EgoPose,
    FrameRecord,
    GroundTruthObject,
    OrientedBox3D,
    RouteLog,
    Trajectory,
)


def box(x=0.0, y=0.0, z=1.0, length=4.0, width=2.0, height=2.0, yaw=0.0):
    return OrientedBox3D((x, y, z), (length, width, height), yaw)


def gt(b=None, class_id="vehicle", object_id="obj_0", velocity=(0.0, 0.0), **kw):
    return GroundTruthObject(b or box(**kw), class_id, object_id, velocity)


def det(b=None, conf=1.0, class_id="vehicle", velocity=None, **kw):
    return Detection(b or box(**kw), conf, class_id, velocity)


def frame(idx=0, gts=(), dets=(), traj_gt=None, traj_pred=None, ego=(0.0, 0.0, 0.0), time=None):
    return FrameRecord(
        frame_index=idx,
        time=idx * 0.1 if time is None else time,
        ego_pose=EgoPose(*ego),
        gt_objects=tuple(gts),
        detections=tuple(dets),
        traj_gt_conditioned=traj_gt,
        traj_perception_conditioned=traj_pred,
    )


def route(frames, rc=100.0, infractions=(), route_id="route_a", detector_id="det_a", timestep=0.1):
    return RouteLog(
        route_id=route_id,
        detector_id=detector_id,
        frames=tuple(frames),
        route_completion=rc,
        infractions=tuple(infractions),
        timestep=timestep,
    )


def traj(points, timestep=0.5):
    return Trajectory(tuple(tuple(p) for p in points), timestep)
