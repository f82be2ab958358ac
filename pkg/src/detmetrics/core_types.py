"""Shared data model and route-log I/O.

A route log is a JSON-lines file. Line 1 is the route header::

    {"route_id": ..., "detector_id": ..., "route_completion": ...,
     "timestep": ..., "infractions": [{"kind": ..., "frame_index": ...}, ...]}

Every subsequent line is one frame::

    {"frame_index": ..., "time": ..., "ego_pose": [x, y, heading],
     "gt_objects": [...], "detections": [...],
     "traj_gt": {"timestep": ..., "waypoints": [[x, y], ...]} | null,
     "traj_pred": {...} | null}

Conventions: right-handed ego frame, x forward, y left, yaw counter-clockwise
about z from +x, angles in radians, distances in meters. Boxes are stored in
the ego frame of their frame's ``ego_pose``; ``ego_pose`` itself is a world
2D pose. Object velocities are world-frame BEV vectors in m/s. Trajectories
are BEV waypoints in the ego frame at the frame's timestamp.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Optional

TWO_PI = 2.0 * math.pi


class LogError(ValueError):
    """Base class for route-log problems."""


class LogParseError(LogError):
    """Malformed JSON or a missing/ill-typed field."""


class LogValidationError(LogError):
    """Well-formed input violating a type invariant."""


def normalize_yaw(theta: float) -> float:
    """Wrap an angle into (-pi, pi]."""
    if not isinstance(theta, (int, float)) or not math.isfinite(theta):
        raise LogValidationError(f"yaw must be finite, got {theta!r}")
    wrapped = math.remainder(float(theta), TWO_PI)
    if wrapped <= -math.pi:
        wrapped += TWO_PI
    return wrapped


def _check_finite(name: str, values) -> None:
    for v in values:
        if not isinstance(v, (int, float)) or not math.isfinite(v):
            raise LogValidationError(f"{name} must be finite, got {v!r}")


@dataclass(frozen=True)
class OrientedBox3D:
    """Yaw-rotated 3D box: center (x, y, z), dims (length, width, height)."""

    center: tuple[float, float, float]
    dims: tuple[float, float, float]
    yaw: float

    def __post_init__(self):
        center = tuple(float(v) for v in self.center)
        dims = tuple(float(v) for v in self.dims)
        if len(center) != 3 or len(dims) != 3:
            raise LogValidationError("center and dims must be 3-vectors")
        _check_finite("center", center)
        _check_finite("dims", dims)
        if min(dims) <= 0.0:
            raise LogValidationError(f"dims must be strictly positive, got {dims}")
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "yaw", normalize_yaw(self.yaw))

    @property
    def center_xy(self) -> tuple[float, float]:
        return (self.center[0], self.center[1])

    @property
    def z_interval(self) -> tuple[float, float]:
        half = 0.5 * self.dims[2]
        return (self.center[2] - half, self.center[2] + half)

    def to_json(self) -> dict:
        return {"center": list(self.center), "dims": list(self.dims), "yaw": self.yaw}

    @classmethod
    def from_json(cls, obj: dict) -> "OrientedBox3D":
        return cls(tuple(obj["center"]), tuple(obj["dims"]), obj["yaw"])


@dataclass(frozen=True)
class Detection:
    box: OrientedBox3D
    confidence: float
    class_id: str
    velocity: Optional[tuple[float, float]] = None

    def __post_init__(self):
        conf = float(self.confidence)
        if not math.isfinite(conf) or not (0.0 <= conf <= 1.0):
            raise LogValidationError(f"confidence out of range: {self.confidence!r}")
        object.__setattr__(self, "confidence", conf)
        if self.velocity is not None:
            vel = tuple(float(v) for v in self.velocity)
            if len(vel) != 2:
                raise LogValidationError("velocity must be a 2-vector")
            _check_finite("velocity", vel)
            object.__setattr__(self, "velocity", vel)

    def to_json(self) -> dict:
        rec = self.box.to_json()
        rec["confidence"] = self.confidence
        rec["class_id"] = self.class_id
        rec["velocity"] = list(self.velocity) if self.velocity is not None else None
        return rec

    @classmethod
    def from_json(cls, obj: dict) -> "Detection":
        vel = obj.get("velocity")
        return cls(
            box=OrientedBox3D.from_json(obj),
            confidence=obj["confidence"],
            class_id=str(obj["class_id"]),
            velocity=tuple(vel) if vel is not None else None,
        )


@dataclass(frozen=True)
class GroundTruthObject:
    box: OrientedBox3D
    class_id: str
    object_id: str
    velocity: tuple[float, float]

    def __post_init__(self):
        vel = tuple(float(v) for v in self.velocity)
        if len(vel) != 2:
            raise LogValidationError("velocity must be a 2-vector")
        _check_finite("velocity", vel)
        object.__setattr__(self, "velocity", vel)

    @property
    def distance_to_ego(self) -> float:
        """BEV distance to the ego origin (boxes live in the ego frame)."""
        x, y = self.box.center_xy
        return math.hypot(x, y)

    def to_json(self) -> dict:
        rec = self.box.to_json()
        rec["class_id"] = self.class_id
        rec["object_id"] = self.object_id
        rec["velocity"] = list(self.velocity)
        return rec

    @classmethod
    def from_json(cls, obj: dict) -> "GroundTruthObject":
        return cls(
            box=OrientedBox3D.from_json(obj),
            class_id=str(obj["class_id"]),
            object_id=str(obj["object_id"]),
            velocity=tuple(obj["velocity"]),
        )


@dataclass(frozen=True)
class Trajectory:
    """Ordered BEV waypoints in the ego frame, spaced ``timestep`` apart."""

    waypoints: tuple[tuple[float, float], ...]
    timestep: float

    def __post_init__(self):
        wps = tuple(tuple(float(v) for v in wp) for wp in self.waypoints)
        if not wps:
            raise LogValidationError("trajectory must have at least one waypoint")
        for wp in wps:
            if len(wp) != 2:
                raise LogValidationError("waypoints must be 2-vectors")
            _check_finite("waypoint", wp)
        if not (isinstance(self.timestep, (int, float)) and self.timestep > 0):
            raise LogValidationError(f"timestep must be > 0, got {self.timestep!r}")
        object.__setattr__(self, "waypoints", wps)
        object.__setattr__(self, "timestep", float(self.timestep))

    def __len__(self) -> int:
        return len(self.waypoints)

    def to_json(self) -> dict:
        return {"timestep": self.timestep, "waypoints": [list(wp) for wp in self.waypoints]}

    @classmethod
    def from_json(cls, obj: Optional[dict]) -> Optional["Trajectory"]:
        if obj is None:
            return None
        return cls(tuple(tuple(wp) for wp in obj["waypoints"]), obj["timestep"])


@dataclass(frozen=True)
class EgoPose:
    x: float
    y: float
    heading: float

    def __post_init__(self):
        _check_finite("ego_pose", (self.x, self.y, self.heading))

    def to_json(self) -> list:
        return [self.x, self.y, self.heading]


class InfractionKind(str, Enum):
    COLLISION_PEDESTRIAN = "collision_pedestrian"
    COLLISION_VEHICLE = "collision_vehicle"
    COLLISION_STATIC = "collision_static"
    RED_LIGHT = "red_light"
    STOP_SIGN = "stop_sign"


COLLISION_KINDS = frozenset(
    {
        InfractionKind.COLLISION_PEDESTRIAN,
        InfractionKind.COLLISION_VEHICLE,
        InfractionKind.COLLISION_STATIC,
    }
)


@dataclass(frozen=True)
class InfractionEvent:
    kind: InfractionKind
    frame_index: int

    def __post_init__(self):
        object.__setattr__(self, "kind", InfractionKind(self.kind))
        if not isinstance(self.frame_index, int) or self.frame_index < 0:
            raise LogValidationError(f"frame_index must be a non-negative int, got {self.frame_index!r}")

    def to_json(self) -> dict:
        return {"kind": self.kind.value, "frame_index": self.frame_index}


@dataclass(frozen=True)
class FrameRecord:
    frame_index: int
    time: float
    ego_pose: EgoPose
    gt_objects: tuple[GroundTruthObject, ...]
    detections: tuple[Detection, ...]
    traj_gt_conditioned: Optional[Trajectory] = None
    traj_perception_conditioned: Optional[Trajectory] = None

    def __post_init__(self):
        if not isinstance(self.frame_index, int) or self.frame_index < 0:
            raise LogValidationError(f"frame_index must be a non-negative int, got {self.frame_index!r}")
        object.__setattr__(self, "gt_objects", tuple(self.gt_objects))
        object.__setattr__(self, "detections", tuple(self.detections))
        if (self.traj_gt_conditioned is None) != (self.traj_perception_conditioned is None):
            raise LogValidationError("trajectories must be both present or both absent")

    @property
    def has_trajectories(self) -> bool:
        return self.traj_gt_conditioned is not None

    def to_json(self) -> dict:
        return {
            "frame_index": self.frame_index,
            "time": self.time,
            "ego_pose": self.ego_pose.to_json(),
            "gt_objects": [g.to_json() for g in self.gt_objects],
            "detections": [d.to_json() for d in self.detections],
            "traj_gt": self.traj_gt_conditioned.to_json() if self.traj_gt_conditioned else None,
            "traj_pred": self.traj_perception_conditioned.to_json()
            if self.traj_perception_conditioned
            else None,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "FrameRecord":
        pose = obj["ego_pose"]
        return cls(
            frame_index=obj["frame_index"],
            time=float(obj["time"]),
            ego_pose=EgoPose(pose[0], pose[1], pose[2]),
            gt_objects=tuple(GroundTruthObject.from_json(g) for g in obj["gt_objects"]),
            detections=tuple(Detection.from_json(d) for d in obj["detections"]),
            traj_gt_conditioned=Trajectory.from_json(obj.get("traj_gt")),
            traj_perception_conditioned=Trajectory.from_json(obj.get("traj_pred")),
        )


@dataclass(frozen=True)
class RouteLog:
    route_id: str
    detector_id: str
    frames: tuple[FrameRecord, ...]
    route_completion: float
    infractions: tuple[InfractionEvent, ...] = field(default_factory=tuple)
    timestep: float = 0.1

    def __post_init__(self):
        object.__setattr__(self, "frames", tuple(self.frames))
        object.__setattr__(self, "infractions", tuple(self.infractions))
        if not self.frames:
            raise LogValidationError("route must contain at least one frame")
        rc = float(self.route_completion)
        if not math.isfinite(rc) or not (0.0 <= rc <= 100.0):
            raise LogValidationError(f"route_completion out of range: {self.route_completion!r}")
        object.__setattr__(self, "route_completion", rc)
        if self.timestep <= 0:
            raise LogValidationError(f"timestep must be > 0, got {self.timestep!r}")
        prev = None
        for frame in self.frames:
            if prev is not None and frame.frame_index <= prev:
                raise LogValidationError(
                    f"frame_index not strictly increasing at frame {frame.frame_index}"
                )
            prev = frame.frame_index
        last = self.frames[-1].frame_index
        for ev in self.infractions:
            if ev.frame_index > last:
                raise LogValidationError(
                    f"infraction frame_index {ev.frame_index} beyond route end {last}"
                )

    def header_json(self) -> dict:
        return {
            "route_id": self.route_id,
            "detector_id": self.detector_id,
            "route_completion": self.route_completion,
            "timestep": self.timestep,
            "infractions": [ev.to_json() for ev in self.infractions],
        }


def dumps_route_log(route: RouteLog) -> str:
    lines = [json.dumps(route.header_json())]
    lines.extend(json.dumps(frame.to_json()) for frame in route.frames)
    return "\n".join(lines) + "\n"


def save_route_log(route: RouteLog, path) -> Path:
    path = Path(path)
    path.write_text(dumps_route_log(route))
    return path


def loads_route_log(text: str, source: str = "<string>") -> RouteLog:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if len(lines) < 2:
        raise LogParseError(f"{source}: need a header line and at least one frame")
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise LogParseError(f"{source}: line 1: invalid JSON: {exc}") from exc

    frames = []
    for lineno, raw in enumerate(lines[1:], start=2):
        try:
            obj = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise LogParseError(f"{source}: line {lineno}: invalid JSON: {exc}") from exc
        try:
            frames.append(FrameRecord.from_json(obj))
        except (KeyError, TypeError, IndexError) as exc:
            raise LogParseError(f"{source}: line {lineno}: missing or ill-typed field: {exc}") from exc
        except LogValidationError as exc:
            raise LogValidationError(f"{exc}, frame {obj.get('frame_index', lineno - 2)}") from exc

    try:
        infractions = tuple(
            InfractionEvent(ev["kind"], ev["frame_index"]) for ev in header.get("infractions", [])
        )
        return RouteLog(
            route_id=str(header["route_id"]),
            detector_id=str(header["detector_id"]),
            frames=tuple(frames),
            route_completion=header["route_completion"],
            infractions=infractions,
            timestep=header.get("timestep", 0.1),
        )
    except (KeyError, TypeError) as exc:
        raise LogParseError(f"{source}: line 1: missing or ill-typed header field: {exc}") from exc


def load_route_log(path) -> RouteLog:
    path = Path(path)
    return loads_route_log(path.read_text(), source=str(path))
