"""Desk-scale scenario generator, detector-noise models, surrogate planner,
and the brute-force oracles used by property tests and acceptance runs.

The world is a straight lane along +x. The ego starts at the origin with
heading zero. Traffic consists of slower lead vehicles in the ego lane,
oncoming vehicles in the adjacent lane, parked vehicles at the roadside, and
pedestrians that cross the lane on a schedule timed against the nominal ego
arrival. Everything moves on constant-velocity segments. All traffic spawns
outside the planner's braking corridor, so during the tracker's confirmation
warmup an empty perception input and the full ground truth produce the same
plan.

Oracles here deliberately share no kernels with the modules they verify:
the IoU oracle is Monte-Carlo point sampling, the AP oracle enumerates
confidence cutoffs, and the assignment oracle enumerates permutations.
"""
from __future__ import annotations

import itertools
import math
import zlib
from dataclasses import dataclass, replace as dc_replace
from typing import Callable, Optional, Sequence

import numpy as np

from .config import EvalConfig, PlannerConfig, TrackerConfig
from .core_types import (
    Detection,
    EgoPose,
    FrameRecord,
    GroundTruthObject,
    InfractionEvent,
    InfractionKind,
    OrientedBox3D,
    RouteLog,
    Trajectory,
    normalize_yaw,
)
from .geometry import bev_intersection_area
from .tracking import Tracker, to_world_xy

EGO_DIMS = (4.5, 2.0, 1.6)
CAR_DIMS = (4.4, 1.9, 1.6)
PED_DIMS = (0.5, 0.5, 1.8)
CLASS_DIMS = {"vehicle": CAR_DIMS, "pedestrian": PED_DIMS}
FP_DISC_RADIUS = 50.0
# Completed-route length is set slightly inside the privileged run's reach so
# a detector matching privileged behavior scores full route completion.
ROUTE_LENGTH_FRACTION = 0.98


@dataclass(frozen=True)
class NoiseModel:
    """Distance-dependent misses, Gaussian box perturbations, Poisson false
    positives. Stands in for a trained detector of a given quality."""

    drop_base: float = 0.0
    drop_per_meter: float = 0.0
    sigma_xy: float = 0.0
    sigma_yaw: float = 0.0
    sigma_dims: float = 0.0
    fp_rate: float = 0.0
    conf_noise: float = 0.0
    seed: int = 0

    def __post_init__(self):
        for name in ("drop_base", "drop_per_meter", "sigma_xy", "sigma_yaw",
                     "sigma_dims", "fp_rate", "conf_noise"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        if self.drop_base > 1.0:
            raise ValueError("drop_base is a probability, must be <= 1")


def noise_ladder(n_models: int = 16, base_seed: int = 0) -> list[NoiseModel]:
    """Noise models of strictly increasing severity; model 0 is noise-free."""
    if n_models < 1:
        raise ValueError("need at least one model")
    models = []
    for i in range(n_models):
        s = i / max(1, n_models - 1)
        models.append(
            NoiseModel(
                drop_base=0.5 * s * s,
                drop_per_meter=0.004 * s,
                sigma_xy=0.35 * s,
                sigma_yaw=0.5 * s,
                sigma_dims=0.12 * s,
                fp_rate=1.0 * s,
                conf_noise=0.15 * s,
                seed=base_seed * 1009 + i,
            )
        )
    return models


# ---------------------------------------------------------------------------
# Scripted world


@dataclass(frozen=True)
class MotionSegment:
    t_start: float
    velocity: tuple[float, float]


@dataclass(frozen=True)
class ScriptedObject:
    object_id: str
    class_id: str
    dims: tuple[float, float, float]
    start_xy: tuple[float, float]
    yaw: float
    segments: tuple[MotionSegment, ...]  # sorted by t_start; first at t=0

    def state_at(self, t: float) -> tuple[tuple[float, float], tuple[float, float]]:
        """(world xy, world velocity) at time t."""
        x, y = self.start_xy
        active = (0.0, 0.0)
        for i, seg in enumerate(self.segments):
            t_end = self.segments[i + 1].t_start if i + 1 < len(self.segments) else math.inf
            if t < seg.t_start:
                break
            dt = min(t, t_end) - seg.t_start
            x += seg.velocity[0] * dt
            y += seg.velocity[1] * dt
            if t < t_end:
                active = seg.velocity
        return (x, y), active


@dataclass(frozen=True)
class Scenario:
    objects: tuple[ScriptedObject, ...]
    n_frames: int
    timestep: float


def constant_velocity(vx: float, vy: float) -> tuple[MotionSegment, ...]:
    return (MotionSegment(0.0, (vx, vy)),)


def build_scenario(rng: np.random.Generator, n_frames: int, timestep: float,
                   density: float, target_speed: float = 6.0) -> Scenario:
    objects: list[ScriptedObject] = []

    def spaced_positions(n, lo, hi, min_gap):
        xs: list[float] = []
        for _ in range(n * 4):
            if len(xs) == n:
                break
            x = float(rng.uniform(lo, hi))
            if all(abs(x - other) >= min_gap for other in xs):
                xs.append(x)
        return sorted(xs)

    n_lead = int(round(density * float(rng.uniform(1.0, 2.0))))
    n_onc = int(round(density * float(rng.uniform(1.0, 3.0))))
    n_parked = int(round(density * float(rng.uniform(1.0, 3.0))))
    n_ped = int(round(density * float(rng.uniform(1.0, 2.5))))

    # Speeds increase with position within a lane so same-lane vehicles never
    # converge and overlap.
    lead_xs = spaced_positions(n_lead, 28.0, 95.0, 20.0)
    lead_speeds = sorted(float(rng.uniform(2.5, 5.5)) for _ in lead_xs)
    for i, (x0, speed) in enumerate(zip(lead_xs, lead_speeds)):
        objects.append(
            ScriptedObject(f"lead_{i}", "vehicle", CAR_DIMS, (x0, 0.0), 0.0,
                           constant_velocity(speed, 0.0))
        )
    onc_xs = spaced_positions(n_onc, 40.0, 160.0, 12.0)
    onc_speeds = sorted((float(rng.uniform(5.0, 8.0)) for _ in onc_xs), reverse=True)
    for i, (x0, speed) in enumerate(zip(onc_xs, onc_speeds)):
        objects.append(
            ScriptedObject(f"oncoming_{i}", "vehicle", CAR_DIMS, (x0, 3.5), math.pi,
                           constant_velocity(-speed, 0.0))
        )
    for i, x0 in enumerate(spaced_positions(n_parked, 15.0, 140.0, 8.0)):
        objects.append(
            ScriptedObject(f"parked_{i}", "vehicle", CAR_DIMS, (x0, -3.5), 0.0,
                           constant_velocity(0.0, 0.0))
        )
    walk_speed = 1.4
    y_start = -8.0
    for i, x_c in enumerate(spaced_positions(n_ped, 40.0, 130.0, 15.0)):
        # Timed so the pedestrian is inside the lane when a non-braking ego
        # at target speed would arrive.
        time_to_lane = (abs(y_start) - 1.0) / walk_speed
        t_start = max(0.2, x_c / target_speed - time_to_lane + float(rng.uniform(-0.5, 0.5)))
        t_stop = t_start + (2 * abs(y_start)) / walk_speed
        objects.append(
            ScriptedObject(
                f"ped_{i}", "pedestrian", PED_DIMS, (x_c, y_start), math.pi / 2,
                (
                    MotionSegment(0.0, (0.0, 0.0)),
                    MotionSegment(t_start, (0.0, walk_speed)),
                    MotionSegment(t_stop, (0.0, 0.0)),
                ),
            )
        )
    return Scenario(objects=tuple(objects), n_frames=n_frames, timestep=timestep)


def _gt_at(
    scenario: Scenario, t: float, ego: EgoPose, timestep: float
) -> list[GroundTruthObject]:
    """Ground truth in the ego frame (ego heading is always zero here).

    Logged velocity is the displacement over the last frame interval divided
    by the timestep: average velocity, equal to instantaneous velocity except
    on the single frame where a motion segment switches.
    """
    out = []
    for obj in scenario.objects:
        (wx, wy), vel = obj.state_at(t)
        if t > 0:
            (px, py), _ = obj.state_at(t - timestep)
            vel = ((wx - px) / timestep, (wy - py) / timestep)
        z = 0.5 * obj.dims[2]
        box = OrientedBox3D((wx - ego.x, wy - ego.y, z), obj.dims, obj.yaw)
        out.append(GroundTruthObject(box, obj.class_id, obj.object_id, vel))
    return out


# ---------------------------------------------------------------------------
# Surrogate planner and closed-loop simulation


def surrogate_planner(
    objects_xy: Sequence[tuple[float, float]],
    cfg: PlannerConfig | None = None,
    velocities: Sequence[Optional[tuple[float, float]]] | None = None,
) -> Trajectory:
    """Rule-based longitudinal plan along the current ego lane.

    Drives at target speed unless an object sits in the front corridor, in
    which case the speed profile follows a constant-deceleration stopping
    envelope ending ``stop_margin`` short of the object. When velocities are
    supplied, objects are also extrapolated up to ``lookahead_s`` ahead, so a
    pedestrian walking toward the lane triggers braking before it enters the
    corridor. The planner is memoryless; it is re-run every frame, which is
    how moving obstacles are handled.
    """
    cfg = cfg or PlannerConfig()
    if cfg.horizon < 1:
        raise ValueError("horizon must be >= 1")
    half_w = 0.5 * cfg.corridor_width
    if velocities is None:
        velocities = [None] * len(objects_xy)
    elif len(velocities) != len(objects_xy):
        raise ValueError("velocities must align with objects_xy")
    taus = [j * cfg.lookahead_s / cfg.lookahead_steps for j in range(cfg.lookahead_steps + 1)]
    obstacle = None
    for (x, y), vel in zip(objects_xy, velocities):
        if x <= 0.0:  # only objects currently ahead can anchor a stop
            continue
        vx, vy = vel if vel is not None else (0.0, 0.0)
        for tau in taus:
            px, py = x + vx * tau, y + vy * tau
            if abs(py) <= half_w and 0.0 < px <= cfg.corridor_range:
                # current longitudinal position sets the stop point, even if
                # corridor entry happens later in the lookahead window
                if obstacle is None or x < obstacle:
                    obstacle = x
                break
    stop_at = None if obstacle is None else max(0.0, obstacle - cfg.stop_margin)
    pos = 0.0
    waypoints = []
    for _ in range(cfg.horizon):
        if stop_at is None:
            v = cfg.target_speed
        else:
            v = min(cfg.target_speed, math.sqrt(2.0 * cfg.brake_decel * max(0.0, stop_at - pos)))
        pos += v * cfg.plan_timestep
        waypoints.append((pos, 0.0))
    return Trajectory(tuple(waypoints), cfg.plan_timestep)


_COLLISION_BY_CLASS = {
    "pedestrian": InfractionKind.COLLISION_PEDESTRIAN,
    "vehicle": InfractionKind.COLLISION_VEHICLE,
}


def _ego_footprint() -> OrientedBox3D:
    return OrientedBox3D((0.0, 0.0, 0.5 * EGO_DIMS[2]), EGO_DIMS, 0.0)


def _check_collisions(
    gt_objects: Sequence[GroundTruthObject],
    frame_index: int,
    already_hit: set[str],
) -> list[InfractionEvent]:
    events = []
    footprint = _ego_footprint()
    for g in gt_objects:
        if g.object_id in already_hit:
            continue
        x, y = g.box.center_xy
        if abs(x) > 8.0 or abs(y) > 5.0:  # cheap reject before polygon clip
            continue
        if bev_intersection_area(footprint, g.box) > 0.0:
            already_hit.add(g.object_id)
            kind = _COLLISION_BY_CLASS.get(g.class_id, InfractionKind.COLLISION_STATIC)
            events.append(InfractionEvent(kind, frame_index))
    return events


def _closed_loop(
    scenario_gt: Callable[[int, EgoPose], list[GroundTruthObject]],
    detections_world: Optional[Callable[[int], list[Detection]]],
    n_frames: int,
    timestep: float,
    cfg: EvalConfig,
) -> tuple[list[FrameRecord], list[InfractionEvent], float]:
    """Roll the ego forward; privileged when ``detections_world`` is None.

    ``detections_world`` returns world-frame detections for frame k; they are
    re-expressed in the simulated ego frame before tracking.
    """
    ego_x = 0.0
    tracker = Tracker(cfg.tracker, timestep)
    frames: list[FrameRecord] = []
    infractions: list[InfractionEvent] = []
    hit: set[str] = set()
    privileged = detections_world is None
    for k in range(n_frames):
        pose = EgoPose(ego_x, 0.0, 0.0)
        gt = scenario_gt(k, pose)
        if privileged:
            dets: tuple[Detection, ...] = ()
        else:
            dets = tuple(
                dc_replace(
                    d,
                    box=OrientedBox3D(
                        (d.box.center[0] - pose.x, d.box.center[1] - pose.y, d.box.center[2]),
                        d.box.dims,
                        d.box.yaw,
                    ),
                )
                for d in detections_world(k)
            )
        frame = FrameRecord(
            frame_index=k,
            time=k * timestep,
            ego_pose=pose,
            gt_objects=tuple(gt),
            detections=dets,
        )
        if privileged:
            plan = surrogate_planner(
                [g.box.center_xy for g in gt], cfg.planner,
                velocities=[g.velocity for g in gt],
            )
        else:
            tracked = tracker.step(frame)
            plan = surrogate_planner(
                [t.detection.box.center_xy for t in tracked], cfg.planner,
                velocities=[t.detection.velocity for t in tracked],
            )
        infractions.extend(_check_collisions(gt, k, hit))
        frames.append(frame)
        v_cmd = math.hypot(*plan.waypoints[0]) / plan.timestep
        ego_x += v_cmd * timestep
    return frames, infractions, ego_x


def generate_scenario(
    n_routes: int,
    n_frames: int,
    density: float,
    seed: int,
    timestep: float = 0.1,
    cfg: EvalConfig | None = None,
) -> list[RouteLog]:
    """Ground-truth-only route logs: scripted traffic observed from a
    privileged ego that plans against the full ground truth."""
    if n_routes < 1 or n_frames < 1:
        raise ValueError("n_routes and n_frames must be positive")
    if timestep <= 0:
        raise ValueError("timestep must be > 0")
    cfg = cfg or EvalConfig()
    routes = []
    for r in range(n_routes):
        rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(r,)))
        scenario = build_scenario(rng, n_frames, timestep, density, cfg.planner.target_speed)
        frames, infractions, _ = _closed_loop(
            lambda k, pose: _gt_at(scenario, k * timestep, pose, timestep),
            None,
            n_frames,
            timestep,
            cfg,
        )
        routes.append(
            RouteLog(
                route_id=f"route_{r:03d}",
                detector_id="oracle_gt",
                frames=tuple(frames),
                route_completion=100.0,
                infractions=tuple(infractions),
                timestep=timestep,
            )
        )
    return routes


# ---------------------------------------------------------------------------
# Detector noise


def _model_rng(route_id: str, model: NoiseModel) -> np.random.Generator:
    route_key = zlib.crc32(route_id.encode("utf-8"))
    return np.random.default_rng(np.random.SeedSequence(entropy=model.seed, spawn_key=(route_key,)))


def _sample_detections(
    gt: Sequence[GroundTruthObject],
    model: NoiseModel,
    rng: np.random.Generator,
) -> list[Detection]:
    dets: list[Detection] = []
    for g in gt:
        p_drop = min(1.0, model.drop_base + model.drop_per_meter * g.distance_to_ego)
        if rng.random() < p_drop:
            continue
        cx, cy, cz = g.box.center
        if model.sigma_xy > 0:
            cx += float(rng.normal(0.0, model.sigma_xy))
            cy += float(rng.normal(0.0, model.sigma_xy))
        yaw = g.box.yaw
        if model.sigma_yaw > 0:
            yaw = normalize_yaw(yaw + float(rng.normal(0.0, model.sigma_yaw)))
        dims = g.box.dims
        if model.sigma_dims > 0:
            dims = tuple(
                max(0.15, d * (1.0 + float(rng.normal(0.0, model.sigma_dims)))) for d in dims
            )
        conf = 1.0
        if model.conf_noise > 0:
            conf = min(1.0, max(0.05, 1.0 - abs(float(rng.normal(0.0, model.conf_noise)))))
        dets.append(
            Detection(OrientedBox3D((cx, cy, cz), dims, yaw), conf, g.class_id)
        )
    n_fp = int(rng.poisson(model.fp_rate)) if model.fp_rate > 0 else 0
    for _ in range(n_fp):
        ang = float(rng.uniform(-math.pi, math.pi))
        rad = FP_DISC_RADIUS * math.sqrt(float(rng.uniform(0.0, 1.0)))
        class_id = "vehicle" if rng.random() < 0.7 else "pedestrian"
        base = CLASS_DIMS[class_id]
        dims = tuple(max(0.15, d * (1.0 + float(rng.normal(0.0, 0.1)))) for d in base)
        dets.append(
            Detection(
                OrientedBox3D(
                    (rad * math.cos(ang), rad * math.sin(ang), 0.5 * dims[2]),
                    dims,
                    normalize_yaw(float(rng.uniform(-math.pi, math.pi))),
                ),
                # Survives the 0.3 confidence gate so the FP path is exercised.
                confidence=float(rng.uniform(0.3, 0.7)),
                class_id=class_id,
            )
        )
    return dets


def apply_noise(route: RouteLog, model: NoiseModel, cfg: EvalConfig | None = None) -> RouteLog:
    """Fill a GT route with noisy detections, tracked velocities, and the
    paired planner trajectories (ground-truth- and perception-conditioned).

    Detections are logged after the pipeline's confidence gate and NMS, the
    operating set presented to the planner.
    """
    from .tracking import nms  # local import to keep module load light

    cfg = cfg or EvalConfig()
    rng = _model_rng(route.route_id, model)
    tracker = Tracker(cfg.tracker, route.timestep)
    new_frames: list[FrameRecord] = []
    for frame in route.frames:
        raw = _sample_detections(frame.gt_objects, model, rng)
        raw = [d for d in raw if d.confidence >= cfg.tracker.conf_threshold]
        raw = nms(raw, cfg.tracker.nms_iou)
        staged = dc_replace(frame, detections=tuple(raw))
        tracked = tracker.step(staged)
        # tracker.step re-creates Detection objects; map back by box content
        tracked_keys = {
            (t.detection.box, t.detection.confidence, t.detection.class_id): t
            for t in tracked
        }
        final_dets = []
        for det in raw:
            t = tracked_keys.get((det.box, det.confidence, det.class_id))
            if t is not None:
                det = dc_replace(det, velocity=t.detection.velocity)
            final_dets.append(det)
        traj_gt = surrogate_planner(
            [g.box.center_xy for g in frame.gt_objects], cfg.planner,
            velocities=[g.velocity for g in frame.gt_objects],
        )
        traj_pred = surrogate_planner(
            [t.detection.box.center_xy for t in tracked], cfg.planner,
            velocities=[t.detection.velocity for t in tracked],
        )
        new_frames.append(
            dc_replace(
                staged,
                detections=tuple(final_dets),
                traj_gt_conditioned=traj_gt,
                traj_perception_conditioned=traj_pred,
            )
        )
    return dc_replace(route, frames=tuple(new_frames))


def surrogate_outcome(
    route: RouteLog, cfg: EvalConfig | None = None
) -> tuple[float, tuple[InfractionEvent, ...]]:
    """Closed-loop online outcome for a detection-filled route.

    Re-simulates the ego against the route's world-frame ground truth,
    feeding the tracker the logged detections re-expressed in the simulated
    ego frame. Route length is taken from the logged (privileged) ego path.
    """
    cfg = cfg or EvalConfig()
    if not any(frame.detections for frame in route.frames):
        raise ValueError("route carries no detections; apply a noise model first")

    world_gt: list[list[tuple[GroundTruthObject, tuple[float, float]]]] = []
    world_dets: list[list[Detection]] = []
    for frame in route.frames:
        pose = frame.ego_pose
        world_gt.append(
            [(g, to_world_xy(g.box, pose)) for g in frame.gt_objects]
        )
        world_dets.append(
            [
                dc_replace(
                    d,
                    box=OrientedBox3D(
                        (*to_world_xy(d.box, pose), d.box.center[2]), d.box.dims, d.box.yaw
                    ),
                    velocity=None,
                )
                for d in frame.detections
            ]
        )

    poses = [f.ego_pose for f in route.frames]
    logged_path = sum(
        math.hypot(b.x - a.x, b.y - a.y) for a, b in zip(poses, poses[1:])
    )
    route_length = max(1e-9, ROUTE_LENGTH_FRACTION * logged_path)

    def gt_at(k: int, pose: EgoPose) -> list[GroundTruthObject]:
        out = []
        for g, (wx, wy) in world_gt[k]:
            box = OrientedBox3D(
                (wx - pose.x, wy - pose.y, g.box.center[2]), g.box.dims, g.box.yaw
            )
            out.append(GroundTruthObject(box, g.class_id, g.object_id, g.velocity))
        return out

    _, infractions, progress = _closed_loop(
        gt_at, lambda k: world_dets[k], len(route.frames), route.timestep, cfg
    )
    rc = min(100.0, 100.0 * progress / route_length)
    return rc, tuple(infractions)


def run_study(cfg: EvalConfig | None = None) -> list[RouteLog]:
    """Full synthetic study: one route log per (noise model, route)."""
    cfg = cfg or EvalConfig()
    sc = cfg.synth
    gt_routes = generate_scenario(
        sc.n_routes, sc.n_frames, sc.density, sc.seed, sc.timestep, cfg
    )
    models = noise_ladder(sc.n_models, sc.seed)
    logs = []
    for gt_route in gt_routes:
        for i, model in enumerate(models):
            noisy = apply_noise(gt_route, model, cfg)
            rc, infractions = surrogate_outcome(noisy, cfg)
            logs.append(
                dc_replace(
                    noisy,
                    detector_id=f"det_{i:02d}",
                    route_completion=rc,
                    infractions=infractions,
                )
            )
    return logs


# ---------------------------------------------------------------------------
# Brute-force oracles


def oracle_mc_iou(
    a: OrientedBox3D, b: OrientedBox3D, samples: int = 1_000_000, seed: int = 0
) -> tuple[float, float]:
    """Monte-Carlo BEV IoU estimate with its standard error.

    Uniform sampling over the joint bounding box with direct rotated-rectangle
    membership tests; shares no code with the polygon-clipping path.
    """
    if samples < 10**5:
        raise ValueError("need at least 1e5 samples")
    rng = np.random.default_rng(seed)

    def inside(px, py, box):
        cx, cy = box.center_xy
        c, s = math.cos(box.yaw), math.sin(box.yaw)
        lx = c * (px - cx) + s * (py - cy)
        ly = -s * (px - cx) + c * (py - cy)
        return (np.abs(lx) <= 0.5 * box.dims[0]) & (np.abs(ly) <= 0.5 * box.dims[1])

    xs_all, ys_all = [], []
    for box in (a, b):
        cx, cy = box.center_xy
        r = 0.5 * math.hypot(box.dims[0], box.dims[1])
        xs_all += [cx - r, cx + r]
        ys_all += [cy - r, cy + r]
    x_lo, x_hi = min(xs_all), max(xs_all)
    y_lo, y_hi = min(ys_all), max(ys_all)
    px = rng.uniform(x_lo, x_hi, samples)
    py = rng.uniform(y_lo, y_hi, samples)
    in_a = inside(px, py, a)
    in_b = inside(px, py, b)
    n_inter = int(np.count_nonzero(in_a & in_b))
    n_union = int(np.count_nonzero(in_a | in_b))
    if n_inter == 0:
        return 0.0, 0.0
    p_i = n_inter / samples
    p_u = n_union / samples
    iou = p_i / p_u
    # Delta-method error for the ratio of correlated proportions
    # (intersection is a subset of union, so cov(p_i, p_u) = p_i(1 - p_u)).
    var = (p_i * (1 - p_i) / p_u**2 + p_i**2 * p_u * (1 - p_u) / p_u**4
           - 2 * p_i * (1 - p_u) * p_i / p_u**3) / samples
    return iou, math.sqrt(max(0.0, var))


def oracle_ap(
    confidences: Sequence[float],
    true_positive: Sequence[bool],
    gt_mass: float,
    weights: Sequence[float] | None = None,
) -> float:
    """Exhaustive-cutoff AP: every confidence threshold becomes an operating
    point; exact 40-level interpolation over that finite PR set."""
    if gt_mass <= 0:
        raise ValueError("gt_mass must be positive")
    n = len(confidences)
    if weights is None:
        weights = [1.0] * n
    points = []
    for tau in sorted(set(confidences), reverse=True):
        tp = fp = 0.0
        for c, is_tp, w in zip(confidences, true_positive, weights):
            if c >= tau:
                if is_tp:
                    tp += w
                else:
                    fp += w
        if tp + fp > 0:
            points.append((tp / gt_mass, tp / (tp + fp)))
    total = 0.0
    for k in range(1, 41):
        level = k / 40.0
        total += max((p for r, p in points if r >= level - 1e-12), default=0.0)
    return total / 40.0


def oracle_assignment(
    cost: Sequence[Sequence[float]], gate: float | None = None
) -> tuple[int, float]:
    """Exhaustive permutation minimum: maximize in-gate pair count, then
    minimize their total cost. Returns (pair_count, total_cost)."""
    matrix = [list(map(float, row)) for row in cost]
    n = len(matrix)
    m = len(matrix[0]) if n else 0
    if n == 0 or m == 0:
        return 0, 0.0
    if n > 6 or m > 6:
        raise ValueError("oracle limited to 6x6 instances")
    transposed = n > m
    if transposed:
        matrix = [[matrix[i][j] for i in range(n)] for j in range(m)]
        n, m = m, n
    best = (-1, math.inf)
    for perm in itertools.permutations(range(m), n):
        count = 0
        total = 0.0
        for i, j in enumerate(perm):
            c = matrix[i][j]
            if gate is None or c <= gate:
                count += 1
                total += c
        key = (-count, total)
        if key < (-best[0], best[1]):
            best = (count, total)
    return best
