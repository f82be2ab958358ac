"""Online driving metrics from route outcome logs."""
from __future__ import annotations

from typing import Iterable, Mapping

from .core_types import COLLISION_KINDS, InfractionEvent, InfractionKind

# CARLA-leaderboard convention penalty factors; configurable plumbing.
DEFAULT_PENALTIES: dict[str, float] = {
    InfractionKind.COLLISION_PEDESTRIAN.value: 0.50,
    InfractionKind.COLLISION_VEHICLE.value: 0.60,
    InfractionKind.COLLISION_STATIC.value: 0.65,
    InfractionKind.RED_LIGHT.value: 0.70,
    InfractionKind.STOP_SIGN.value: 0.80,
}


def infraction_score(
    infractions: Iterable[InfractionEvent],
    penalties: Mapping[str, float] | None = None,
) -> float:
    """Product of the penalty factor of every event; 1.0 for no infractions."""
    factors = DEFAULT_PENALTIES if penalties is None else penalties
    score = 1.0
    for event in infractions:
        kind = event.kind.value
        if kind not in factors:
            raise ValueError(f"no penalty factor configured for infraction kind {kind!r}")
        factor = factors[kind]
        if not (0.0 < factor <= 1.0):
            raise ValueError(f"penalty factor for {kind!r} must be in (0, 1], got {factor}")
        score *= factor
    return score


def driving_score(route_completion: float, is_: float) -> float:
    """DS = route completion (percent) x infraction score."""
    if not (0.0 <= route_completion <= 100.0):
        raise ValueError(f"route_completion out of range: {route_completion}")
    if not (0.0 <= is_ <= 1.0):
        raise ValueError(f"infraction score out of range: {is_}")
    return route_completion * is_


def collision_count(infractions: Iterable[InfractionEvent]) -> int:
    return sum(1 for event in infractions if event.kind in COLLISION_KINDS)
