"""Runtime configuration: defaults, YAML file loading, override merging.

All numeric pipeline constants live here with their published defaults
(confidence gate 0.3, NMS IoU 0.2, 4-frame confirmation, 1 m center-distance
threshold, IoU 0.7, 40 recall levels).
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

import yaml

from .driving_eval import DEFAULT_PENALTIES


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class MatchingConfig:
    iou_kind: str = "3d"  # "bev" or "3d"
    iou_threshold: float = 0.7
    d_min: float = 1.0  # clamp for inverse-distance weights


@dataclass(frozen=True)
class NdsConfig:
    threshold_m: float = 1.0
    v_cap: float = 10.0  # AVE normalization divisor
    tp_weights: tuple[float, float, float, float] = (1.0, 1.0, 1.0, 1.0)  # ate, ase, aoe, ave
    recall_sweep_mode: bool = False


@dataclass(frozen=True)
class TrackerConfig:
    conf_threshold: float = 0.3
    nms_iou: float = 0.2
    confirm_frames: int = 4
    gate_m: float = 5.0


@dataclass(frozen=True)
class PlannerConfig:
    target_speed: float = 6.0
    corridor_width: float = 3.0
    corridor_range: float = 20.0
    horizon: int = 8
    plan_timestep: float = 0.5
    brake_decel: float = 3.0
    stop_margin: float = 5.0  # longitudinal center-to-center standoff
    lookahead_s: float = 2.0  # how far objects are extrapolated into the corridor
    lookahead_steps: int = 4


@dataclass(frozen=True)
class SynthConfig:
    n_routes: int = 12
    n_frames: int = 150
    timestep: float = 0.1
    density: float = 1.0
    n_models: int = 16
    seed: int = 0


@dataclass(frozen=True)
class EvalConfig:
    matching: MatchingConfig = field(default_factory=MatchingConfig)
    nds: NdsConfig = field(default_factory=NdsConfig)
    tracker: TrackerConfig = field(default_factory=TrackerConfig)
    planner: PlannerConfig = field(default_factory=PlannerConfig)
    synth: SynthConfig = field(default_factory=SynthConfig)
    penalties: Mapping[str, float] = field(default_factory=lambda: dict(DEFAULT_PENALTIES))


_SECTIONS = {
    "matching": MatchingConfig,
    "nds": NdsConfig,
    "tracker": TrackerConfig,
    "planner": PlannerConfig,
    "synth": SynthConfig,
}


def _build_section(cls, defaults, values: Mapping[str, Any], section: str):
    known = {f.name: f for f in dataclasses.fields(cls)}
    kwargs = {name: getattr(defaults, name) for name in known}
    for key, value in values.items():
        if key not in known:
            raise ConfigError(f"unknown config key {section}.{key}")
        if key == "tp_weights":
            value = tuple(float(v) for v in value)
            if len(value) != 4:
                raise ConfigError("nds.tp_weights must have 4 entries")
        kwargs[key] = value
    return cls(**kwargs)


def merge_config(base: EvalConfig, overrides: Mapping[str, Any] | None) -> EvalConfig:
    """Deep-merge a nested mapping of overrides into an EvalConfig."""
    if not overrides:
        return base
    sections: dict[str, Any] = {}
    for section, values in overrides.items():
        if section == "penalties":
            if not isinstance(values, Mapping):
                raise ConfigError("penalties must be a mapping of kind -> factor")
            merged = dict(base.penalties)
            merged.update({str(k): float(v) for k, v in values.items()})
            sections["penalties"] = merged
        elif section in _SECTIONS:
            if not isinstance(values, Mapping):
                raise ConfigError(f"config section {section!r} must be a mapping")
            sections[section] = _build_section(
                _SECTIONS[section], getattr(base, section), values, section
            )
        else:
            raise ConfigError(f"unknown config section {section!r}")
    return dataclasses.replace(base, **sections)


def load_config(path=None, overrides: Mapping[str, Any] | None = None) -> EvalConfig:
    """Load a YAML config file (optional) and apply overrides on top."""
    cfg = EvalConfig()
    if path is not None:
        raw = yaml.safe_load(Path(path).read_text())
        if raw is None:
            raw = {}
        if not isinstance(raw, Mapping):
            raise ConfigError(f"config file {path} must contain a mapping")
        cfg = merge_config(cfg, raw)
    return merge_config(cfg, overrides)


def config_to_dict(cfg: EvalConfig) -> dict:
    out = {name: dataclasses.asdict(getattr(cfg, name)) for name in _SECTIONS}
    out["nds"]["tp_weights"] = list(out["nds"]["tp_weights"])
    out["penalties"] = dict(cfg.penalties)
    return out
