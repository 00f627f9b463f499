"""Strict JSON scenario ingestion.

Unknown keys are errors.  Angles are radians unless the key carries a ``_deg``
suffix; degree keys are converted here so the core only ever sees radians.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path as FsPath
from typing import Any

from poptrack.controllers import (
    LateralConfig,
    LongitudinalConfig,
    PidConfig,
    PopConfig,
    PurePursuitConfig,
    StanleyConfig,
)
from poptrack.sim import Scenario, StopRule, spawn_on_path
from poptrack.tracks import TrackSpec, load_track
from poptrack.vehicle import PlantParams, VehicleState


class ConfigError(ValueError):
    """Malformed or inconsistent scenario document."""


class TrackLoadError(OSError):
    """A track file referenced by a scenario could not be read."""


_CONTROLLERS: dict[str, type] = {
    "pid": PidConfig,
    "pure_pursuit": PurePursuitConfig,
    "stanley": StanleyConfig,
    "pop": PopConfig,
}
_INT_FIELDS = ("buffer_len", "resolution", "max_steps", "laps")

_SCENARIO_KEYS = {
    "track", "densify_resolution", "epsilon", "closed", "dt", "controller", "controllers", "scenarios",
    "longitudinal", "plant", "spawn", "stop", "divergence_limit", "output",
}
_RUN_KEYS = _SCENARIO_KEYS - {"controllers", "scenarios", "output"}


@dataclass(frozen=True)
class OutputOptions:
    svg: bool = True
    figure: bool = True


@dataclass
class ScenarioFile:
    """A parsed scenario document: one or more runs plus output toggles."""

    scenarios: list[Scenario]
    single: bool
    output: OutputOptions = field(default_factory=OutputOptions)
    source: str = ""


def _require_mapping(value: Any, where: str) -> dict:
    if not isinstance(value, dict):
        raise ConfigError(f"{where}: expected an object, got {type(value).__name__}")
    return value


def _check_keys(doc: dict, allowed: set[str] | dict, where: str) -> None:
    unknown = sorted(set(doc) - set(allowed))
    if unknown:
        raise ConfigError(f"{where}: unknown key {unknown[0]!r}")


def _number(value: Any, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where}: expected a number, got {value!r}")
    if not math.isfinite(value):
        raise ConfigError(f"{where}: must be finite")
    return float(value)


def _integer(value: Any, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{where}: expected an integer, got {value!r}")
    return value


def _angle(doc: dict, key: str, where: str) -> float | None:
    deg_key = f"{key}_deg"
    if key in doc and deg_key in doc:
        raise ConfigError(f"{where}: give either {key!r} or {deg_key!r}, not both")
    if deg_key in doc:
        return math.radians(_number(doc[deg_key], f"{where}.{deg_key}"))
    if key in doc:
        return _number(doc[key], f"{where}.{key}")
    return None


def _build(cls: type, kwargs: dict, where: str) -> Any:
    try:
        return cls(**kwargs)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"{where}: {exc}") from None


def parse_controller(doc: Any, where: str = "controller") -> LateralConfig:
    doc = _require_mapping(doc, where)
    kind = doc.get("type")
    if kind not in _CONTROLLERS:
        raise ConfigError(f"{where}.type: expected one of {sorted(_CONTROLLERS)}, got {kind!r}")
    rest = {k: v for k, v in doc.items() if k != "type"}
    angles = ("nbd",) if kind == "pop" else ()
    return _parse_simple(_CONTROLLERS[kind], rest, where, angles)


def parse_track(doc: Any, where: str = "track") -> TrackSpec:
    doc = _require_mapping(doc, where)
    if "csv" in doc:
        _check_keys(doc, {"csv"}, where)
        if not isinstance(doc["csv"], str):
            raise ConfigError(f"{where}.csv: expected a file path string")
        return TrackSpec(csv=doc["csv"])
    if "generator" not in doc:
        raise ConfigError(f"{where}: needs 'csv' or 'generator'")
    params = {}
    spacing, laps = 1.0, 1
    allowed = {
        "straight": {"length"},
        "oval": {"straight_length", "radius", "chicane_amplitude", "chicane_wavelength"},
        "figure-eight": {"radius"},
        "chicane": {"length", "amplitude", "wavelength"},
    }
    gen = doc["generator"]
    if gen not in allowed:
        raise ConfigError(f"{where}.generator: expected one of {sorted(allowed)}, got {gen!r}")
    _check_keys(doc, allowed[gen] | {"generator", "spacing", "laps"}, where)
    for key in allowed[gen]:
        if key in doc:
            params[key] = _number(doc[key], f"{where}.{key}")
    if "spacing" in doc:
        spacing = _number(doc["spacing"], f"{where}.spacing")
    if "laps" in doc:
        laps = _integer(doc["laps"], f"{where}.laps")
    return _build(TrackSpec, {"generator": gen, "params": params, "spacing": spacing, "laps": laps}, where)


def _parse_simple(cls: type, doc: Any, where: str, angles: tuple[str, ...] = ()) -> Any:
    doc = _require_mapping(doc, where)
    names = set(cls.__dataclass_fields__)
    _check_keys(doc, names | {f"{a}_deg" for a in angles}, where)
    kwargs: dict[str, Any] = {}
    for name in names:
        if name in angles:
            value = _angle(doc, name, where)
            if value is not None:
                kwargs[name] = value
        elif name in doc:
            parse = _integer if name in _INT_FIELDS else _number
            kwargs[name] = parse(doc[name], f"{where}.{name}")
    return _build(cls, kwargs, where)


def _parse_stop(doc: Any, where: str = "stop") -> StopRule:
    doc = _require_mapping(doc, where)
    _check_keys(doc, {"max_steps", "goal_radius"}, where)
    kwargs: dict[str, Any] = {}
    if "max_steps" in doc:
        kwargs["max_steps"] = _integer(doc["max_steps"], f"{where}.max_steps")
    if "goal_radius" in doc:
        kwargs["goal_radius"] = None if doc["goal_radius"] is None else _number(doc["goal_radius"], f"{where}.goal_radius")
    return _build(StopRule, kwargs, where)


def _parse_spawn(doc: Any, track: TrackSpec, base_dir: str, epsilon: float, where: str = "spawn") -> VehicleState:
    doc = _require_mapping(doc, where)
    if "lateral_offset" in doc:
        _check_keys(doc, {"lateral_offset", "v"}, where)
        offset = _number(doc["lateral_offset"], f"{where}.lateral_offset")
        v = _number(doc.get("v", 0.0), f"{where}.v")
        sparse = _load(track, base_dir, epsilon)
        return spawn_on_path(sparse, offset, v)
    _check_keys(doc, {"x", "y", "theta", "theta_deg", "v", "omega"}, where)
    kwargs = {k: _number(doc[k], f"{where}.{k}") for k in ("x", "y", "v", "omega") if k in doc}
    theta = _angle(doc, "theta", where)
    if theta is not None:
        kwargs["theta"] = theta
    if kwargs.get("v", 0.0) < 0:
        raise ConfigError(f"{where}.v: must be non-negative")
    return VehicleState(**kwargs)


def _load(track: TrackSpec, base_dir: str, epsilon: float):
    try:
        return load_track(track, base_dir, epsilon)
    except OSError as exc:
        name = exc.filename if getattr(exc, "filename", None) else track.csv
        raise TrackLoadError(f"cannot read track file {name}: {exc.strerror or exc}") from None
    except ValueError as exc:
        raise ConfigError(f"track: {exc}") from None


def parse_run(doc: dict, base_dir: str, where: str, controller: Any = None) -> Scenario:
    """Build one Scenario from a run-level document (shared fields plus one controller)."""
    _check_keys(doc, _RUN_KEYS, where)
    if "track" not in doc:
        raise ConfigError(f"{where}: missing 'track'")
    track = parse_track(doc["track"], f"{where}.track")
    ctrl_doc = controller if controller is not None else doc.get("controller")
    if ctrl_doc is None:
        raise ConfigError(f"{where}: missing 'controller'")
    kwargs: dict[str, Any] = {"track": track, "controller": parse_controller(ctrl_doc, f"{where}.controller")}
    for key in ("densify_resolution", "epsilon", "dt", "divergence_limit"):
        if key in doc:
            kwargs[key] = _number(doc[key], f"{where}.{key}")
    if "closed" in doc:
        if not isinstance(doc["closed"], bool):
            raise ConfigError(f"{where}.closed: expected true/false")
        kwargs["closed"] = doc["closed"]
    if "longitudinal" in doc:
        kwargs["longitudinal"] = _parse_simple(LongitudinalConfig, doc["longitudinal"], f"{where}.longitudinal", ("delta_lim",))
    if "plant" in doc:
        kwargs["plant"] = _parse_simple(PlantParams, doc["plant"], f"{where}.plant", ("steering_limit",))
    if "stop" in doc:
        kwargs["stop"] = _parse_stop(doc["stop"], f"{where}.stop")
    epsilon = kwargs.get("epsilon", 0.01)
    if "spawn" in doc:
        kwargs["spawn"] = _parse_spawn(doc["spawn"], track, base_dir, epsilon, f"{where}.spawn")
    elif track.csv is not None:
        _load(track, base_dir, epsilon)
    kwargs["base_dir"] = base_dir
    return _build(Scenario, kwargs, where)


def parse_scenario_document(doc: Any, base_dir: str = ".") -> ScenarioFile:
    doc = _require_mapping(doc, "scenario")
    _check_keys(doc, _SCENARIO_KEYS, "scenario")
    output = OutputOptions()
    if "output" in doc:
        out = _require_mapping(doc["output"], "output")
        _check_keys(out, {"svg", "figure"}, "output")
        for key, value in out.items():
            if not isinstance(value, bool):
                raise ConfigError(f"output.{key}: expected true/false")
        output = OutputOptions(**out)

    forms = [k for k in ("controller", "controllers", "scenarios") if k in doc]
    if len(forms) != 1:
        raise ConfigError("scenario: give exactly one of 'controller', 'controllers' or 'scenarios'")
    form = forms[0]
    base = {k: v for k, v in doc.items() if k not in ("controllers", "scenarios", "output")}
    if form == "controller":
        return ScenarioFile([parse_run(base, base_dir, "scenario")], True, output)
    if form == "controllers":
        entries = doc["controllers"]
        if not isinstance(entries, list) or not entries:
            raise ConfigError("controllers: expected a non-empty list")
        runs = [parse_run(base, base_dir, "scenario", controller=c) for c in entries]
        return ScenarioFile(runs, False, output)
    entries = doc["scenarios"]
    if not isinstance(entries, list) or not entries:
        raise ConfigError("scenarios: expected a non-empty list")
    if base:
        raise ConfigError(f"scenario: key {sorted(base)[0]!r} not allowed next to 'scenarios'")
    runs = [parse_run(_require_mapping(e, f"scenarios[{i}]"), base_dir, f"scenarios[{i}]") for i, e in enumerate(entries)]
    return ScenarioFile(runs, False, output)


def load_scenario_file(filename: str | FsPath) -> ScenarioFile:
    filename = FsPath(filename)
    text = filename.read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{filename}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}") from None
    parsed = parse_scenario_document(doc, str(filename.parent))
    parsed.source = str(filename)
    return parsed


def load_track_spec_file(filename: str | FsPath) -> TrackSpec:
    filename = FsPath(filename)
    try:
        doc = json.loads(filename.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{filename}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}") from None
    return parse_track(doc, "track")
