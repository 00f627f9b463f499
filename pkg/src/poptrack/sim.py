"""Fixed-timestep closed-loop runner, telemetry, metrics and controller comparison."""

from __future__ import annotations

import csv
import hashlib
import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path as FsPath
from typing import Sequence

import numpy as np

from poptrack.controllers import (
    CONTROLLER_NAMES,
    SEARCH_WINDOW,
    LateralConfig,
    LongitudinalConfig,
    clamp_steering,
    longitudinal_step,
    make_controller,
)
from poptrack.tracks import TrackSpec, load_track
from poptrack.trajectory import (
    DEFAULT_EPSILON,
    Path,
    TrackingErrors,
    closest_index,
    densify_path,
    errors_at,
    euclidean_distance,
)
from poptrack.vehicle import ControlCommand, PlantParams, VehicleState, plant_step

RUN_CSV_HEADER = ["t", "x", "y", "theta", "v", "steering", "throttle", "crosstrack", "heading_err", "latency_us"]
METRIC_FIELDS = (
    "mean_abs_crosstrack",
    "mean_abs_heading",
    "max_abs_crosstrack",
    "mean_latency",
    "p99_latency",
    "steps",
)
TRANSIENT_SECONDS = 5.0


class SimulationError(Exception):
    """Raised for invalid scenarios or comparisons."""


@dataclass(frozen=True)
class StopRule:
    max_steps: int = 20_000
    goal_radius: float | None = 2.0

    def __post_init__(self) -> None:
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")
        if self.goal_radius is not None and not self.goal_radius > 0:
            raise ValueError("goal_radius must be positive")


@dataclass(frozen=True)
class Scenario:
    track: TrackSpec | Path
    controller: LateralConfig
    spawn: VehicleState = VehicleState()
    densify_resolution: float = 0.01
    epsilon: float = DEFAULT_EPSILON
    closed: bool = False
    dt: float = 0.05
    longitudinal: LongitudinalConfig = LongitudinalConfig()
    plant: PlantParams = PlantParams()
    stop: StopRule = StopRule()
    divergence_limit: float = 50.0
    base_dir: str | None = None

    def __post_init__(self) -> None:
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not self.densify_resolution > 0:
            raise ValueError("densify_resolution must be positive")
        if not self.divergence_limit > 0:
            raise ValueError("divergence_limit must be positive")

    @property
    def controller_name(self) -> str:
        return CONTROLLER_NAMES[type(self.controller)]

    def digest(self) -> str:
        h = hashlib.sha256()
        if isinstance(self.track, Path):
            h.update(np.ascontiguousarray(self.track.points).tobytes())
        else:
            h.update(json.dumps(self.track.to_dict(), sort_keys=True).encode())
        rest = {
            "controller": [self.controller_name, asdict(self.controller)],
            "spawn": asdict(self.spawn),
            "densify_resolution": self.densify_resolution,
            "epsilon": self.epsilon,
            "closed": self.closed,
            "dt": self.dt,
            "longitudinal": asdict(self.longitudinal),
            "plant": asdict(self.plant),
            "stop": asdict(self.stop),
            "divergence_limit": self.divergence_limit,
        }
        h.update(json.dumps(rest, sort_keys=True).encode())
        return h.hexdigest()[:16]


@dataclass(frozen=True)
class StepRecord:
    t: float
    state: VehicleState
    command: ControlCommand
    errors: TrackingErrors
    controller_latency: float


@dataclass
class RunLog:
    scenario_digest: str
    records: list[StepRecord]
    termination: str
    controller: str = ""
    densify_seconds: float = 0.0

    @property
    def diverged(self) -> bool:
        return self.termination == "diverged"

    def without_latency(self) -> "RunLog":
        records = [replace(r, controller_latency=0.0) for r in self.records]
        return replace(self, records=records, densify_seconds=0.0)

    def column(self, name: str) -> np.ndarray:
        getters = {
            "t": lambda r: r.t,
            "x": lambda r: r.state.x,
            "y": lambda r: r.state.y,
            "theta": lambda r: r.state.theta,
            "v": lambda r: r.state.v,
            "steering": lambda r: r.command.steering,
            "throttle": lambda r: r.command.throttle,
            "crosstrack": lambda r: r.errors.crosstrack,
            "heading_err": lambda r: r.errors.heading,
            "latency_us": lambda r: r.controller_latency,
        }
        return np.array([getters[name](r) for r in self.records], dtype=float)


@dataclass(frozen=True)
class TrackingMetrics:
    mean_abs_crosstrack: float
    mean_abs_heading: float
    max_abs_crosstrack: float
    mean_latency: float
    p99_latency: float
    steps: int

    def to_dict(self) -> dict[str, float | int]:
        return {name: getattr(self, name) for name in METRIC_FIELDS}


@dataclass(frozen=True)
class LatencyStats:
    mean: float
    p50: float
    p99: float
    samples: int

    def to_dict(self) -> dict[str, float | int]:
        return asdict(self)


def prepare_track(scenario: Scenario) -> tuple[Path, float]:
    """Load and densify the scenario's track; also returns the densification wall time."""
    if isinstance(scenario.track, Path):
        sparse = Path(scenario.track.points, scenario.track.resolution, scenario.epsilon, scenario.closed)
    else:
        sparse = load_track(scenario.track, scenario.base_dir, scenario.epsilon)
        if scenario.closed:
            sparse = Path(sparse.points, sparse.resolution, sparse.epsilon, True)
    t0 = time.perf_counter()
    dense = densify_path(sparse, scenario.densify_resolution)
    return dense, time.perf_counter() - t0


def spawn_on_path(path: Path, lateral_offset: float = 0.0, v: float = 0.0) -> VehicleState:
    """Spawn at waypoint 0, aligned with the first segment, shifted left by ``lateral_offset``."""
    (x0, y0), (x1, y1) = path.points[0], path.points[1]
    theta = math.atan2(y1 - y0, x1 - x0)
    return VehicleState(
        x=float(x0) - lateral_offset * math.sin(theta),
        y=float(y0) + lateral_offset * math.cos(theta),
        theta=theta,
        v=v,
    )


def run_scenario(scenario: Scenario, path: Path | None = None) -> RunLog:
    """Closed-loop run: measure errors, time the lateral step, then longitudinal law and plant.

    ``path`` may carry an already densified track so comparisons densify once.
    """
    densify_seconds = 0.0
    if path is None:
        path, densify_seconds = prepare_track(scenario)
    dt = scenario.dt
    limit = scenario.plant.steering_limit
    controller = make_controller(scenario.controller, limit)
    final = path[len(path) - 1]
    halfway = len(path) // 2
    last = len(path) - 1

    state = scenario.spawn
    progress = 0
    furthest = 0
    records: list[StepRecord] = []
    termination = "max_steps"
    for k in range(scenario.stop.max_steps):
        progress = closest_index(state.position, path, progress, SEARCH_WINDOW)
        furthest = max(furthest, progress)
        errors = errors_at(state.position, state.theta, path, progress)
        if not (state.is_finite() and math.isfinite(errors.crosstrack) and math.isfinite(errors.heading)):
            termination = "diverged"
            break
        if abs(errors.crosstrack) > scenario.divergence_limit:
            termination = "diverged"
            break

        t0 = time.perf_counter_ns()
        steering = controller.step(state, path, dt)
        latency_us = (time.perf_counter_ns() - t0) / 1000.0

        steering = clamp_steering(steering, limit)
        throttle = longitudinal_step(scenario.longitudinal, state.v, steering)
        command = ControlCommand(steering, throttle)
        records.append(StepRecord(k * dt, state, command, errors, latency_us))
        state = plant_step(state, command, dt, scenario.plant)

        if furthest < halfway:
            continue
        if scenario.stop.goal_radius is not None and euclidean_distance(state.position, final) <= scenario.stop.goal_radius:
            termination = "goal"
            break
        if furthest == last and _past_end(state.position, path):
            termination = "end_of_track"
            break

    if not records:
        raise SimulationError("run produced no records (spawn state already diverged)")
    return RunLog(scenario.digest(), records, termination, scenario.controller_name, densify_seconds)


def _past_end(position: tuple[float, float], path: Path) -> bool:
    (x0, y0), (x1, y1) = path.points[-2], path.points[-1]
    return (x1 - x0) * (position[0] - x1) + (y1 - y0) * (position[1] - y1) > 0.0


def latency_stats(samples_us: Sequence[float]) -> LatencyStats:
    arr = np.asarray(samples_us, dtype=float)
    if arr.size == 0:
        raise ValueError("no latency samples")
    return LatencyStats(float(arr.mean()), float(np.percentile(arr, 50)), float(np.percentile(arr, 99)), int(arr.size))


def compute_metrics(log: RunLog, skip_seconds: float = 0.0) -> TrackingMetrics:
    """Mean/max absolute errors and latency aggregates, optionally dropping the first ``skip_seconds``."""
    records = [r for r in log.records if r.t >= skip_seconds - 1e-12] if skip_seconds > 0 else log.records
    if not records:
        raise ValueError("cannot compute metrics of an empty log")
    ct = np.abs([r.errors.crosstrack for r in records])
    he = np.abs([r.errors.heading for r in records])
    lat = latency_stats([r.controller_latency for r in records])
    return TrackingMetrics(
        mean_abs_crosstrack=float(ct.mean()),
        mean_abs_heading=float(he.mean()),
        max_abs_crosstrack=float(ct.max()),
        mean_latency=lat.mean,
        p99_latency=lat.p99,
        steps=len(records),
    )


def transient_trimmed_metrics(log: RunLog) -> TrackingMetrics | None:
    """Metrics with the first few seconds removed; None when the run is shorter than that."""
    if log.records[-1].t < TRANSIENT_SECONDS:
        return None
    return compute_metrics(log, TRANSIENT_SECONDS)


@dataclass
class ComparisonRow:
    name: str
    metrics: TrackingMetrics
    trimmed: TrackingMetrics | None
    termination: str
    rank: int = 0


@dataclass
class Comparison:
    rows: list[ComparisonRow]
    logs: list[RunLog] = field(repr=False)
    path: Path = field(repr=False)

    def without_latency(self) -> "Comparison":
        logs = [lg.without_latency() for lg in self.logs]
        rows = [
            ComparisonRow(row.name, compute_metrics(lg), transient_trimmed_metrics(lg), row.termination, row.rank)
            for row, lg in zip(self.rows, logs)
        ]
        return Comparison(rows, logs, self.path)

    def ranking(self) -> list[str]:
        return [row.name for row in sorted(self.rows, key=lambda r: r.rank)]

    def to_dict(self) -> dict:
        return {
            "controllers": [
                {
                    "name": row.name,
                    "rank": row.rank,
                    "termination": row.termination,
                    "metrics": row.metrics.to_dict(),
                    "transient_trimmed": None if row.trimmed is None else row.trimmed.to_dict(),
                }
                for row in self.rows
            ],
            "ranking": self.ranking(),
        }


_SHARED_FIELDS = ("track", "densify_resolution", "epsilon", "closed", "dt", "longitudinal", "plant", "spawn")


def _check_homogeneous(scenarios: Sequence[Scenario]) -> None:
    first = scenarios[0]
    for i, other in enumerate(scenarios[1:], start=1):
        for name in _SHARED_FIELDS:
            a, b = getattr(first, name), getattr(other, name)
            same = np.array_equal(a.points, b.points) if isinstance(a, Path) and isinstance(b, Path) else a == b
            if not same:
                raise SimulationError(f"scenario {i} differs from scenario 0 in shared field {name!r}")


def compare(scenarios: Sequence[Scenario], threads: int | None = None) -> Comparison:
    """Run one scenario per controller on a shared setup and rank by mean absolute crosstrack.

    Ties keep input order.  ``threads`` defaults to ``POP_TRACK_THREADS`` or 1.
    """
    if not scenarios:
        raise SimulationError("nothing to compare")
    _check_homogeneous(scenarios)
    path, _ = prepare_track(scenarios[0])
    if threads is None:
        threads = int(os.environ.get("POP_TRACK_THREADS", "1") or 1)
    threads = max(1, min(threads, len(scenarios)))
    if threads == 1:
        logs = [run_scenario(s, path) for s in scenarios]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            logs = list(pool.map(lambda s: run_scenario(s, path), scenarios))

    names = _unique_names([s.controller_name for s in scenarios])
    rows = [
        ComparisonRow(name, compute_metrics(log), transient_trimmed_metrics(log), log.termination)
        for name, log in zip(names, logs)
    ]
    order = sorted(range(len(rows)), key=lambda i: rows[i].metrics.mean_abs_crosstrack)
    for rank, i in enumerate(order, start=1):
        rows[i].rank = rank
    return Comparison(rows, logs, path)


def _unique_names(names: list[str]) -> list[str]:
    seen: dict[str, int] = {}
    out = []
    for name in names:
        count = seen.get(name, 0)
        seen[name] = count + 1
        out.append(name if count == 0 else f"{name}#{count + 1}")
    return out


def write_run_csv(log: RunLog, filename: str | FsPath) -> None:
    with open(filename, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(RUN_CSV_HEADER)
        for r in log.records:
            s, c, e = r.state, r.command, r.errors
            writer.writerow([
                repr(r.t), repr(s.x), repr(s.y), repr(s.theta), repr(s.v),
                repr(c.steering), repr(c.throttle), repr(e.crosstrack), repr(e.heading),
                repr(r.controller_latency),
            ])
