"""Lateral control laws (PID, Pure-Pursuit, Stanley, POP) and the coupled longitudinal law.

Each law exists as a plain function over explicit config/state objects.  The
``*Controller`` classes wrap them behind one ``step(state, path, dt)`` call so
the simulator can drive any of them the same way.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Protocol, Union

from poptrack.trajectory import (
    AxleReference,
    Path,
    closest_index,
    errors_at,
    euclidean_distance,
    lookahead_index,
    reference_point,
    wrap_angle,
)
from poptrack.vehicle import VehicleState, predict_location

# Half-width (in waypoints) of the windowed nearest-point search used by the
# controllers to track progress along a densified path.
SEARCH_WINDOW = 5000


@dataclass(frozen=True)
class PidConfig:
    kp: float = 0.25
    ki: float = 0.01
    kd: float = 0.2
    buffer_len: int = 500

    def __post_init__(self) -> None:
        if self.buffer_len < 1:
            raise ValueError("buffer_len must be >= 1")
        if not all(math.isfinite(g) for g in (self.kp, self.ki, self.kd)):
            raise ValueError("PID gains must be finite")


@dataclass
class PidState:
    """FIFO window of recent errors plus the previous error for the derivative."""

    buffer_len: int = 500
    error_buffer: deque = field(init=False)
    prev_error: float = 0.0

    def __post_init__(self) -> None:
        self.error_buffer = deque(maxlen=self.buffer_len)


@dataclass(frozen=True)
class PurePursuitConfig:
    wheelbase: float = 2.89
    kv: float = 0.9
    min_speed_floor: float = 1.0

    def __post_init__(self) -> None:
        if not (self.wheelbase > 0 and self.kv > 0 and self.min_speed_floor > 0):
            raise ValueError("wheelbase, kv and min_speed_floor must be positive")


@dataclass(frozen=True)
class StanleyConfig:
    k_cross: float = 1.5
    kv: float = 1.3
    ks: float = 1e-5
    wheelbase: float = 2.89

    def __post_init__(self) -> None:
        if not self.ks > 0:
            raise ValueError("ks must be positive")
        if not self.wheelbase > 0:
            raise ValueError("wheelbase must be positive")


@dataclass(frozen=True)
class PopConfig:
    """POP tunables.  ``nbd`` is the half-width of the steering search in radians."""

    kv: float = 0.2
    ld_min: float = 2.0
    nbd: float = math.radians(3.0)
    resolution: int = 21
    predict_dt: float = 0.05

    def __post_init__(self) -> None:
        if self.resolution < 3 or self.resolution % 2 == 0:
            raise ValueError(f"resolution must be odd and >= 3, got {self.resolution}")
        if not self.nbd > 0:
            raise ValueError("nbd must be positive")
        if self.ld_min < 0:
            raise ValueError("ld_min must be non-negative")
        if not self.predict_dt > 0:
            raise ValueError("predict_dt must be positive")


@dataclass
class PopState:
    prev_steering: float = 0.0
    search_start: int = 0


@dataclass(frozen=True)
class LongitudinalConfig:
    k_tau: float = 0.5
    delta_lim: float = 1.22
    v_lim: float = 69.44

    def __post_init__(self) -> None:
        if not 0.0 <= self.k_tau <= 1.0:
            raise ValueError("k_tau must lie in [0, 1]")
        if not (self.delta_lim > 0 and self.v_lim > 0):
            raise ValueError("delta_lim and v_lim must be positive")


LateralConfig = Union[PidConfig, PurePursuitConfig, StanleyConfig, PopConfig]


def clamp_steering(delta: float, limit: float) -> float:
    return min(max(delta, -limit), limit)


def pid_step(cfg: PidConfig, st: PidState, error: float, dt: float, limit: float) -> float:
    """PID on the lateral error with a FIFO-windowed integral.

    A positive ``error`` produces a positive (leftward) command, so callers
    pass the offset of the path relative to the vehicle.
    """
    st.error_buffer.append(error)
    derivative = (error - st.prev_error) / dt
    st.prev_error = error
    raw = cfg.kp * error + cfg.ki * sum(st.error_buffer) + cfg.kd * derivative
    return clamp_steering(raw, limit)


def pure_pursuit_law(cfg: PurePursuitConfig, alpha: float, v: float, limit: float) -> float:
    speed = max(v, cfg.min_speed_floor)
    return clamp_steering(math.atan(2.0 * cfg.wheelbase * math.sin(alpha) / (cfg.kv * speed)), limit)


def pure_pursuit_step(
    cfg: PurePursuitConfig, state: VehicleState, path: Path, search_start: int, limit: float
) -> float:
    ld = cfg.kv * max(state.v, cfg.min_speed_floor)
    lp = path[lookahead_index(state.position, path, ld, search_start)]
    alpha = wrap_angle(math.atan2(lp.y - state.y, lp.x - state.x) - state.theta)
    return pure_pursuit_law(cfg, alpha, state.v, limit)


def stanley_law(cfg: StanleyConfig, crosstrack: float, heading: float, v: float, limit: float) -> float:
    """Heading term plus a crosstrack term that steers back toward the path.

    With left-positive crosstrack, a vehicle left of the path gets a negative
    (rightward) correction.
    """
    return clamp_steering(heading + math.atan(-cfg.k_cross * crosstrack / (cfg.ks + cfg.kv * v)), limit)


def stanley_step(
    cfg: StanleyConfig,
    state: VehicleState,
    path: Path,
    limit: float,
    search_hint: int | None = None,
    window: int | None = None,
) -> float:
    front = reference_point(state, AxleReference.FRONT, cfg.wheelbase)
    index = closest_index(front, path, search_hint, window)
    err = errors_at(front, state.theta, path, index)
    return stanley_law(cfg, err.crosstrack, err.heading, state.v, limit)


def build_candidates(prev: float, nbd: float, resolution: int, limit: float) -> list[float]:
    """Evenly spaced steering candidates over ``prev +/- nbd``, each clamped to ``limit``."""
    if resolution < 3 or resolution % 2 == 0:
        raise ValueError(f"resolution must be odd and >= 3, got {resolution}")
    half = (resolution - 1) // 2
    # Integer numerators keep the offsets exactly antisymmetric about the center.
    return [clamp_steering(prev + nbd * ((k - half) / half), limit) for k in range(resolution)]


def pop_step(cfg: PopConfig, st: PopState, state: VehicleState, path: Path, limit: float) -> float:
    """One POP update: pick the candidate whose predicted location lands nearest the lookahead point."""
    position = state.position
    nearest = closest_index(position, path, st.search_start, SEARCH_WINDOW)
    st.search_start = max(st.search_start, nearest)

    candidates = build_candidates(st.prev_steering, cfg.nbd, cfg.resolution, limit)
    ld = cfg.ld_min + cfg.kv * state.v
    lp = path[lookahead_index(position, path, ld, st.search_start)]

    best_dist = math.inf
    delta = st.prev_steering
    for candidate in candidates:
        dist = euclidean_distance(predict_location(state, candidate, cfg.predict_dt), lp)
        if dist < best_dist:
            delta = candidate
            best_dist = dist
    st.prev_steering = delta
    return delta


def longitudinal_step(cfg: LongitudinalConfig, v: float, steering: float) -> float:
    steering = clamp_steering(steering, cfg.delta_lim)
    tau = cfg.k_tau + ((cfg.v_lim - v) / cfg.v_lim - abs(steering) / cfg.delta_lim) * (1.0 - cfg.k_tau)
    return min(max(tau, -1.0), 1.0)


class LateralController(Protocol):
    name: str

    def reset(self) -> None: ...

    def step(self, state: VehicleState, path: Path, dt: float) -> float: ...


class _Progress:
    # Windowed nearest-waypoint tracker shared by the controllers.
    # Starts at waypoint 0 so loops whose ends coincide resolve to the start.
    def __init__(self) -> None:
        self.index = 0

    def update(self, point: tuple[float, float], path: Path) -> int:
        self.index = closest_index(point, path, self.index, SEARCH_WINDOW)
        return self.index


class PidController:
    name = "pid"

    def __init__(self, cfg: PidConfig, limit: float) -> None:
        self.cfg = cfg
        self.limit = limit
        self.reset()

    def reset(self) -> None:
        self.state = PidState(self.cfg.buffer_len)
        self._progress = _Progress()

    def step(self, state: VehicleState, path: Path, dt: float) -> float:
        index = self._progress.update(state.position, path)
        err = errors_at(state.position, state.theta, path, index)
        return pid_step(self.cfg, self.state, -err.crosstrack, dt, self.limit)


class PurePursuitController:
    name = "pure_pursuit"

    def __init__(self, cfg: PurePursuitConfig, limit: float) -> None:
        self.cfg = cfg
        self.limit = limit
        self.reset()

    def reset(self) -> None:
        self._progress = _Progress()
        self._start = 0

    def step(self, state: VehicleState, path: Path, dt: float) -> float:
        self._start = max(self._start, self._progress.update(state.position, path))
        return pure_pursuit_step(self.cfg, state, path, self._start, self.limit)


class StanleyController:
    name = "stanley"

    def __init__(self, cfg: StanleyConfig, limit: float) -> None:
        self.cfg = cfg
        self.limit = limit
        self.reset()

    def reset(self) -> None:
        self._progress = _Progress()

    def step(self, state: VehicleState, path: Path, dt: float) -> float:
        front = reference_point(state, AxleReference.FRONT, self.cfg.wheelbase)
        index = self._progress.update(front, path)
        err = errors_at(front, state.theta, path, index)
        return stanley_law(self.cfg, err.crosstrack, err.heading, state.v, self.limit)


class PopController:
    name = "pop"

    def __init__(self, cfg: PopConfig, limit: float) -> None:
        self.cfg = cfg
        self.limit = limit
        self.reset()

    def reset(self) -> None:
        self.state = PopState()

    def step(self, state: VehicleState, path: Path, dt: float) -> float:
        return pop_step(self.cfg, self.state, state, path, self.limit)


CONTROLLER_NAMES = {
    PidConfig: "pid",
    PurePursuitConfig: "pure_pursuit",
    StanleyConfig: "stanley",
    PopConfig: "pop",
}


def make_controller(cfg: LateralConfig, limit: float) -> LateralController:
    if isinstance(cfg, PidConfig):
        return PidController(cfg, limit)
    if isinstance(cfg, PurePursuitConfig):
        return PurePursuitController(cfg, limit)
    if isinstance(cfg, StanleyConfig):
        return StanleyController(cfg, limit)
    if isinstance(cfg, PopConfig):
        return PopController(cfg, limit)
    raise TypeError(f"unknown controller config {type(cfg).__name__}")
