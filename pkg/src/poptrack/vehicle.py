"""Kinematic bicycle model used both as POP's predictor and as the simulated plant.

The pose refers to the rear-axle center.  Positions advance along the
steered direction ``theta + delta`` and the yaw advances with the angular
velocity, matching the one-step state transition the POP controller relies on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from poptrack.trajectory import wrap_angle


@dataclass(frozen=True)
class VehicleState:
    x: float = 0.0
    y: float = 0.0
    theta: float = 0.0
    v: float = 0.0
    omega: float = 0.0

    @property
    def position(self) -> tuple[float, float]:
        return self.x, self.y

    def is_finite(self) -> bool:
        return all(math.isfinite(c) for c in (self.x, self.y, self.theta, self.v, self.omega))


@dataclass(frozen=True)
class ControlCommand:
    steering: float = 0.0
    throttle: float = 0.0


@dataclass(frozen=True)
class PlantParams:
    wheelbase: float = 2.89
    steering_limit: float = 1.22
    max_accel: float = 3.0
    max_decel: float = 8.0
    v_cap: float = 69.44

    def __post_init__(self) -> None:
        for name in ("wheelbase", "steering_limit", "max_accel", "max_decel", "v_cap"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0.0):
                raise ValueError(f"{name} must be positive and finite, got {value}")
        if self.steering_limit > math.pi / 2:
            raise ValueError("steering_limit must not exceed pi/2")

    def acceleration(self, throttle: float) -> float:
        """Map a throttle/brake command in [-1, 1] to m/s^2."""
        return throttle * (self.max_accel if throttle >= 0.0 else self.max_decel)


def predict_location(state: VehicleState, steering: float, dt: float) -> tuple[float, float]:
    phi = state.theta + steering
    return (state.x + state.v * math.cos(phi) * dt, state.y + state.v * math.sin(phi) * dt)


def predict_state(
    state: VehicleState,
    cmd: ControlCommand,
    dt: float,
    params: PlantParams = PlantParams(),
) -> VehicleState:
    """Full one-step transition.

    Throttle enters as an acceleration over ``dt`` and steering sets the next
    angular velocity to the bicycle yaw rate ``v / L * tan(delta)``; with a
    zero command the pose rows reduce to :func:`predict_location`.
    """
    x, y = predict_location(state, cmd.steering, dt)
    return VehicleState(
        x=x,
        y=y,
        theta=wrap_angle(state.theta + state.omega * dt),
        v=state.v + params.acceleration(cmd.throttle) * dt,
        omega=state.v / params.wheelbase * math.tan(cmd.steering),
    )


def plant_step(state: VehicleState, cmd: ControlCommand, dt: float, params: PlantParams) -> VehicleState:
    omega = state.v / params.wheelbase * math.tan(cmd.steering)
    v = state.v + params.acceleration(cmd.throttle) * dt
    v = min(max(v, 0.0), params.v_cap)
    x, y = predict_location(state, cmd.steering, dt)
    return VehicleState(x=x, y=y, theta=wrap_angle(state.theta + omega * dt), v=v, omega=omega)
