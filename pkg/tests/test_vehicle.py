import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from poptrack.vehicle import ControlCommand, PlantParams, VehicleState, plant_step, predict_location, predict_state

PARAMS = PlantParams()


def fit_circle(xs, ys):
    """Algebraic least-squares circle fit: x^2 + y^2 + D x + E y + F = 0."""
    a = np.column_stack([xs, ys, np.ones_like(xs)])
    b = -(xs**2 + ys**2)
    (d, e, f), *_ = np.linalg.lstsq(a, b, rcond=None)
    cx, cy = -d / 2, -e / 2
    return cx, cy, math.sqrt(cx**2 + cy**2 - f)


class TestPredictLocation:
    def test_zero_velocity_no_motion(self):
        assert predict_location(VehicleState(0, 0, 0, 0), 0.5, 0.05) == (0.0, 0.0)

    def test_straight_ahead(self):
        assert predict_location(VehicleState(0, 0, 0, 10), 0.0, 0.05) == (0.5, 0.0)

    def test_quarter_turn_steering(self):
        x, y = predict_location(VehicleState(0, 0, 0, 10), math.pi / 2, 0.05)
        assert x == pytest.approx(0.0, abs=1e-15)
        assert y == pytest.approx(0.5)

    def test_does_not_mutate(self):
        s = VehicleState(1, 2, 0.3, 4)
        predict_location(s, 0.1, 0.05)
        assert s == VehicleState(1, 2, 0.3, 4)

    @settings(max_examples=200)
    @given(
        st.floats(-100, 100), st.floats(-100, 100), st.floats(-math.pi, math.pi),
        st.floats(0, 40), st.floats(-1.22, 1.22), st.floats(-50, 50), st.floats(-50, 50),
    )
    def test_translation_equivariance(self, x, y, th, v, d, a, b):
        p0 = predict_location(VehicleState(x, y, th, v), d, 0.05)
        p1 = predict_location(VehicleState(x + a, y + b, th, v), d, 0.05)
        assert p1[0] - (x + a) == pytest.approx(p0[0] - x, abs=1e-9)
        assert p1[1] - (y + b) == pytest.approx(p0[1] - y, abs=1e-9)

    @settings(max_examples=200)
    @given(st.floats(-math.pi, math.pi), st.floats(0, 40), st.floats(-1.22, 1.22), st.floats(-math.pi, math.pi))
    def test_rotation_equivariance(self, th, v, d, rho):
        dx, dy = predict_location(VehicleState(0, 0, th, v), d, 0.05)
        rx, ry = predict_location(VehicleState(0, 0, th + rho, v), d, 0.05)
        c, s = math.cos(rho), math.sin(rho)
        assert rx == pytest.approx(c * dx - s * dy, abs=1e-9)
        assert ry == pytest.approx(s * dx + c * dy, abs=1e-9)


class TestPredictState:
    def test_zero_fixed_point(self):
        assert predict_state(VehicleState(), ControlCommand(), 0.3) == VehicleState()

    def test_yaw_integrates_angular_velocity(self):
        out = predict_state(VehicleState(0, 0, 0, 10, 0.2), ControlCommand(), 0.05)
        assert out.theta == pytest.approx(0.01)

    def test_throttle_as_acceleration(self):
        out = predict_state(VehicleState(0, 0, 0, 10, 0), ControlCommand(0.0, 1.0), 0.05, PlantParams(max_accel=2.0))
        assert out.v == pytest.approx(10.1)

    @given(st.floats(-math.pi, math.pi), st.floats(0, 40), st.floats(-1.22, 1.22), st.floats(0.001, 0.2))
    def test_matches_predict_location(self, th, v, d, dt):
        s = VehicleState(3.0, -2.0, th, v, 0.4)
        out = predict_state(s, ControlCommand(d, 0.0), dt)
        assert (out.x, out.y) == predict_location(s, d, dt)

    def test_deterministic(self):
        s = VehicleState(1.1, 2.2, 0.3, 12.0, 0.1)
        c = ControlCommand(0.2, 0.4)
        assert predict_state(s, c, 0.05) == predict_state(s, c, 0.05)


class TestPlant:
    def test_start_from_rest(self):
        out = plant_step(VehicleState(), ControlCommand(0.0, 1.0), 0.05, PlantParams(max_accel=3.0))
        assert out.v == pytest.approx(0.15)
        assert (out.x, out.y, out.theta) == (0.0, 0.0, 0.0)

    def test_straight_line_exact(self):
        s = VehicleState(0, 0, 0, 5.0)
        for _ in range(500):
            s = plant_step(s, ControlCommand(0.0, 0.5), 0.05, PARAMS)
            assert s.y == 0.0 and s.theta == 0.0

    def test_brake_never_reverses(self):
        s = VehicleState(0, 0, 0, 1.0)
        for _ in range(20):
            s = plant_step(s, ControlCommand(0.0, -1.0), 0.05, PARAMS)
            assert s.v >= 0.0
        assert s.v == 0.0

    def test_speed_cap(self):
        s = plant_step(VehicleState(0, 0, 0, 69.4), ControlCommand(0.0, 1.0), 0.05, PARAMS)
        assert s.v == PARAMS.v_cap

    @pytest.mark.parametrize("delta, v", [(0.3, 10.0), (0.05, 20.0), (-0.6, 4.0)])
    def test_turning_radius(self, delta, v):
        dt = 0.005
        radius = PARAMS.wheelbase / math.tan(abs(delta))
        steps = int(math.ceil(2 * math.pi * radius / (v * dt)))
        s = VehicleState(0, 0, 0, v)
        xs, ys = [s.x], [s.y]
        for _ in range(steps):
            s = plant_step(s, ControlCommand(delta, 0.0), dt, PARAMS)
            xs.append(s.x)
            ys.append(s.y)
        xs, ys = np.array(xs), np.array(ys)
        cx, cy, _ = fit_circle(xs, ys)
        deviation = np.abs(np.hypot(xs - cx, ys - cy) - radius).max() / radius
        assert deviation < 1e-3

    @settings(max_examples=200)
    @given(
        st.floats(-math.pi, math.pi), st.floats(1.0, 30.0), st.floats(-1.0, 1.0),
        st.floats(-0.6, 0.6).filter(lambda d: abs(d) > 0.01),
    )
    def test_half_step_convergence(self, th, v, throttle, delta):
        def gap(dt):
            s = VehicleState(0, 0, th, v)
            c = ControlCommand(delta, throttle)
            full = plant_step(s, c, dt, PARAMS)
            half = plant_step(plant_step(s, c, dt / 2, PARAMS), c, dt / 2, PARAMS)
            return math.hypot(full.x - half.x, full.y - half.y) + abs(full.theta - half.theta)

        assert gap(0.05) / gap(0.025) >= 3.5

    def test_params_validated(self):
        with pytest.raises(ValueError):
            PlantParams(wheelbase=0.0)
        with pytest.raises(ValueError):
            PlantParams(steering_limit=2.0)
