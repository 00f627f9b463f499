import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from poptrack.controllers import (
    SEARCH_WINDOW,
    LongitudinalConfig,
    PidConfig,
    PidController,
    PidState,
    PopConfig,
    PopController,
    PopState,
    PurePursuitConfig,
    PurePursuitController,
    StanleyConfig,
    StanleyController,
    build_candidates,
    clamp_steering,
    longitudinal_step,
    make_controller,
    pid_step,
    pop_step,
    pure_pursuit_law,
    pure_pursuit_step,
    stanley_law,
    stanley_step,
)
from poptrack.trajectory import Path, densify_path
from poptrack.vehicle import VehicleState

LIMIT = 1.22


def random_path(rng, n_sparse=12, spacing=1.0, resolution=0.05):
    """Smoothly wandering polyline starting near the origin heading roughly +x."""
    heading = rng.uniform(-0.3, 0.3)
    pts = [(0.0, 0.0)]
    for _ in range(n_sparse):
        heading += rng.uniform(-0.4, 0.4)
        x, y = pts[-1]
        pts.append((x + spacing * math.cos(heading), y + spacing * math.sin(heading)))
    return densify_path(Path.from_points(pts), resolution)


def random_state(rng, path):
    i = int(rng.integers(0, len(path) // 2))
    x, y = path.points[i]
    return VehicleState(
        x=float(x + rng.uniform(-1, 1)),
        y=float(y + rng.uniform(-1, 1)),
        theta=float(rng.uniform(-math.pi, math.pi)),
        v=float(rng.uniform(0.0, 30.0)),
    )


def oracle_pop(cfg, prev, start, state, path, limit):
    """Exhaustive re-evaluation with plain loops, sharing only the candidate list."""
    pts = path.points
    lo, hi = max(0, start - SEARCH_WINDOW), min(len(pts), start + SEARCH_WINDOW + 1)
    best_i, best_d2 = lo, math.inf
    for i in range(lo, hi):
        d2 = (pts[i][0] - state.x) ** 2 + (pts[i][1] - state.y) ** 2
        if d2 < best_d2:
            best_i, best_d2 = i, d2
    start = max(start, best_i)

    ld = cfg.ld_min + cfg.kv * state.v
    target = len(pts) - 1
    for i in range(start, len(pts)):
        if abs(math.hypot(pts[i][0] - state.x, pts[i][1] - state.y) - ld) <= path.epsilon:
            target = i
            break
    lx, ly = float(pts[target][0]), float(pts[target][1])

    cands = build_candidates(prev, cfg.nbd, cfg.resolution, limit)
    dists = []
    for c in cands:
        px = state.x + state.v * math.cos(state.theta + c) * cfg.predict_dt
        py = state.y + state.v * math.sin(state.theta + c) * cfg.predict_dt
        dists.append(math.hypot(lx - px, ly - py))
    return cands[min(range(len(cands)), key=dists.__getitem__)], start


def mirror_path(path):
    return Path(path.points * np.array([1.0, -1.0]), path.resolution, path.epsilon, path.closed)


def mirror_state(s):
    return VehicleState(s.x, -s.y, -s.theta, s.v, -s.omega)


STRAIGHT = densify_path(Path.from_points([(0, 0), (100, 0)]), 0.01)


class TestClamp:
    @pytest.mark.parametrize("delta, expected", [(0.3, 0.3), (2.0, 1.22), (-5.0, -1.22)])
    def test_examples(self, delta, expected):
        assert clamp_steering(delta, LIMIT) == expected


class TestPid:
    def test_zero_error(self):
        assert pid_step(PidConfig(), PidState(), 0.0, 0.05, LIMIT) == 0.0

    def test_first_step_clipped(self):
        assert pid_step(PidConfig(), PidState(), 1.0, 0.05, LIMIT) == 1.22

    def test_fifo_integral_window(self):
        cfg = PidConfig(kp=0.0, ki=0.01, kd=0.0, buffer_len=500)
        st_ = PidState(500)
        for _ in range(600):
            out = pid_step(cfg, st_, 0.1, 0.05, LIMIT)
        assert out == pytest.approx(0.5, abs=1e-12)

    @settings(max_examples=200)
    @given(st.integers(1, 1500))
    def test_fifo_capacity_and_order(self, n):
        cfg = PidConfig()
        st_ = PidState(cfg.buffer_len)
        for k in range(n):
            pid_step(cfg, st_, float(k), 0.05, LIMIT)
            assert len(st_.error_buffer) <= cfg.buffer_len
        kept = min(n, cfg.buffer_len)
        assert list(st_.error_buffer) == [float(k) for k in range(n - kept, n)]

    def test_controller_steers_toward_path(self):
        ctrl = PidController(PidConfig(), LIMIT)
        left_of_path = VehicleState(10.0, 1.0, 0.0, 5.0)
        assert ctrl.step(left_of_path, STRAIGHT, 0.05) < 0.0

    def test_reset(self):
        ctrl = PidController(PidConfig(), LIMIT)
        s = VehicleState(10.0, 0.5, 0.0, 5.0)
        first = ctrl.step(s, STRAIGHT, 0.05)
        ctrl.step(s, STRAIGHT, 0.05)
        ctrl.reset()
        assert ctrl.step(s, STRAIGHT, 0.05) == first

    def test_bad_config(self):
        with pytest.raises(ValueError):
            PidConfig(buffer_len=0)


class TestPurePursuit:
    def test_dead_ahead(self):
        assert pure_pursuit_law(PurePursuitConfig(), 0.0, 10.0, LIMIT) == 0.0

    def test_example_value(self):
        expected = math.atan(2 * 2.89 * math.sin(0.1) / 9.0)
        out = pure_pursuit_law(PurePursuitConfig(), 0.1, 10.0, LIMIT)
        assert out == pytest.approx(expected, abs=1e-15)
        assert out == pytest.approx(0.0640, abs=5e-5)

    @given(st.floats(-math.pi, math.pi), st.floats(0.0, 70.0))
    def test_odd_in_alpha(self, alpha, v):
        cfg = PurePursuitConfig()
        assert pure_pursuit_law(cfg, -alpha, v, LIMIT) == -pure_pursuit_law(cfg, alpha, v, LIMIT)

    def test_zero_speed_finite(self):
        assert math.isfinite(pure_pursuit_law(PurePursuitConfig(), 0.5, 0.0, LIMIT))

    def test_steers_toward_path(self):
        s = VehicleState(10.0, 1.0, 0.0, 5.0)
        assert pure_pursuit_step(PurePursuitConfig(), s, STRAIGHT, 0, LIMIT) < 0.0


class TestStanley:
    def test_on_path(self):
        assert stanley_law(StanleyConfig(), 0.0, 0.0, 10.0, LIMIT) == 0.0

    def test_heading_only(self):
        assert stanley_law(StanleyConfig(), 0.0, 0.2, 10.0, LIMIT) == 0.2

    def test_large_offset_clipped(self):
        # Right of the path (negative crosstrack) pushes left, on top of the heading term.
        assert stanley_law(StanleyConfig(), -1e9, 1.0, 10.0, LIMIT) == 1.22

    def test_large_offset_opposite_side(self):
        out = stanley_law(StanleyConfig(), 1e9, 1.0, 10.0, LIMIT)
        assert out == pytest.approx(1.0 - math.pi / 2, abs=1e-6)

    def test_zero_speed_finite(self):
        assert math.isfinite(stanley_law(StanleyConfig(), 0.3, 0.0, 0.0, LIMIT))

    def test_steers_toward_path(self):
        s = VehicleState(10.0, 1.0, 0.0, 5.0)
        assert stanley_step(StanleyConfig(), s, STRAIGHT, LIMIT) < 0.0


class TestCandidates:
    def test_three_point_grid(self):
        assert build_candidates(0.0, 0.1, 3, LIMIT) == [-0.1, 0.0, 0.1]

    def test_clamped_at_limit(self):
        assert build_candidates(1.20, 0.1, 3, LIMIT) == pytest.approx([1.10, 1.20, 1.22], abs=1e-15)

    def test_default_resolution(self):
        cfg = PopConfig()
        cands = build_candidates(0.0, cfg.nbd, cfg.resolution, LIMIT)
        assert len(cands) == 21
        assert np.diff(cands) == pytest.approx(np.full(20, 2 * cfg.nbd / 20), abs=1e-15)

    @given(st.floats(-LIMIT, LIMIT), st.floats(1e-4, 0.5), st.sampled_from([3, 5, 21, 41]))
    def test_antisymmetric(self, prev, nbd, res):
        assert build_candidates(-prev, nbd, res, LIMIT) == [-c for c in reversed(build_candidates(prev, nbd, res, LIMIT))]

    @pytest.mark.parametrize("res", [0, 1, 2, 4])
    def test_bad_resolution(self, res):
        with pytest.raises(ValueError):
            build_candidates(0.0, 0.1, res, LIMIT)


class TestPop:
    def test_straight_ahead(self):
        st_ = PopState()
        assert pop_step(PopConfig(), st_, VehicleState(0, 0, 0, 10.0), STRAIGHT, LIMIT) == 0.0
        assert st_.prev_steering == 0.0

    def test_target_to_the_left(self):
        path = densify_path(Path.from_points([(0, 0), (5, 0), (10, 3)]), 0.01)
        out = pop_step(PopConfig(), PopState(), VehicleState(3.0, 0, 0, 10.0), path, LIMIT)
        assert out > 0.0

    @settings(max_examples=200, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_matches_oracle(self, seed):
        rng = np.random.default_rng(seed)
        path = random_path(rng)
        state = random_state(rng, path)
        prev = float(rng.uniform(-LIMIT, LIMIT))
        cfg = PopConfig()
        st_ = PopState(prev, 0)
        expected, start = oracle_pop(cfg, prev, 0, state, path, LIMIT)
        assert pop_step(cfg, st_, state, path, LIMIT) == expected
        assert st_.prev_steering == expected
        assert st_.search_start == start

    @settings(max_examples=200, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_proximal_containment(self, seed):
        rng = np.random.default_rng(seed)
        path = random_path(rng)
        cfg = PopConfig(nbd=float(rng.uniform(0.01, 0.5)))
        prev = float(rng.uniform(-LIMIT, LIMIT))
        out = pop_step(cfg, PopState(prev), random_state(rng, path), path, LIMIT)
        assert prev - cfg.nbd - 1e-15 <= out <= prev + cfg.nbd + 1e-15
        assert -LIMIT <= out <= LIMIT

    def test_search_start_monotone(self):
        st_ = PopState()
        ctrl_path = STRAIGHT
        for x in (50.0, 10.0, 60.0):
            before = st_.search_start
            pop_step(PopConfig(), st_, VehicleState(x, 0.2, 0.0, 5.0), ctrl_path, LIMIT)
            assert st_.search_start >= before

    def test_bad_config(self):
        with pytest.raises(ValueError):
            PopConfig(resolution=20)


class TestMirrorSymmetry:
    @settings(max_examples=200, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_pure_pursuit(self, seed):
        rng = np.random.default_rng(seed)
        path = random_path(rng)
        s = random_state(rng, path)
        cfg = PurePursuitConfig()
        a = pure_pursuit_step(cfg, s, path, 0, LIMIT)
        b = pure_pursuit_step(cfg, mirror_state(s), mirror_path(path), 0, LIMIT)
        assert b == -a

    @settings(max_examples=200, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_stanley(self, seed):
        rng = np.random.default_rng(seed)
        path = random_path(rng)
        s = random_state(rng, path)
        cfg = StanleyConfig()
        a = stanley_step(cfg, s, path, LIMIT)
        b = stanley_step(cfg, mirror_state(s), mirror_path(path), LIMIT)
        assert b == -a

    @settings(max_examples=200, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_pop(self, seed):
        rng = np.random.default_rng(seed)
        path = random_path(rng)
        s = random_state(rng, path)
        assume(s.v > 0.1)
        prev = float(rng.uniform(-LIMIT, LIMIT))
        a = pop_step(PopConfig(), PopState(prev), s, path, LIMIT)
        b = pop_step(PopConfig(), PopState(-prev), mirror_state(s), mirror_path(path), LIMIT)
        assert b == -a


class TestLongitudinal:
    cfg = LongitudinalConfig()

    @pytest.mark.parametrize("v, delta, expected", [(0.0, 0.0, 1.0), (69.44, 0.0, 0.5), (69.44, 1.22, 0.0)])
    def test_points(self, v, delta, expected):
        assert abs(longitudinal_step(self.cfg, v, delta) - expected) <= 1e-12

    @given(st.floats(0, 100), st.floats(0, 100), st.floats(-1.22, 1.22))
    def test_decreasing_in_speed(self, v1, v2, d):
        lo, hi = sorted((v1, v2))
        assert longitudinal_step(self.cfg, hi, d) <= longitudinal_step(self.cfg, lo, d)

    @given(st.floats(0, 100), st.floats(0, 1.5), st.floats(0, 1.5))
    def test_decreasing_in_steering(self, v, d1, d2):
        lo, hi = sorted((d1, d2))
        assert longitudinal_step(self.cfg, v, -hi) <= longitudinal_step(self.cfg, v, lo)

    @given(st.floats(-1e3, 1e3), st.floats(-10, 10))
    def test_bounded(self, v, d):
        assert -1.0 <= longitudinal_step(self.cfg, v, d) <= 1.0


class TestClippingAllControllers:
    @settings(max_examples=200, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.floats(0.05, 1.22))
    def test_outputs_within_limit(self, seed, limit):
        rng = np.random.default_rng(seed)
        path = random_path(rng)
        s = random_state(rng, path)
        for cfg in (PidConfig(), PurePursuitConfig(), StanleyConfig(), PopConfig()):
            ctrl = make_controller(cfg, limit)
            for _ in range(3):
                out = ctrl.step(s, path, 0.05)
                assert -limit <= out <= limit


class TestDeterminism:
    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_bit_identical(self, seed):
        rng = np.random.default_rng(seed)
        path = random_path(rng)
        states = [random_state(rng, path) for _ in range(5)]
        for cls, cfg in (
            (PidController, PidConfig()),
            (PurePursuitController, PurePursuitConfig()),
            (StanleyController, StanleyConfig()),
            (PopController, PopConfig()),
        ):
            a, b = cls(cfg, LIMIT), cls(cfg, LIMIT)
            assert [a.step(s, path, 0.05) for s in states] == [b.step(s, path, 0.05) for s in states]

    def test_unknown_config(self):
        with pytest.raises(TypeError):
            make_controller(object(), LIMIT)
