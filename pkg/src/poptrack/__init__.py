"""Path-tracking controllers (PID, Pure-Pursuit, Stanley, POP) on a kinematic bicycle plant."""

from poptrack.controllers import (
    LongitudinalConfig,
    PidConfig,
    PopConfig,
    PurePursuitConfig,
    StanleyConfig,
    build_candidates,
    clamp_steering,
    longitudinal_step,
    make_controller,
    pid_step,
    pop_step,
    pure_pursuit_step,
    stanley_step,
)
from poptrack.sim import Scenario, StopRule, compare, compute_metrics, run_scenario
from poptrack.tracks import TrackSpec, generate_track
from poptrack.trajectory import Path, Waypoint, compute_errors, densify_path, euclidean_distance, lookahead_index
from poptrack.vehicle import ControlCommand, PlantParams, VehicleState, plant_step, predict_location, predict_state

__version__ = "0.1.0"

__all__ = [
    "ControlCommand",
    "LongitudinalConfig",
    "Path",
    "PidConfig",
    "PlantParams",
    "PopConfig",
    "PurePursuitConfig",
    "Scenario",
    "StanleyConfig",
    "StopRule",
    "TrackSpec",
    "VehicleState",
    "Waypoint",
    "build_candidates",
    "clamp_steering",
    "compare",
    "compute_errors",
    "compute_metrics",
    "densify_path",
    "euclidean_distance",
    "generate_track",
    "longitudinal_step",
    "lookahead_index",
    "make_controller",
    "pid_step",
    "plant_step",
    "pop_step",
    "predict_location",
    "predict_state",
    "pure_pursuit_step",
    "run_scenario",
    "stanley_step",
]
