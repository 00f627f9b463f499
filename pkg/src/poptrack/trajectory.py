"""Waypoint geometry: distances, densification, lookahead selection, tracking errors."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable, NamedTuple, Sequence

import numpy as np

if TYPE_CHECKING:
    from poptrack.vehicle import VehicleState

DEFAULT_EPSILON = 0.01
DEFAULT_WHEELBASE = 2.89

# Chunk size for the forward lookahead scan; most hits land in the first chunk.
_SCAN_CHUNK = 4096


class Waypoint(NamedTuple):
    x: float
    y: float


class LookaheadResult(NamedTuple):
    index: int
    point: Waypoint
    lookahead_distance: float


class TrackingErrors(NamedTuple):
    crosstrack: float
    heading: float


class AxleReference(str, enum.Enum):
    REAR = "rear"
    FRONT = "front"
    CG = "cg"


def wrap_angle(angle: float) -> float:
    """Wrap an angle into (-pi, pi].

    In-range values pass through untouched and ``wrap_angle(-a) == -wrap_angle(a)``
    holds exactly away from the +/-pi boundary.
    """
    if -math.pi < angle <= math.pi:
        return angle
    wrapped = math.remainder(angle, 2.0 * math.pi)
    return math.pi if wrapped <= -math.pi else wrapped


def euclidean_distance(a: Sequence[float], b: Sequence[float]) -> float:
    return math.hypot(b[0] - a[0], b[1] - a[1])


@dataclass(frozen=True, eq=False)
class Path:
    """Ordered, immutable waypoint sequence.

    ``points`` is an (N, 2) float array and is made read-only on construction.
    ``resolution`` is the nominal inter-waypoint spacing, ``epsilon`` the
    distance approximation threshold used by lookahead queries.  ``closed``
    lets the lookahead scan wrap past the last waypoint.
    """

    points: np.ndarray
    resolution: float
    epsilon: float = DEFAULT_EPSILON
    closed: bool = False

    def __post_init__(self) -> None:
        pts = np.array(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise ValueError(f"points must have shape (N, 2), got {pts.shape}")
        if len(pts) < 2:
            raise ValueError("a path needs at least 2 waypoints")
        if not np.all(np.isfinite(pts)):
            raise ValueError("waypoints must be finite")
        spacing = np.hypot(*np.diff(pts, axis=0).T)
        if np.any(spacing <= 0.0):
            bad = int(np.argmin(spacing))
            raise ValueError(f"coincident consecutive waypoints at index {bad}")
        if not self.epsilon > 0.0:
            raise ValueError("epsilon must be positive")
        if not self.resolution > 0.0:
            raise ValueError("resolution must be positive")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @classmethod
    def from_points(
        cls,
        points: Iterable[Sequence[float]],
        resolution: float | None = None,
        epsilon: float = DEFAULT_EPSILON,
        closed: bool = False,
    ) -> "Path":
        pts = np.asarray([tuple(p) for p in points], dtype=float)
        if resolution is None:
            if len(pts) < 2:
                raise ValueError("a path needs at least 2 waypoints")
            resolution = float(np.max(np.hypot(*np.diff(pts, axis=0).T)))
        return cls(pts, resolution, epsilon, closed)

    def __len__(self) -> int:
        return len(self.points)

    def __getitem__(self, index: int) -> Waypoint:
        x, y = self.points[index]
        return Waypoint(float(x), float(y))

    @property
    def waypoints(self) -> list[Waypoint]:
        return [Waypoint(float(x), float(y)) for x, y in self.points]

    def spacings(self) -> np.ndarray:
        return np.hypot(*np.diff(self.points, axis=0).T)

    def length(self) -> float:
        return float(self.spacings().sum())


def densify_path(sparse: Path, resolution: float) -> Path:
    """Re-discretize ``sparse`` by linear interpolation so no gap exceeds ``resolution``.

    Original waypoints are kept.  A segment of length ``l`` is split into
    ``ceil(l / resolution)`` equal pieces; the small slack in the ceiling keeps
    re-densifying an already dense path from splitting segments again.
    """
    if len(sparse) < 2:
        raise ValueError("a path needs at least 2 waypoints")
    if not resolution > 0.0:
        raise ValueError(f"resolution must be positive, got {resolution}")
    pts = sparse.points
    seg = np.diff(pts, axis=0)
    seg_len = np.hypot(seg[:, 0], seg[:, 1])
    pieces = np.maximum(1, np.ceil(seg_len / resolution - 1e-9)).astype(np.int64)

    starts = np.repeat(pts[:-1], pieces, axis=0)
    steps = np.repeat(seg, pieces, axis=0)
    offsets = np.concatenate([np.arange(n) for n in pieces]).astype(float)
    frac = offsets / np.repeat(pieces, pieces)
    dense = starts + steps * frac[:, None]
    dense = np.vstack([dense, pts[-1:]])
    return Path(dense, resolution, sparse.epsilon, sparse.closed)


def closest_index(
    position: Sequence[float],
    path: Path,
    search_hint: int | None = None,
    window: int | None = None,
) -> int:
    """Index of the waypoint nearest to ``position``; ties go to the lower index.

    With both ``search_hint`` and ``window`` the search is restricted to
    ``[hint - window, hint + window]``.
    """
    lo, hi = 0, len(path)
    if search_hint is not None and window is not None:
        lo = max(0, search_hint - window)
        hi = min(len(path), search_hint + window + 1)
    pts = path.points[lo:hi]
    d2 = (pts[:, 0] - position[0]) ** 2 + (pts[:, 1] - position[1]) ** 2
    return lo + int(np.argmin(d2))


def _first_hit(position: Sequence[float], path: Path, ld: float, lo: int, hi: int) -> int | None:
    pts = path.points
    for begin in range(lo, hi, _SCAN_CHUNK):
        chunk = pts[begin:min(begin + _SCAN_CHUNK, hi)]
        d = np.hypot(chunk[:, 0] - position[0], chunk[:, 1] - position[1])
        hits = np.flatnonzero(np.abs(d - ld) <= path.epsilon)
        if hits.size:
            return begin + int(hits[0])
    return None


def lookahead_index(position: Sequence[float], path: Path, ld: float, start: int = 0) -> int:
    """First index at or after ``start`` whose distance from ``position`` is within
    ``path.epsilon`` of ``ld``.  Falls back to the last index when none qualifies.
    """
    if ld < 0.0:
        raise ValueError("lookahead distance must be non-negative")
    n = len(path)
    if not 0 <= start < n:
        raise IndexError(f"start {start} outside path of length {n}")
    hit = _first_hit(position, path, ld, start, n)
    if hit is None and path.closed and start > 0:
        hit = _first_hit(position, path, ld, 0, start)
    return n - 1 if hit is None else hit


def lookahead_point(position: Sequence[float], path: Path, ld: float, start: int = 0) -> LookaheadResult:
    index = lookahead_index(position, path, ld, start)
    return LookaheadResult(index, path[index], ld)


def reference_point(state: "VehicleState", reference: AxleReference, wheelbase: float) -> tuple[float, float]:
    if reference is AxleReference.REAR:
        return state.x, state.y
    offset = wheelbase if reference is AxleReference.FRONT else 0.5 * wheelbase
    return state.x + offset * math.cos(state.theta), state.y + offset * math.sin(state.theta)


def errors_at(position: Sequence[float], theta: float, path: Path, index: int) -> TrackingErrors:
    """Errors of a point/yaw pair against the path segment leaving waypoint ``index``.

    The last waypoint uses the segment arriving at it.
    """
    i = min(index, len(path) - 2)
    x0, y0 = path.points[i]
    x1, y1 = path.points[i + 1]
    tx, ty = x1 - x0, y1 - y0
    seg_len = math.hypot(tx, ty)
    # Left of the segment direction is positive.
    crosstrack = (tx * (position[1] - y0) - ty * (position[0] - x0)) / seg_len
    heading = wrap_angle(math.atan2(ty, tx) - theta)
    return TrackingErrors(crosstrack, heading)


def compute_errors(
    state: "VehicleState",
    path: Path,
    reference: AxleReference = AxleReference.REAR,
    wheelbase: float = DEFAULT_WHEELBASE,
    search_hint: int | None = None,
    window: int | None = None,
) -> TrackingErrors:
    """Signed crosstrack and wrapped heading error of ``state`` relative to ``path``."""
    point = reference_point(state, AxleReference(reference), wheelbase)
    index = closest_index(point, path, search_hint, window)
    return errors_at(point, state.theta, path, index)
